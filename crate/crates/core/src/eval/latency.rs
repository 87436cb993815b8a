use crate::{Error, Result};

fn lagging(delays: &[f64], source_ms: f64, norm_len: usize) -> Result<f64> {
    if delays.is_empty() {
        return Err(Error::UndefinedScore("lagging of an empty hypothesis".into()));
    }
    if norm_len == 0 {
        return Err(Error::UndefinedScore("lagging against an empty reference".into()));
    }
    let tau = delays
        .iter()
        .position(|&d| d >= source_ms)
        .map_or(delays.len(), |i| i + 1);
    let rate = source_ms / norm_len as f64;
    let sum: f64 = delays[..tau]
        .iter()
        .enumerate()
        .map(|(i, &d)| d - i as f64 * rate)
        .sum();
    Ok(sum / tau as f64)
}

/// Length-adaptive average lagging. `delays` are per-token emission times
/// in source milliseconds, `source_ms` the source duration.
pub fn laal(delays: &[f64], source_ms: f64, ref_len: usize) -> Result<f64> {
    lagging(delays, source_ms, delays.len().max(ref_len))
}

/// Average lagging with the oracle rate `source_ms / ref_len`.
pub fn average_lagging(delays: &[f64], source_ms: f64, ref_len: usize) -> Result<f64> {
    lagging(delays, source_ms, ref_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SplitRng;

    #[test]
    fn single_token_at_end() {
        assert_eq!(laal(&[3000.0], 3000.0, 1).unwrap(), 3000.0);
    }

    #[test]
    fn early_emission_hand_value() {
        // (100 + (100 - 1000) + (100 - 2000)) / 3
        assert_eq!(laal(&[100.0; 3], 3000.0, 3).unwrap(), -900.0);
    }

    #[test]
    fn cutoff_at_first_token_reaching_the_end() {
        // tau = 2; the third token is ignored
        let v = laal(&[500.0, 4000.0, 9000.0], 4000.0, 3).unwrap();
        let rate = 4000.0 / 3.0;
        assert!((v - (500.0 + 4000.0 - rate) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn longer_hypothesis_never_lags_less_than_al() {
        let delays = [200.0, 400.0, 600.0, 900.0, 1200.0, 1500.0];
        let l = laal(&delays, 2000.0, 3).unwrap();
        let a = average_lagging(&delays, 2000.0, 3).unwrap();
        assert!(l >= a);
    }

    #[test]
    fn equals_al_at_equal_lengths() {
        let mut rng = SplitRng::new(21);
        for _ in 0..100 {
            let n = rng.range(1, 30);
            let source = rng.range(1000, 20000) as f64;
            let mut d: Vec<f64> = (0..n).map(|_| rng.unit() * source * 1.2).collect();
            d.sort_by(f64::total_cmp);
            assert_eq!(laal(&d, source, n).unwrap(), average_lagging(&d, source, n).unwrap());
        }
    }

    #[test]
    fn shift_with_fixed_rate_term() {
        // shifting delays and the cutoff by c (same rate term) shifts the score by c
        let d = [300.0, 800.0, 1900.0, 2600.0];
        let base = laal(&d, 2000.0, 4).unwrap();
        let c = 750.0;
        let shifted: Vec<f64> = d.iter().map(|x| x + c).collect();
        let tau = shifted.iter().position(|&x| x >= 2000.0 + c).map_or(4, |i| i + 1);
        let manual: f64 =
            shifted[..tau].iter().enumerate().map(|(i, x)| x - i as f64 * 500.0).sum::<f64>() / tau as f64;
        assert!((manual - (base + c)).abs() < 1e-9);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(laal(&[], 1000.0, 2), Err(Error::UndefinedScore(_))));
        assert!(average_lagging(&[1.0], 1000.0, 0).is_err());
    }
}
