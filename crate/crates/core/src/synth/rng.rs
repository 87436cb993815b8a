use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Seeded xoshiro256++ with the draw conventions documented in [`crate::synth`].
#[derive(Debug, Clone)]
pub struct SplitRng(Xoshiro256PlusPlus);

impl SplitRng {
    pub fn new(seed: u64) -> SplitRng {
        SplitRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Independent seed for sub-stream `index` of `seed`.
    pub fn derive(seed: u64, index: u64) -> u64 {
        let mut r = SplitRng::new(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        r.next_u64()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in (0, 1].
    pub fn open_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * SCALE
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let span = (hi - lo + 1) as f64;
        lo + ((self.unit() * span) as usize).min(hi - lo)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let mut a = SplitRng::new(42);
        let mut b = SplitRng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
            let u = a.open_unit();
            b.open_unit();
            assert!(u > 0.0 && u <= 1.0);
            let k = a.range(3, 8);
            b.range(3, 8);
            assert!((3..=8).contains(&k));
        }
        assert_ne!(SplitRng::derive(1, 0), SplitRng::derive(1, 1));
    }

    #[test]
    fn range_covers_endpoints() {
        let mut r = SplitRng::new(7);
        let mut seen = [false; 4];
        for _ in 0..200 {
            seen[r.range(0, 3)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
