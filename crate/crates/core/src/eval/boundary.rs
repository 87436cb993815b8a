use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub predicted: usize,
    pub truth: usize,
}

impl Prf {
    /// Scores from match counts; pooling counts over streams gives
    /// micro-averaged values.
    pub fn from_counts(matched: usize, predicted: usize, truth: usize) -> Prf {
        if predicted == 0 && truth == 0 {
            return Prf { precision: 1.0, recall: 1.0, f1: 1.0, matched, predicted, truth };
        }
        let ratio = |n: usize| if n == 0 { 0.0 } else { matched as f64 / n as f64 };
        let precision = ratio(predicted);
        let recall = ratio(truth);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1, matched, predicted, truth }
    }

    pub fn merge(self, other: Prf) -> Prf {
        Prf::from_counts(self.matched + other.matched, self.predicted + other.predicted, self.truth + other.truth)
    }
}

/// Match predicted to true boundary frames one-to-one. Each prediction, in
/// order, takes the nearest unmatched truth within `tolerance` frames
/// (earlier on ties). An empty side scores 0 unless both are empty.
pub fn boundary_prf(predicted: &[usize], truth: &[usize], tolerance: usize) -> Prf {
    let mut used = vec![false; truth.len()];
    let mut matched = 0;
    for &p in predicted {
        let best = truth
            .iter()
            .enumerate()
            .filter(|&(i, &t)| !used[i] && t.abs_diff(p) <= tolerance)
            .min_by_key(|&(i, &t)| (t.abs_diff(p), i))
            .map(|(i, _)| i);
        if let Some(i) = best {
            used[i] = true;
            matched += 1;
        }
    }
    Prf::from_counts(matched, predicted.len(), truth.len())
}
