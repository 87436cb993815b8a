//! CTC computations over a [`CtcLattice`].

mod prefix;

pub use prefix::{best_prefix_frame, best_prefix_frame_by, prefix_logprob, AlignScore, PrefixScorer};

use crate::lattice::{CtcLattice, TokenId};
use crate::logspace::{log_add, LOG_ZERO};
use crate::{Error, Result};

/// One label per frame, blank included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePath {
    pub labels: Vec<TokenId>,
}

/// Per-frame argmax; ties go to the lowest column.
pub fn greedy_labels(lattice: &CtcLattice) -> FramePath {
    let labels = lattice
        .rows()
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    FramePath { labels }
}

/// Merge adjacent repeats, then drop blanks.
pub fn collapse(path: &[TokenId], blank: TokenId) -> Vec<TokenId> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in path {
        if prev != Some(l) && l != blank {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Number of tokens the greedy path emits.
pub fn greedy_token_count(lattice: &CtcLattice, blank: TokenId) -> usize {
    collapse(&greedy_labels(lattice).labels, blank).len()
}

fn check_labels(labels: &[TokenId], blank: TokenId, width: usize) -> Result<()> {
    for &l in labels {
        if l == blank {
            return Err(Error::validation("label sequence contains blank"));
        }
        if l >= width {
            return Err(Error::Bounds {
                what: "label",
                index: l,
                limit: width,
            });
        }
    }
    Ok(())
}

/// `ln Σ_{π: B(π) = labels} Π_t L[t, π_t]` over all frames of the lattice.
/// Infeasible sequences give `-inf`.
pub fn ctc_forward_logprob(lattice: &CtcLattice, labels: &[TokenId], blank: TokenId) -> Result<f64> {
    check_labels(labels, blank, lattice.width())?;
    let ext = 2 * labels.len() + 1;
    let label_at = |s: usize| if s.is_multiple_of(2) { blank } else { labels[s / 2] };
    let mut alpha = vec![LOG_ZERO; ext];
    alpha[0] = 0.0;
    let mut next = vec![LOG_ZERO; ext];
    for row in lattice.rows() {
        for s in 0..ext {
            let mut acc = alpha[s];
            if s >= 1 {
                acc = log_add(acc, alpha[s - 1]);
            }
            if s >= 3 && s % 2 == 1 && labels[s / 2] != labels[s / 2 - 1] {
                acc = log_add(acc, alpha[s - 2]);
            }
            next[s] = acc + row[label_at(s)];
        }
        std::mem::swap(&mut alpha, &mut next);
    }
    if lattice.is_empty() {
        return Ok(if labels.is_empty() { 0.0 } else { LOG_ZERO });
    }
    Ok(if labels.is_empty() {
        alpha[0]
    } else {
        log_add(alpha[ext - 2], alpha[ext - 1])
    })
}
