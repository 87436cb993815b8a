//! Incremental CTC prefix probability.
//!
//! For a prefix `g = h + c` the scorer keeps the forward variables of the
//! extended label sequence `[∅, g1, ∅, g2, ..., ∅]` at the current frame.
//! The last two entries are the exact-match masses of `g` ending in a
//! non-blank (`gamma_n`) or a blank (`gamma_b`); the two before them are
//! the same quantities for `h`. The prefix mass accumulates, frame by frame,
//! the mass of paths that complete `g` for the first time:
//!
//! ```text
//! phi(t-1)      = gamma_b[h](t-1) + (c != last(h) ? gamma_n[h](t-1) : 0)
//! completion(t) = phi(t-1) * L[t, c]
//! prefix(t)     = prefix(t-1) + completion(t)
//! ```
//!
//! Rows are normalized, so a path that has already produced `g` contributes
//! its full mass to every later horizon. Everything is in log space.

use crate::lattice::{CtcLattice, TokenId};
use crate::logspace::{log_add, LOG_ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixScorer {
    prefix: Vec<TokenId>,
    blank: TokenId,
    width: usize,
    /// Extended-label forward variables after `t` frames, `2|g|+1` entries.
    alpha: Vec<f64>,
    /// Exact-match masses indexed by frames consumed (`t + 1` entries).
    gamma_n: Vec<f64>,
    gamma_b: Vec<f64>,
    /// Prefix mass after `u + 1` frames.
    history: Vec<f64>,
    /// Mass of first completing the prefix at frame `u`.
    completions: Vec<f64>,
}

impl PrefixScorer {
    /// Scorer for the empty prefix, positioned before the first frame.
    pub fn root(blank: TokenId, width: usize) -> PrefixScorer {
        PrefixScorer {
            prefix: Vec::new(),
            blank,
            width,
            alpha: vec![0.0],
            gamma_n: vec![LOG_ZERO],
            gamma_b: vec![0.0],
            history: Vec::new(),
            completions: Vec::new(),
        }
    }

    /// Score `prefix` over every frame of `lattice`.
    pub fn new(prefix: &[TokenId], lattice: &CtcLattice, blank: TokenId) -> Result<PrefixScorer> {
        if prefix.is_empty() {
            return Err(Error::validation("prefix scorer needs a non-empty prefix"));
        }
        for &tok in prefix {
            check_token(tok, blank, lattice.width())?;
        }
        let mut scorer = PrefixScorer::root(blank, lattice.width());
        scorer.prefix = prefix.to_vec();
        scorer.alpha = vec![LOG_ZERO; 2 * prefix.len() + 1];
        scorer.alpha[0] = 0.0;
        scorer.gamma_b = vec![if prefix.is_empty() { 0.0 } else { LOG_ZERO }];
        for row in lattice.rows() {
            scorer.extend(row)?;
        }
        Ok(scorer)
    }

    /// Rebuild a scorer for `prefix` by chaining [`child`](Self::child) from
    /// the root. Used when the horizon shrinks after a cut.
    pub fn rebuild(prefix: &[TokenId], lattice: &CtcLattice, blank: TokenId) -> Result<PrefixScorer> {
        let mut s = PrefixScorer::root(blank, lattice.width());
        s.extend_rows(lattice)?;
        for &tok in prefix {
            s = s.child(tok, lattice)?;
        }
        Ok(s)
    }

    pub fn prefix(&self) -> &[TokenId] {
        &self.prefix
    }

    /// Frames consumed.
    pub fn frames(&self) -> usize {
        self.history.len()
    }

    /// Log prefix mass after each frame; `history()[u]` covers frames `0..=u`.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Log mass of first completing the prefix exactly at each frame.
    pub fn completions(&self) -> &[f64] {
        &self.completions
    }

    /// Log prefix mass at the current horizon. The empty prefix has mass 1.
    pub fn logprob(&self) -> f64 {
        if self.prefix.is_empty() {
            return 0.0;
        }
        self.history.last().copied().unwrap_or(LOG_ZERO)
    }

    pub fn gamma_n(&self) -> f64 {
        *self.gamma_n.last().expect("gamma_n is never empty")
    }

    pub fn gamma_b(&self) -> f64 {
        *self.gamma_b.last().expect("gamma_b is never empty")
    }

    /// Log mass of paths collapsing exactly to the prefix after `u + 1` frames.
    pub fn exact_history(&self) -> Vec<f64> {
        self.gamma_n
            .iter()
            .zip(&self.gamma_b)
            .skip(1)
            .map(|(&n, &b)| log_add(n, b))
            .collect()
    }

    /// Consume one lattice row.
    pub fn extend(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::validation(format!(
                "row has {} columns, scorer expects {}",
                row.len(),
                self.width
            )));
        }
        let len = self.prefix.len();
        let prev = &self.alpha;
        let mut next = vec![LOG_ZERO; prev.len()];
        let mut completion = LOG_ZERO;
        for s in 0..prev.len() {
            let label = if s % 2 == 0 { self.blank } else { self.prefix[s / 2] };
            let mut phi = if s >= 1 { prev[s - 1] } else { LOG_ZERO };
            if s >= 3 && s % 2 == 1 && self.prefix[s / 2] != self.prefix[s / 2 - 1] {
                phi = log_add(phi, prev[s - 2]);
            }
            next[s] = log_add(prev[s], phi) + row[label];
            if len > 0 && s == 2 * len - 1 {
                completion = phi + row[label];
            }
        }
        self.alpha = next;
        let last = self.alpha.len() - 1;
        if len == 0 {
            self.gamma_n.push(LOG_ZERO);
            self.gamma_b.push(self.alpha[0]);
            self.history.push(0.0);
            self.completions.push(LOG_ZERO);
        } else {
            self.gamma_n.push(self.alpha[last - 1]);
            self.gamma_b.push(self.alpha[last]);
            let prev_hist = self.history.last().copied().unwrap_or(LOG_ZERO);
            self.history.push(log_add(prev_hist, completion));
            self.completions.push(completion);
        }
        Ok(())
    }

    pub fn extend_rows(&mut self, lattice: &CtcLattice) -> Result<()> {
        for row in lattice.rows() {
            self.extend(row)?;
        }
        Ok(())
    }

    /// Scorer for `prefix + token` over the same frames, computed from this
    /// scorer's history in one pass. `lattice` must be the rows consumed so far.
    pub fn child(&self, token: TokenId, lattice: &CtcLattice) -> Result<PrefixScorer> {
        check_token(token, self.blank, self.width)?;
        if lattice.frames() != self.frames() || lattice.width() != self.width {
            return Err(Error::validation(format!(
                "child scoring needs the {} consumed frames, got a lattice of {}",
                self.frames(),
                lattice.frames()
            )));
        }
        let skip_ok = self.prefix.last() != Some(&token);
        let t_len = self.frames();
        let mut gamma_n = Vec::with_capacity(t_len + 1);
        let mut gamma_b = Vec::with_capacity(t_len + 1);
        let mut history = Vec::with_capacity(t_len);
        let mut completions = Vec::with_capacity(t_len);
        gamma_n.push(LOG_ZERO);
        gamma_b.push(LOG_ZERO);
        let mut hist = LOG_ZERO;
        for (u, row) in lattice.rows().enumerate() {
            // parent masses after u frames
            let mut phi = self.gamma_b[u];
            if skip_ok && !self.prefix.is_empty() {
                phi = log_add(phi, self.gamma_n[u]);
            }
            let n = log_add(gamma_n[u], phi) + row[token];
            let b = log_add(gamma_b[u], gamma_n[u]) + row[self.blank];
            let completion = phi + row[token];
            hist = log_add(hist, completion);
            gamma_n.push(n);
            gamma_b.push(b);
            history.push(hist);
            completions.push(completion);
        }
        let mut prefix = self.prefix.clone();
        prefix.push(token);
        let mut alpha = self.alpha.clone();
        alpha.push(gamma_n[t_len]);
        alpha.push(gamma_b[t_len]);
        Ok(PrefixScorer {
            prefix,
            blank: self.blank,
            width: self.width,
            alpha,
            gamma_n,
            gamma_b,
            history,
            completions,
        })
    }
}

fn check_token(tok: TokenId, blank: TokenId, width: usize) -> Result<()> {
    if tok == blank {
        return Err(Error::validation("prefix contains blank"));
    }
    if tok >= width {
        return Err(Error::Bounds {
            what: "token",
            index: tok,
            limit: width,
        });
    }
    Ok(())
}

/// Log prefix probability of `prefix` over the first `t` frames (`1 ≤ t ≤ T`).
pub fn prefix_logprob(lattice: &CtcLattice, prefix: &[TokenId], t: usize, blank: TokenId) -> Result<f64> {
    if t == 0 || t > lattice.frames() {
        return Err(Error::Bounds {
            what: "frame count",
            index: t,
            limit: lattice.frames(),
        });
    }
    if prefix.is_empty() {
        return Ok(0.0);
    }
    let scorer = PrefixScorer::new(prefix, &lattice.slice(0, t)?, blank)?;
    Ok(scorer.logprob())
}

/// Per-frame score maximized when locating a prefix in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignScore {
    /// Mass of completing the prefix for the first time at the frame. Peaks
    /// where the last prefix token is emitted.
    #[default]
    FirstCompletion,
    /// Cumulative prefix mass up to the frame. Non-decreasing in time, so its
    /// argmax is the first frame of the final plateau.
    PrefixMass,
    /// Mass of paths collapsing exactly to the prefix.
    ExactMass,
}

/// Frame in `from_frame..T` that best locates the end of `prefix`, using
/// [`AlignScore::FirstCompletion`]. Ties go to the earliest frame.
pub fn best_prefix_frame(
    lattice: &CtcLattice,
    prefix: &[TokenId],
    from_frame: usize,
    blank: TokenId,
) -> Result<usize> {
    best_prefix_frame_by(lattice, prefix, from_frame, blank, AlignScore::FirstCompletion)
}

pub fn best_prefix_frame_by(
    lattice: &CtcLattice,
    prefix: &[TokenId],
    from_frame: usize,
    blank: TokenId,
    score: AlignScore,
) -> Result<usize> {
    if from_frame >= lattice.frames() {
        return Err(Error::Bounds {
            what: "search start frame",
            index: from_frame,
            limit: lattice.frames(),
        });
    }
    let scorer = PrefixScorer::new(prefix, lattice, blank)?;
    let values = match score {
        AlignScore::FirstCompletion => scorer.completions().to_vec(),
        AlignScore::PrefixMass => scorer.history().to_vec(),
        AlignScore::ExactMass => scorer.exact_history(),
    };
    argmax_earliest(&values[from_frame..])
        .map(|i| i + from_frame)
        .ok_or(Error::AlignmentNotFound)
}

fn argmax_earliest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == LOG_ZERO {
            continue;
        }
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}
