use crate::ctc::greedy_token_count;
use crate::lattice::{CtcLattice, TokenId};

use super::Hypothesis;

/// Decides how far the beam may grow and which tokens are safe to release.
pub trait EmissionPolicy: Send + Sync + std::fmt::Debug {
    /// Hypothesis length (from segment start) the beam may expand to.
    fn target_len(&self, lattice: &CtcLattice, blank: TokenId, committed: usize) -> usize;

    /// Number of leading tokens (from segment start) that may be committed.
    fn stable_len(&self, beam: &[Hypothesis], target: usize) -> usize;
}

/// The greedy CTC path over the frames seen so far sets the token budget;
/// a token is released only once every surviving hypothesis agrees on it.
#[derive(Debug, Clone, Copy, Default)]
pub struct CtcBudgetPolicy;

impl EmissionPolicy for CtcBudgetPolicy {
    fn target_len(&self, lattice: &CtcLattice, blank: TokenId, committed: usize) -> usize {
        greedy_token_count(lattice, blank).max(committed)
    }

    fn stable_len(&self, beam: &[Hypothesis], target: usize) -> usize {
        let Some(first) = beam.first() else { return 0 };
        let mut lcp = first.tokens.len();
        for h in &beam[1..] {
            lcp = lcp.min(
                first
                    .tokens
                    .iter()
                    .zip(&h.tokens)
                    .take_while(|(a, b)| a == b)
                    .count(),
            );
        }
        lcp.min(target)
    }
}
