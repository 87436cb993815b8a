use serde::{Deserialize, Serialize};

use crate::lattice::{CtcLattice, SpeechBlock, TokenId, Vocabulary};
use crate::Result;

/// Output of encoding one block: one encoder state and one lattice row per
/// encoder frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBlock {
    pub states: Vec<Vec<f32>>,
    pub rows: CtcLattice,
}

/// Invocation counts, monotonically non-decreasing over a backend's life.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounters {
    pub encode_calls: u64,
    pub decode_steps: u64,
    pub resets: u64,
}

/// A streaming speech translation model: blockwise encoder with a CTC head
/// and an autoregressive decoder.
pub trait ModelBackend {
    fn vocabulary(&self) -> &Vocabulary;

    fn encode_block(&mut self, block: &SpeechBlock) -> Result<EncodedBlock>;

    /// Next-token log-probabilities given the segment's token prefix. The
    /// returned vector has `vocabulary().width()` entries; the blank slot
    /// carries end-of-sequence.
    fn decoder_step(&mut self, prefix: &[TokenId], states: &[Vec<f32>]) -> Result<Vec<f64>>;

    /// Drop decoder context at a segment cut. `committed` is the closing
    /// segment's output; real models ignore it.
    fn reset_segment(&mut self, committed: &[TokenId]);

    fn counters(&self) -> CallCounters;
}
