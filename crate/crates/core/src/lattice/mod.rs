//! Shared types: vocabularies, CTC lattices, stream blocks and boundaries.

pub mod io;
mod matrix;
mod stream;
mod vocab;

pub use matrix::{CtcLattice, DEFAULT_FRAME_MS, ROW_NORM_TOLERANCE};
pub use stream::{blocks_for_duration, SegmentBoundary, SpeechBlock, Trigger};
pub use vocab::{make_vocabulary, PunctRule, TokenId, Vocabulary, WORD_MARKER};
