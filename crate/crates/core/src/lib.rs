//! Punctuation-driven segmentation for streaming long-form speech translation.
//!
//! The translation model's CTC output labels every encoder frame with a target
//! token or blank. Sentence punctuation in that latent alignment tells us where
//! in the source audio a sentence ends, so the same model that translates can
//! also segment the stream. This crate contains:
//!
//! - [`lattice`]: vocabularies, CTC lattices, stream blocks and the on-disk
//!   lattice container.
//! - [`ctc`]: greedy paths, collapse, forward and prefix probabilities.
//! - [`decoder`]: incremental blockwise beam search with joint decoder/CTC
//!   scoring over an abstract [`decoder::ModelBackend`].
//! - [`segmentation`]: the greedy and align punctuation policies plus the
//!   fixed-length, SIM and DAC baselines.
//! - [`synth`]: a deterministic scripted backend and fixture generator.
//! - [`eval`]: resegmentation, BLEU, LAAL and boundary metrics.
//! - [`harness`]: simulation runs, reports and sweeps behind the CLI.

pub mod ctc;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod harness;
pub mod lattice;
pub mod logspace;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use lattice::{CtcLattice, SegmentBoundary, SpeechBlock, TokenId, Trigger, Vocabulary};
