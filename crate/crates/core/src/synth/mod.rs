//! Deterministic ground truth: scripted lattices, a scripted model backend
//! and a generator for synthetic corpora.
//!
//! All randomness comes from [`SplitRng`], a xoshiro256++ stream seeded via
//! SplitMix64 (`seed_from_u64`). Uniform draws use the top 53 bits of each
//! 64-bit output: `u = ((x >> 11) + 1) · 2⁻⁵³ ∈ (0, 1]`, and integer ranges
//! `[lo, hi]` use `lo + floor(u' · (hi − lo + 1))` with `u' = (x >> 11) · 2⁻⁵³`.
//! Reimplementations following these rules reproduce the fixtures exactly.

mod backend;
mod corpus;
mod rng;
mod script;

pub use backend::{load_lattice_file, LatticeBackend, ScriptedBackend};
pub use corpus::{synthetic_vocabulary, CorpusConfig, StreamFixture};
pub use rng::SplitRng;
pub use script::{mask_from_script, script_to_lattice, GroundTruth, Script};
