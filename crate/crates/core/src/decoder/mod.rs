//! Incremental blockwise beam search with joint decoder + CTC prefix scoring.

mod backend;
mod emission;
mod session;

pub use backend::{CallCounters, EncodedBlock, ModelBackend};
pub use emission::{CtcBudgetPolicy, EmissionPolicy};
pub use session::{
    joint_score, CommittedToken, DecodeSession, DecoderConfig, Finish, Hypothesis, SegmentRecord,
};

#[cfg(test)]
mod tests;
