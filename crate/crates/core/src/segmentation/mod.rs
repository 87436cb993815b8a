//! Segmentation policies.
//!
//! Streaming policies (`fixed`, `sim`, `greedy`, `align`) only look at frames
//! that have already been encoded. `dac` is offline and sees the whole mask.
//! All boundaries use [`SegmentBoundary`](crate::SegmentBoundary) semantics: `frame` is the last
//! absolute frame of the closing segment.

mod baselines;
mod mask;
mod punct;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{
    dac_boundaries, fixed_length_boundaries, fixed_next_boundary, sim_boundaries, sim_next_boundary,
    DacOutput,
};
pub use mask::{Pause, PauseMask, DEFAULT_MIN_PAUSE_MS};
pub use punct::{align_punct_step, greedy_punct_step, meets_min_len, AlignCut};

use crate::{Error, Result};

/// Slack for millisecond comparisons.
pub(crate) const MS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Translate without segmenting.
    None,
    Fixed,
    Dac,
    Sim,
    Greedy,
    Align,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::None,
        PolicyKind::Fixed,
        PolicyKind::Dac,
        PolicyKind::Sim,
        PolicyKind::Greedy,
        PolicyKind::Align,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::Fixed => "fixed",
            PolicyKind::Dac => "dac",
            PolicyKind::Sim => "sim",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Align => "align",
        }
    }

    /// Only DAC needs the complete stream.
    pub fn is_streaming(self) -> bool {
        self != PolicyKind::Dac
    }

    pub fn needs_mask(self) -> bool {
        matches!(self, PolicyKind::Dac | PolicyKind::Sim)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<PolicyKind> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub min_len_ms: f64,
    /// Upper bound for SIM and DAC; segment length for `fixed`.
    pub max_len_ms: f64,
    /// Shortest non-speech run that counts as a pause.
    pub min_pause_ms: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            kind: PolicyKind::Greedy,
            min_len_ms: 2000.0,
            max_len_ms: 20000.0,
            min_pause_ms: DEFAULT_MIN_PAUSE_MS,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.min_len_ms) {
            return Err(Error::Config(format!("min_len_ms must be > 0, got {}", self.min_len_ms)));
        }
        if !positive(self.max_len_ms) {
            return Err(Error::Config(format!("max_len_ms must be > 0, got {}", self.max_len_ms)));
        }
        if !positive(self.min_pause_ms) {
            return Err(Error::Config(format!(
                "min_pause_ms must be > 0, got {}",
                self.min_pause_ms
            )));
        }
        if self.kind == PolicyKind::Sim && self.min_len_ms >= self.max_len_ms {
            return Err(Error::Config(format!(
                "sim needs min_len_ms < max_len_ms, got {} >= {}",
                self.min_len_ms, self.max_len_ms
            )));
        }
        Ok(())
    }
}
