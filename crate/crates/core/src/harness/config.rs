use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::DecoderConfig;
use crate::eval::Tokenizer;
use crate::segmentation::{PolicyConfig, PolicyKind};
use crate::synth::CorpusConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Replay `script.json` with the scripted decoder.
    #[default]
    Scripted,
    /// Serve `lattice.ctcl` with a uniform decoder.
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    MinLenMs,
    MaxLenMs,
    Beam,
    Lambda,
    BlockMs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            param: SweepParam::MinLenMs,
            values: (1..=16).map(|k| k as f64 * 2000.0).collect(),
        }
    }
}

/// Everything a run needs. Loaded from TOML; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Fixture directory written by `gen-synth`.
    pub fixtures: PathBuf,
    pub out: PathBuf,
    pub block_ms: f64,
    pub backend: BackendKind,
    /// Peak mass of the scripted decoder; defaults to the script's sharpness.
    pub decoder_sharpness: Option<f64>,
    pub tokenizer: Tokenizer,
    pub boundary_tolerance_frames: usize,
    /// Also write wall-clock timings to `timing.json`.
    pub wall_clock: bool,
    pub policy: PolicyConfig,
    pub decoder: DecoderConfig,
    pub corpus: CorpusConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fixtures: PathBuf::from("fixtures"),
            out: PathBuf::from("out"),
            block_ms: 1600.0,
            backend: BackendKind::Scripted,
            decoder_sharpness: None,
            tokenizer: Tokenizer::Default,
            boundary_tolerance_frames: 2,
            wall_clock: false,
            policy: PolicyConfig::default(),
            decoder: DecoderConfig::default(),
            corpus: CorpusConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub policy: Option<PolicyKind>,
    pub beam: Option<usize>,
    pub lambda: Option<f64>,
    pub block_ms: Option<f64>,
    pub min_len_ms: Option<f64>,
    pub max_len_ms: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.policy {
            self.policy.kind = v;
        }
        if let Some(v) = o.beam {
            self.decoder.beam_width = v;
        }
        if let Some(v) = o.lambda {
            self.decoder.ctc_weight = v;
        }
        if let Some(v) = o.block_ms {
            self.block_ms = v;
        }
        if let Some(v) = o.min_len_ms {
            self.policy.min_len_ms = v;
        }
        if let Some(v) = o.max_len_ms {
            self.policy.max_len_ms = v;
        }
        if let Some(v) = o.seed {
            self.corpus.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = &o.fixtures {
            self.fixtures = v.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.decoder.validate()?;
        if !(self.block_ms.is_finite() && self.block_ms > 0.0) {
            return Err(Error::Config(format!("block_ms must be > 0, got {}", self.block_ms)));
        }
        if let Some(b) = self.decoder_sharpness {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::Config(format!("decoder_sharpness must lie in (0, 1], got {b}")));
            }
        }
        Ok(())
    }

    /// Encoder frames per block; the block must be a whole number of frames.
    pub fn block_frames(&self, frame_duration_ms: f64) -> Result<usize> {
        let x = self.block_ms / frame_duration_ms;
        let n = x.round();
        if n < 1.0 || (x - n).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "block_ms {} is not a positive multiple of the {frame_duration_ms} ms frame",
                self.block_ms
            )));
        }
        Ok(n as usize)
    }
}
