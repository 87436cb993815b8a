use std::path::Path;

use crate::decoder::{CallCounters, EncodedBlock, ModelBackend};
use crate::lattice::{io, CtcLattice, SpeechBlock, TokenId, Vocabulary};
use crate::{Error, Result};

use super::{script_to_lattice, Script};

/// Read a lattice container (or its JSON mirror) with its vocabulary.
pub fn load_lattice_file(path: &Path) -> Result<(CtcLattice, Vocabulary)> {
    io::load_lattice(path)
}

/// Frames of `lattice` covered by a block's source span.
fn frame_range(lattice: &CtcLattice, block: &SpeechBlock) -> (usize, usize) {
    let ms = lattice.frame_duration_ms();
    let from = ((block.source_start_ms / ms).round() as usize).min(lattice.frames());
    let to = ((block.source_end_ms / ms).round() as usize).clamp(from, lattice.frames());
    (from, to)
}

fn encode_from(lattice: &CtcLattice, block: &SpeechBlock) -> Result<EncodedBlock> {
    let (from, to) = frame_range(lattice, block);
    Ok(EncodedBlock {
        states: (from..to).map(|t| vec![t as f32]).collect(),
        rows: lattice.slice(from, to)?,
    })
}

/// Backend that replays a script. The encoder serves the scripted lattice;
/// the decoder puts mass β on the next scripted token whenever the segment
/// prefix matches the script from its anchor, and is uniform otherwise.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    vocab: Vocabulary,
    lattice: CtcLattice,
    tokens: Vec<TokenId>,
    decoder_sharpness: f64,
    anchor: usize,
    counters: CallCounters,
}

impl ScriptedBackend {
    pub fn new(script: &Script, vocab: Vocabulary) -> Result<ScriptedBackend> {
        let (lattice, _) = script_to_lattice(script, &vocab)?;
        Self::with_lattice(script, vocab, lattice)
    }

    /// Use an already rendered (e.g. file-loaded) lattice for the encoder.
    pub fn with_lattice(script: &Script, vocab: Vocabulary, lattice: CtcLattice) -> Result<ScriptedBackend> {
        script.validate(&vocab)?;
        lattice.check_vocabulary(&vocab)?;
        if lattice.frames() != script.frames {
            return Err(Error::validation(format!(
                "lattice has {} frames, script has {}",
                lattice.frames(),
                script.frames
            )));
        }
        Ok(ScriptedBackend {
            vocab,
            lattice,
            tokens: script.tokens(),
            decoder_sharpness: script.sharpness,
            anchor: 0,
            counters: CallCounters::default(),
        })
    }

    pub fn with_decoder_sharpness(mut self, beta: f64) -> Self {
        self.decoder_sharpness = beta;
        self
    }

    pub fn lattice(&self) -> &CtcLattice {
        &self.lattice
    }

    /// Script position where the current segment starts.
    pub fn anchor(&self) -> usize {
        self.anchor
    }
}

impl ModelBackend for ScriptedBackend {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn encode_block(&mut self, block: &SpeechBlock) -> Result<EncodedBlock> {
        self.counters.encode_calls += 1;
        encode_from(&self.lattice, block)
    }

    fn decoder_step(&mut self, prefix: &[TokenId], _states: &[Vec<f32>]) -> Result<Vec<f64>> {
        self.counters.decode_steps += 1;
        let width = self.vocab.width();
        let end = self.anchor + prefix.len();
        let matched = end <= self.tokens.len() && self.tokens[self.anchor..end] == *prefix;
        if !matched {
            return Ok(vec![-(width as f64).ln(); width]);
        }
        let next = self.tokens.get(end).copied().unwrap_or(self.vocab.blank_id());
        let beta = self.decoder_sharpness;
        let rest = ((1.0 - beta) / (width - 1) as f64).ln();
        let mut dist = vec![rest; width];
        dist[next] = beta.ln();
        Ok(dist)
    }

    fn reset_segment(&mut self, committed: &[TokenId]) {
        self.counters.resets += 1;
        self.anchor = (self.anchor + committed.len()).min(self.tokens.len());
    }

    fn counters(&self) -> CallCounters {
        self.counters
    }
}

/// Backend over a dumped lattice with no decoder model: every decoder step
/// is uniform, so hypotheses are ranked by their CTC prefix scores.
#[derive(Debug, Clone)]
pub struct LatticeBackend {
    vocab: Vocabulary,
    lattice: CtcLattice,
    counters: CallCounters,
}

impl LatticeBackend {
    pub fn new(lattice: CtcLattice, vocab: Vocabulary) -> Result<LatticeBackend> {
        lattice.check_vocabulary(&vocab)?;
        Ok(LatticeBackend {
            vocab,
            lattice,
            counters: CallCounters::default(),
        })
    }

    pub fn open(path: &Path) -> Result<LatticeBackend> {
        let (lattice, vocab) = load_lattice_file(path)?;
        Self::new(lattice, vocab)
    }

    pub fn lattice(&self) -> &CtcLattice {
        &self.lattice
    }
}

impl ModelBackend for LatticeBackend {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn encode_block(&mut self, block: &SpeechBlock) -> Result<EncodedBlock> {
        self.counters.encode_calls += 1;
        encode_from(&self.lattice, block)
    }

    fn decoder_step(&mut self, _prefix: &[TokenId], _states: &[Vec<f32>]) -> Result<Vec<f64>> {
        self.counters.decode_steps += 1;
        let width = self.vocab.width();
        Ok(vec![-(width as f64).ln(); width])
    }

    fn reset_segment(&mut self, _committed: &[TokenId]) {
        self.counters.resets += 1;
    }

    fn counters(&self) -> CallCounters {
        self.counters
    }
}
