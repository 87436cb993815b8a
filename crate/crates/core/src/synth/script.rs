use serde::{Deserialize, Serialize};

use crate::lattice::{CtcLattice, TokenId, Vocabulary};
use crate::{Error, Result};

use super::SplitRng;

/// A scripted stream: sentences of token ids and the frame span of every
/// token. Frames outside all spans are blank-dominated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub sentences: Vec<Vec<TokenId>>,
    /// `[start, end)` encoder frames per token, nested like `sentences`.
    pub spans: Vec<Vec<[usize; 2]>>,
    /// Probability mass β on the scripted label of each frame.
    pub sharpness: f64,
    /// Seed for the residual-mass noise.
    pub seed: u64,
    /// Total stream length in frames (trailing silence included).
    pub frames: usize,
    pub frame_duration_ms: f64,
}

/// What a perfect segmenter and translator would produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Last frame of each sentence-final punctuation span.
    pub boundary_frames: Vec<usize>,
    pub reference_text: Vec<String>,
}

impl Script {
    pub fn tokens(&self) -> Vec<TokenId> {
        self.sentences.iter().flatten().copied().collect()
    }

    pub fn flat_spans(&self) -> Vec<[usize; 2]> {
        self.spans.iter().flatten().copied().collect()
    }

    pub fn duration_ms(&self) -> f64 {
        self.frames as f64 * self.frame_duration_ms
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        if self.sentences.is_empty() {
            return Err(Error::validation("script has no sentences"));
        }
        if self.sentences.len() != self.spans.len() {
            return Err(Error::validation("sentences and spans differ in length"));
        }
        if !(self.frame_duration_ms.is_finite() && self.frame_duration_ms > 0.0) {
            return Err(Error::validation("frame duration must be positive"));
        }
        let width = vocab.width() as f64;
        if !(self.sharpness > 1.0 / width && self.sharpness <= 1.0) {
            return Err(Error::validation(format!(
                "sharpness {} outside (1/{width}, 1]",
                self.sharpness
            )));
        }
        let mut prev: Option<(TokenId, [usize; 2])> = None;
        for (i, (sent, spans)) in self.sentences.iter().zip(&self.spans).enumerate() {
            if sent.is_empty() || sent.len() != spans.len() {
                return Err(Error::validation(format!(
                    "sentence {i} is empty or has mismatched spans"
                )));
            }
            if !vocab.is_punct(*sent.last().expect("non-empty")) {
                return Err(Error::validation(format!(
                    "sentence {i} does not end with sentence punctuation"
                )));
            }
            for (&tok, &span) in sent.iter().zip(spans) {
                if tok >= vocab.num_tokens() {
                    return Err(Error::validation(format!("token {tok} is not a vocabulary token")));
                }
                if span[0] >= span[1] {
                    return Err(Error::validation(format!("empty span {span:?}")));
                }
                if let Some((ptok, pspan)) = prev {
                    if span[0] < pspan[1] {
                        return Err(Error::validation(format!(
                            "span {span:?} overlaps or precedes {pspan:?}"
                        )));
                    }
                    if ptok == tok && span[0] == pspan[1] {
                        return Err(Error::validation(format!(
                            "repeated token {tok} at frame {} needs a blank gap",
                            span[0]
                        )));
                    }
                }
                prev = Some((tok, span));
            }
        }
        if let Some((_, last)) = prev {
            if last[1] > self.frames {
                return Err(Error::validation("spans run past the stream end"));
            }
        }
        Ok(())
    }

    /// Scripted label of every frame (blank outside spans).
    pub fn frame_labels(&self, blank: TokenId) -> Vec<TokenId> {
        let mut labels = vec![blank; self.frames];
        for (sent, spans) in self.sentences.iter().zip(&self.spans) {
            for (&tok, span) in sent.iter().zip(spans) {
                labels[span[0]..span[1]].fill(tok);
            }
        }
        labels
    }

    pub fn ground_truth(&self, vocab: &Vocabulary) -> GroundTruth {
        GroundTruth {
            boundary_frames: self
                .spans
                .iter()
                .map(|s| s.last().expect("validated")[1] - 1)
                .collect(),
            reference_text: self.sentences.iter().map(|s| vocab.detokenize(s)).collect(),
        }
    }
}

/// Render a script into a lattice. Each row puts mass β on the scripted
/// label (blank outside spans) and spreads `1 − β` over the other columns
/// with seeded random weights. Values are rounded to `f32` so the lattice
/// survives the binary container unchanged.
pub fn script_to_lattice(script: &Script, vocab: &Vocabulary) -> Result<(CtcLattice, GroundTruth)> {
    script.validate(vocab)?;
    let width = vocab.width();
    let labels = script.frame_labels(vocab.blank_id());
    let beta = script.sharpness;
    let mut rng = SplitRng::new(script.seed);
    let mut data = Vec::with_capacity(script.frames * width);
    let mut weights = vec![0.0; width];
    for &label in &labels {
        let mut total = 0.0;
        for (c, w) in weights.iter_mut().enumerate() {
            *w = if c == label { 0.0 } else { rng.open_unit() };
            total += *w;
        }
        for (c, &w) in weights.iter().enumerate() {
            let p = if c == label { beta } else { (1.0 - beta) * w / total };
            data.push(round_f32(p.ln()));
        }
    }
    let lattice = CtcLattice::from_flat(width, script.frame_duration_ms, data)?;
    Ok((lattice, script.ground_truth(vocab)))
}

fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

/// Speech/non-speech per frame: speech inside any token span.
pub fn mask_from_script(script: &Script) -> Vec<bool> {
    let mut speech = vec![false; script.frames];
    for span in script.spans.iter().flatten() {
        speech[span[0]..span[1]].fill(true);
    }
    speech
}
