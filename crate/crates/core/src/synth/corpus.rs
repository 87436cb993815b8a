use serde::{Deserialize, Serialize};

use crate::lattice::{make_vocabulary, Vocabulary, DEFAULT_FRAME_MS};
use crate::{Error, Result};

use super::{mask_from_script, script_to_lattice, GroundTruth, Script, SplitRng};

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub streams: usize,
    pub sentences_min: usize,
    pub sentences_max: usize,
    pub sentence_ms_min: f64,
    pub sentence_ms_max: f64,
    /// Vocabulary size without blank; the last three tokens are ". ! ?".
    pub vocab_size: usize,
    pub frame_duration_ms: f64,
    pub sharpness: f64,
    pub seed: u64,
    /// Blank frames between sentences (and before the first / after the last).
    pub gap_frames: [usize; 2],
    pub word_frames: [usize; 2],
    /// Probability that a sentence also contains an internal pause.
    pub mid_pause_prob: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            streams: 20,
            sentences_min: 5,
            sentences_max: 12,
            sentence_ms_min: 2000.0,
            sentence_ms_max: 12000.0,
            vocab_size: 64,
            frame_duration_ms: DEFAULT_FRAME_MS,
            sharpness: 1.0,
            seed: 1,
            gap_frames: [5, 20],
            word_frames: [3, 8],
            mid_pause_prob: 0.0,
        }
    }
}

/// One generated stream with everything derived from its script.
#[derive(Debug, Clone)]
pub struct StreamFixture {
    pub id: String,
    pub script: Script,
    pub lattice: crate::CtcLattice,
    pub truth: GroundTruth,
    pub mask: Vec<bool>,
}

/// `vocab_size − 3` word tokens `▁w00…` followed by `.`, `!`, `?`.
pub fn synthetic_vocabulary(vocab_size: usize) -> Result<Vocabulary> {
    if vocab_size < 5 {
        return Err(Error::validation("synthetic vocabulary needs at least 5 tokens"));
    }
    let words = vocab_size - 3;
    let digits = (words - 1).to_string().len().max(2);
    let mut surfaces: Vec<String> = (0..words)
        .map(|i| format!("\u{2581}w{i:0digits$}"))
        .collect();
    surfaces.extend([".", "!", "?"].map(String::from));
    make_vocabulary(&surfaces, "<blank>")
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation(m.to_string()));
        if self.streams == 0 {
            return bad("corpus needs at least one stream");
        }
        if self.sentences_min == 0 || self.sentences_min > self.sentences_max {
            return bad("sentence count range must be non-empty and start at 1 or more");
        }
        if !(self.sentence_ms_min > 0.0 && self.sentence_ms_min <= self.sentence_ms_max) {
            return bad("sentence duration range is invalid");
        }
        if self.gap_frames[0] == 0 || self.gap_frames[0] > self.gap_frames[1] {
            return bad("gap frame range must be non-empty and positive");
        }
        if self.word_frames[0] == 0 || self.word_frames[0] > self.word_frames[1] {
            return bad("word frame range must be non-empty and positive");
        }
        if !(0.0..=1.0).contains(&self.mid_pause_prob) {
            return bad("mid-sentence pause probability must lie in [0, 1]");
        }
        if !(self.frame_duration_ms > 0.0) {
            return bad("frame duration must be positive");
        }
        Ok(())
    }

    pub fn vocabulary(&self) -> Result<Vocabulary> {
        synthetic_vocabulary(self.vocab_size)
    }

    /// Script of stream `index`; a pure function of the config.
    pub fn script(&self, index: usize, vocab: &Vocabulary) -> Result<Script> {
        self.validate()?;
        let mut rng = SplitRng::new(SplitRng::derive(self.seed, index as u64));
        let words = vocab.num_tokens() - 3;
        let puncts: Vec<usize> = vocab.punct_ids().iter().copied().collect();
        let [gap_lo, gap_hi] = self.gap_frames;
        let [word_lo, word_hi] = self.word_frames;
        let ms = self.frame_duration_ms;
        let min_frames = (self.sentence_ms_min / ms).ceil() as usize;
        let max_frames = ((self.sentence_ms_max / ms).floor() as usize).max(min_frames);

        let count = rng.range(self.sentences_min, self.sentences_max);
        let mut sentences = Vec::with_capacity(count);
        let mut spans = Vec::with_capacity(count);
        let mut t = rng.range(gap_lo, gap_hi);
        let mut prev_word = usize::MAX;
        for _ in 0..count {
            let target = rng.range(min_frames, max_frames);
            let start = t;
            let mut toks = Vec::new();
            let mut sp = Vec::new();
            // punctuation takes one frame at the end
            while toks.is_empty() || t - start + 1 < target {
                let mut w = rng.range(0, words - 1);
                if w == prev_word {
                    w = (w + 1) % words;
                }
                let len = rng.range(word_lo, word_hi);
                toks.push(w);
                sp.push([t, t + len]);
                t += len;
                prev_word = w;
            }
            if self.mid_pause_prob > 0.0 && toks.len() >= 2 && rng.chance(self.mid_pause_prob) {
                let after = rng.range(0, toks.len() - 2);
                let pause = rng.range(gap_lo, gap_hi);
                for s in &mut sp[after + 1..] {
                    s[0] += pause;
                    s[1] += pause;
                }
                t += pause;
            }
            toks.push(puncts[rng.range(0, puncts.len() - 1)]);
            sp.push([t, t + 1]);
            t += 1;
            prev_word = usize::MAX;
            sentences.push(toks);
            spans.push(sp);
            t += rng.range(gap_lo, gap_hi);
        }
        Ok(Script {
            sentences,
            spans,
            sharpness: self.sharpness,
            seed: rng.next_u64(),
            frames: t,
            frame_duration_ms: ms,
        })
    }

    pub fn stream(&self, index: usize, vocab: &Vocabulary) -> Result<StreamFixture> {
        let script = self.script(index, vocab)?;
        let (lattice, truth) = script_to_lattice(&script, vocab)?;
        let mask = mask_from_script(&script);
        Ok(StreamFixture {
            id: format!("s{index:03}"),
            script,
            lattice,
            truth,
            mask,
        })
    }

    pub fn generate(&self) -> Result<(Vocabulary, Vec<StreamFixture>)> {
        use rayon::prelude::*;
        self.validate()?;
        let vocab = self.vocabulary()?;
        let streams = (0..self.streams)
            .into_par_iter()
            .map(|i| self.stream(i, &vocab))
            .collect::<Result<Vec<_>>>()?;
        Ok((vocab, streams))
    }
}
