use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ctc::{collapse, greedy_labels, PrefixScorer};
use crate::lattice::{CtcLattice, SegmentBoundary, SpeechBlock, TokenId, Vocabulary};
use crate::logspace::log_sum_exp;
use crate::{Error, Result};

use super::{CtcBudgetPolicy, EmissionPolicy, ModelBackend};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub beam_width: usize,
    /// CTC weight λ in `(1 − λ)·decoder + λ·ctc`.
    pub ctc_weight: f64,
    /// Decoder candidates per hypothesis, as a multiple of the beam width.
    pub pre_beam_ratio: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam_width: 6,
            ctc_weight: 0.3,
            pre_beam_ratio: 1.5,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(Error::Config("beam width must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.ctc_weight) {
            return Err(Error::Config(format!(
                "ctc weight must lie in [0, 1], got {}",
                self.ctc_weight
            )));
        }
        if !(self.pre_beam_ratio >= 1.0) {
            return Err(Error::Config("pre-beam ratio must be >= 1".into()));
        }
        Ok(())
    }
}

const BOUND_SLACK: f64 = 1e-9;

/// `(1 − λ)·dec + λ·ctc`, with the endpoints taken literally so that a
/// zero-weighted `-inf` does not produce NaN.
pub fn joint_score(dec: f64, ctc: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        dec
    } else if lambda == 1.0 {
        ctc
    } else {
        (1.0 - lambda) * dec + lambda * ctc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    /// Decoder log-prob of each token.
    pub dec_steps: Vec<f64>,
    pub dec_logprob: f64,
    pub ctc_prefix_logprob: f64,
    pub joint_score: f64,
    scorer: PrefixScorer,
}

impl Hypothesis {
    fn root(scorer: PrefixScorer) -> Hypothesis {
        Hypothesis {
            tokens: Vec::new(),
            dec_steps: Vec::new(),
            dec_logprob: 0.0,
            ctc_prefix_logprob: 0.0,
            joint_score: 0.0,
            scorer,
        }
    }

    fn rescore(&mut self, lambda: f64) {
        self.ctc_prefix_logprob = self.scorer.logprob();
        self.joint_score = joint_score(self.dec_logprob, self.ctc_prefix_logprob, lambda);
    }
}

fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.joint_score
        .total_cmp(&a.joint_score)
        .then_with(|| a.tokens.cmp(&b.tokens))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommittedToken {
    pub token: TokenId,
    /// Source time (ms) of the latest consumed block when the token was released.
    pub delay_ms: f64,
}

/// Output of one closed segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    /// First absolute encoder frame of the segment.
    pub start_frame: usize,
    /// One past the last absolute encoder frame.
    pub end_frame: usize,
    pub tokens: Vec<CommittedToken>,
    pub boundary: Option<SegmentBoundary>,
}

/// How to close a segment at a cut.
#[derive(Debug, Clone, PartialEq)]
pub enum Finish {
    /// Decode on the truncated frames up to the emission budget and commit
    /// the best hypothesis.
    Horizon,
    /// Commit exactly these tokens (they must extend what is committed).
    Tokens(Vec<TokenId>),
}

/// Search state of the segment being decoded.
#[derive(Debug, Clone)]
pub struct DecodeSession {
    vocab: Vocabulary,
    start_frame: usize,
    lattice: CtcLattice,
    states: Vec<Vec<f32>>,
    beam: Vec<Hypothesis>,
    committed: Vec<CommittedToken>,
    last_block: Option<SpeechBlock>,
    latest_end_ms: f64,
    emission: Arc<dyn EmissionPolicy>,
}

impl DecodeSession {
    pub fn new(vocab: Vocabulary, frame_duration_ms: f64) -> Result<DecodeSession> {
        Self::with_policy(vocab, frame_duration_ms, Arc::new(CtcBudgetPolicy))
    }

    pub fn with_policy(
        vocab: Vocabulary,
        frame_duration_ms: f64,
        emission: Arc<dyn EmissionPolicy>,
    ) -> Result<DecodeSession> {
        let lattice = CtcLattice::empty(vocab.width(), frame_duration_ms)?;
        let root = PrefixScorer::root(vocab.blank_id(), vocab.width());
        Ok(DecodeSession {
            vocab,
            start_frame: 0,
            lattice,
            states: Vec::new(),
            beam: vec![Hypothesis::root(root)],
            committed: Vec::new(),
            last_block: None,
            latest_end_ms: 0.0,
            emission,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Lattice rows of this segment (since the last cut).
    pub fn lattice(&self) -> &CtcLattice {
        &self.lattice
    }

    pub fn states(&self) -> &[Vec<f32>] {
        &self.states
    }

    /// Absolute index of this segment's first frame.
    pub fn start_frame(&self) -> usize {
        self.start_frame
    }

    /// Frames in this segment.
    pub fn frames(&self) -> usize {
        self.lattice.frames()
    }

    /// Absolute frame count encoded so far.
    pub fn frame_horizon(&self) -> usize {
        self.start_frame + self.lattice.frames()
    }

    pub fn beam(&self) -> &[Hypothesis] {
        &self.beam
    }

    pub fn best(&self) -> &Hypothesis {
        &self.beam[0]
    }

    pub fn committed(&self) -> &[CommittedToken] {
        &self.committed
    }

    pub fn committed_tokens(&self) -> Vec<TokenId> {
        self.committed.iter().map(|c| c.token).collect()
    }

    pub fn latest_end_ms(&self) -> f64 {
        self.latest_end_ms
    }

    pub fn last_block(&self) -> Option<&SpeechBlock> {
        self.last_block.as_ref()
    }

    /// Encode one block and append its states and lattice rows. No tokens
    /// are released here.
    pub fn feed_block(&mut self, block: &SpeechBlock, backend: &mut dyn ModelBackend) -> Result<usize> {
        block.check_follows(self.last_block.as_ref())?;
        if block.feature_frames == 0 {
            self.last_block = Some(*block);
            return Ok(0);
        }
        let encoded = backend.encode_block(block)?;
        if encoded.states.len() != encoded.rows.frames() {
            return Err(Error::Backend(format!(
                "encoder returned {} states for {} lattice rows",
                encoded.states.len(),
                encoded.rows.frames()
            )));
        }
        encoded
            .rows
            .check_vocabulary(&self.vocab)
            .map_err(|e| Error::Backend(e.to_string()))?;
        for row in encoded.rows.rows() {
            for hyp in &mut self.beam {
                hyp.scorer.extend(row)?;
            }
        }
        self.lattice.extend(&encoded.rows)?;
        self.states.extend(encoded.states);
        self.last_block = Some(*block);
        self.latest_end_ms = block.source_end_ms;
        Ok(encoded.rows.frames())
    }

    fn rescore_beam(&mut self, lambda: f64) {
        for h in &mut self.beam {
            h.rescore(lambda);
        }
        self.beam.sort_by(rank);
    }

    /// Grow the beam up to the emission budget without releasing tokens.
    pub fn expand(&mut self, backend: &mut dyn ModelBackend, cfg: &DecoderConfig) -> Result<()> {
        let target = self
            .emission
            .target_len(&self.lattice, self.vocab.blank_id(), self.committed.len());
        self.expand_to(target, backend, cfg)
    }

    fn expand_to(&mut self, target: usize, backend: &mut dyn ModelBackend, cfg: &DecoderConfig) -> Result<()> {
        cfg.validate()?;
        self.rescore_beam(cfg.ctc_weight);
        let blank = self.vocab.blank_id();
        let width = self.vocab.width();
        let greedy = collapse(&greedy_labels(&self.lattice).labels, blank);
        let pre_beam = ((cfg.beam_width as f64) * cfg.pre_beam_ratio).ceil() as usize;
        while self.beam[0].tokens.len() < target {
            // (hyp, token, decoder step log-prob, upper bound on the joint score)
            let mut pending: Vec<(usize, TokenId, f64, f64)> = Vec::new();
            for (h, hyp) in self.beam.iter().enumerate() {
                let dist = backend.decoder_step(&hyp.tokens, &self.states)?;
                check_distribution(&dist, width)?;
                for tok in pick_candidates(&dist, blank, pre_beam, greedy.get(hyp.tokens.len()), cfg.ctc_weight) {
                    let dec = hyp.dec_logprob + dist[tok];
                    if dec == f64::NEG_INFINITY && cfg.ctc_weight < 1.0 {
                        continue;
                    }
                    let bound = joint_score(dec, hyp.ctc_prefix_logprob, cfg.ctc_weight);
                    pending.push((h, tok, dist[tok], bound));
                }
            }
            // A child's prefix mass never exceeds its parent's, so candidates
            // whose bound falls below the current k-th best can be skipped.
            pending.sort_by(|a, b| b.3.total_cmp(&a.3));
            let mut candidates: Vec<Hypothesis> = Vec::new();
            let mut kept: Vec<f64> = Vec::new();
            for (h, tok, step, bound) in pending {
                if kept.len() >= cfg.beam_width && bound + BOUND_SLACK < kept[cfg.beam_width - 1] {
                    break;
                }
                let hyp = &self.beam[h];
                let dec = hyp.dec_logprob + step;
                let scorer = hyp.scorer.child(tok, &self.lattice)?;
                let ctc = scorer.logprob();
                let joint = joint_score(dec, ctc, cfg.ctc_weight);
                if !joint.is_finite() {
                    continue;
                }
                let at = kept.partition_point(|&k| k >= joint);
                kept.insert(at, joint);
                let mut tokens = hyp.tokens.clone();
                tokens.push(tok);
                let mut dec_steps = hyp.dec_steps.clone();
                dec_steps.push(step);
                candidates.push(Hypothesis {
                    tokens,
                    dec_steps,
                    dec_logprob: dec,
                    ctc_prefix_logprob: ctc,
                    joint_score: joint,
                    scorer,
                });
            }
            if candidates.is_empty() {
                break;
            }
            candidates.sort_by(rank);
            candidates.truncate(cfg.beam_width);
            self.beam = candidates;
        }
        Ok(())
    }

    /// Release the tokens the emission policy marks stable.
    pub fn commit(&mut self) -> Vec<CommittedToken> {
        let target = self
            .emission
            .target_len(&self.lattice, self.vocab.blank_id(), self.committed.len());
        let stable = self.emission.stable_len(&self.beam, target);
        self.commit_through(stable)
    }

    fn commit_through(&mut self, len: usize) -> Vec<CommittedToken> {
        let best = &self.beam[0].tokens;
        let from = self.committed.len();
        let upto = len.min(best.len());
        let fresh: Vec<CommittedToken> = (from..upto)
            .map(|i| CommittedToken {
                token: best[i],
                delay_ms: self.latest_end_ms,
            })
            .collect();
        self.committed.extend_from_slice(&fresh);
        fresh
    }

    /// Committed tokens followed by the part of the best hypothesis that the
    /// emission policy currently considers stable.
    pub fn stable_tokens(&self) -> Vec<TokenId> {
        let target = self
            .emission
            .target_len(&self.lattice, self.vocab.blank_id(), self.committed.len());
        let best = &self.beam[0].tokens;
        let stable = self
            .emission
            .stable_len(&self.beam, target)
            .max(self.committed.len())
            .min(best.len());
        best[..stable].to_vec()
    }

    /// One decoding round for the newest block: expand, then release stable tokens.
    pub fn incremental_beam_search(
        &mut self,
        backend: &mut dyn ModelBackend,
        cfg: &DecoderConfig,
    ) -> Result<Vec<CommittedToken>> {
        if self.lattice.is_empty() {
            return Err(Error::Stream("beam search needs at least one encoded frame".into()));
        }
        self.expand(backend, cfg)?;
        Ok(self.commit())
    }

    /// Close the segment after segment-relative frame `frame` and start a
    /// fresh one holding the remaining frames. Carried frames keep their
    /// encoder states and lattice rows; they are not re-encoded.
    pub fn cut(
        mut self,
        frame: usize,
        finish: Finish,
        backend: &mut dyn ModelBackend,
        cfg: &DecoderConfig,
    ) -> Result<(SegmentRecord, DecodeSession)> {
        if frame >= self.lattice.frames() {
            return Err(Error::Bounds {
                what: "cut frame",
                index: frame,
                limit: self.lattice.frames(),
            });
        }
        let carry_rows = self.lattice.slice(frame + 1, self.lattice.frames())?;
        let carry_states = self.states.split_off(frame + 1);
        self.lattice = self.lattice.slice(0, frame + 1)?;
        self.close(finish, backend, cfg)?;
        let record = self.record();
        backend.reset_segment(&self.committed_tokens());

        let mut next = DecodeSession::with_policy(
            self.vocab.clone(),
            self.lattice.frame_duration_ms(),
            self.emission.clone(),
        )?;
        next.start_frame = record.end_frame;
        next.last_block = self.last_block;
        next.latest_end_ms = self.latest_end_ms;
        for row in carry_rows.rows() {
            next.beam[0].scorer.extend(row)?;
        }
        next.lattice = carry_rows;
        next.states = carry_states;
        Ok((record, next))
    }

    /// Close the segment at the end of the stream.
    pub fn finish(mut self, backend: &mut dyn ModelBackend, cfg: &DecoderConfig) -> Result<SegmentRecord> {
        if !self.lattice.is_empty() {
            self.close(Finish::Horizon, backend, cfg)?;
        }
        Ok(self.record())
    }

    fn record(&self) -> SegmentRecord {
        SegmentRecord {
            start_frame: self.start_frame,
            end_frame: self.frame_horizon(),
            tokens: self.committed.clone(),
            boundary: None,
        }
    }

    fn close(&mut self, finish: Finish, backend: &mut dyn ModelBackend, cfg: &DecoderConfig) -> Result<()> {
        match finish {
            Finish::Tokens(tokens) => {
                let committed = self.committed_tokens();
                if !tokens.starts_with(&committed) {
                    return Err(Error::Stream(
                        "segment tokens must extend the committed output".into(),
                    ));
                }
                let fresh = tokens[committed.len()..].iter().map(|&token| CommittedToken {
                    token,
                    delay_ms: self.latest_end_ms,
                });
                self.committed.extend(fresh.collect::<Vec<_>>());
            }
            Finish::Horizon => {
                let blank = self.vocab.blank_id();
                let target = self
                    .emission
                    .target_len(&self.lattice, blank, self.committed.len());
                // The horizon may have shrunk: re-score every hypothesis on
                // the kept frames, dropping tokens past the budget.
                let mut beam = Vec::with_capacity(self.beam.len());
                // chain[k] scores the first k tokens of the last rebuilt hypothesis
                let mut root = PrefixScorer::root(blank, self.lattice.width());
                root.extend_rows(&self.lattice)?;
                let mut chain = vec![root];
                let mut chain_tokens: Vec<TokenId> = Vec::new();
                for h in &self.beam {
                    let keep = h.tokens.len().min(target);
                    let tokens = h.tokens[..keep].to_vec();
                    if beam.iter().any(|b: &Hypothesis| b.tokens == tokens) {
                        continue;
                    }
                    let dec_steps = h.dec_steps[..keep].to_vec();
                    let shared = chain_tokens.iter().zip(&tokens).take_while(|(a, b)| a == b).count();
                    chain.truncate(shared + 1);
                    for &tok in &tokens[shared..] {
                        let next = chain[chain.len() - 1].child(tok, &self.lattice)?;
                        chain.push(next);
                    }
                    chain_tokens = tokens.clone();
                    let scorer = chain[tokens.len()].clone();
                    let mut hyp = Hypothesis {
                        dec_logprob: dec_steps.iter().sum(),
                        tokens,
                        dec_steps,
                        ctc_prefix_logprob: 0.0,
                        joint_score: 0.0,
                        scorer,
                    };
                    hyp.rescore(cfg.ctc_weight);
                    beam.push(hyp);
                }
                self.beam = beam;
                self.expand_to(target, backend, cfg)?;
                self.commit_through(target);
            }
        }
        Ok(())
    }
}

fn check_distribution(dist: &[f64], width: usize) -> Result<()> {
    if dist.len() != width {
        return Err(Error::Backend(format!(
            "decoder returned {} log-probs, expected {width}",
            dist.len()
        )));
    }
    let lse = log_sum_exp(dist);
    if !(lse.abs() <= 1e-6) {
        return Err(Error::Backend(format!(
            "decoder distribution is not normalized (logsumexp = {lse})"
        )));
    }
    Ok(())
}

/// Tokens worth scoring for one hypothesis: the decoder's top `pre_beam`
/// tokens plus the greedy CTC label at the next position. With λ = 1 the
/// decoder carries no weight, so every token is scored.
fn pick_candidates(
    dist: &[f64],
    eos: TokenId,
    pre_beam: usize,
    ctc_next: Option<&TokenId>,
    lambda: f64,
) -> Vec<TokenId> {
    let mut ids: Vec<TokenId> = (0..dist.len()).filter(|&i| i != eos).collect();
    if lambda == 1.0 {
        return ids;
    }
    ids.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    ids.truncate(pre_beam);
    if let Some(&t) = ctc_next {
        if !ids.contains(&t) {
            ids.push(t);
        }
    }
    ids
}
