use serde::{Deserialize, Serialize};

use crate::decoder::{CallCounters, DecodeSession, DecoderConfig, Finish, ModelBackend, SegmentRecord};
use crate::lattice::{blocks_for_duration, SegmentBoundary, Vocabulary};
use crate::segmentation::{
    align_punct_step, dac_boundaries, fixed_next_boundary, greedy_punct_step, sim_next_boundary, PauseMask,
    PolicyConfig, PolicyKind,
};
use crate::{Error, Result};

/// What happened after one block was fed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrace {
    pub block_index: usize,
    /// Frames encoded so far, this block included.
    pub horizon: usize,
    /// Boundary frames decided after this block.
    pub cuts: Vec<usize>,
    /// Tokens released after this block.
    pub emitted: usize,
}

#[derive(Debug, Clone)]
pub struct StreamRun {
    pub segments: Vec<SegmentRecord>,
    pub counters: CallCounters,
    pub trace: Vec<BlockTrace>,
}

impl StreamRun {
    pub fn boundaries(&self) -> Vec<SegmentBoundary> {
        self.segments.iter().filter_map(|s| s.boundary).collect()
    }
}

/// Per-run knobs of [`run_stream`].
#[derive(Debug, Clone, Copy)]
pub struct StreamSettings {
    pub policy: PolicyConfig,
    pub decoder: DecoderConfig,
    pub block_frames: usize,
}

/// Feed a stream block by block, applying the segmentation policy after
/// each block and before that block's tokens are released.
pub fn run_stream(
    backend: &mut dyn ModelBackend,
    vocab: &Vocabulary,
    total_frames: usize,
    frame_duration_ms: f64,
    mask: Option<&PauseMask>,
    settings: &StreamSettings,
) -> Result<StreamRun> {
    let policy = &settings.policy;
    let cfg = &settings.decoder;
    policy.validate()?;
    cfg.validate()?;
    if policy.kind.needs_mask() {
        let m = mask.ok_or_else(|| Error::Fixture(format!("policy {} needs a pause mask", policy.kind)))?;
        m.check_frames(total_frames)?;
    }
    let offline = match policy.kind {
        PolicyKind::Dac => dac_boundaries(mask.unwrap(), policy.max_len_ms, policy.min_pause_ms).boundaries,
        _ => Vec::new(),
    };
    let mut next_offline = 0;

    let mut session = DecodeSession::new(vocab.clone(), frame_duration_ms)?;
    let mut segments = Vec::new();
    let mut trace = Vec::new();
    for block in blocks_for_duration(total_frames, settings.block_frames, frame_duration_ms) {
        session.feed_block(&block, backend)?;
        let horizon = session.frame_horizon();
        let mut cuts = Vec::new();
        loop {
            if session.frames() == 0 {
                break;
            }
            let start = session.start_frame();
            let (boundary, finish) = match policy.kind {
                PolicyKind::None => break,
                PolicyKind::Greedy => match greedy_punct_step(session.lattice(), start, policy.min_len_ms, vocab) {
                    Some(b) => (b, Finish::Horizon),
                    None => break,
                },
                PolicyKind::Fixed => {
                    match fixed_next_boundary(start, horizon, frame_duration_ms, policy.max_len_ms) {
                        Some(b) => (b, Finish::Horizon),
                        None => break,
                    }
                }
                PolicyKind::Sim => match sim_next_boundary(&mask.unwrap().prefix(horizon), start, policy) {
                    Some(b) => (b, Finish::Horizon),
                    None => break,
                },
                PolicyKind::Dac => match offline.get(next_offline) {
                    Some(&b) if b.frame < horizon => {
                        next_offline += 1;
                        (b, Finish::Horizon)
                    }
                    _ => break,
                },
                PolicyKind::Align => {
                    session.expand(backend, cfg)?;
                    let y = session.stable_tokens();
                    let Some(cut) = align_punct_step(&y, session.lattice(), start, policy.min_len_ms, vocab)? else {
                        break;
                    };
                    // tokens past the punctuation are already out; wait for a later mark
                    if session.committed().len() > cut.tokens {
                        break;
                    }
                    (cut.boundary, Finish::Tokens(y[..cut.tokens].to_vec()))
                }
            };
            debug_assert!(boundary.frame >= start && boundary.frame < horizon);
            let (mut record, next) = session.cut(boundary.frame - start, finish, backend, cfg)?;
            record.boundary = Some(boundary);
            cuts.push(boundary.frame);
            segments.push(record);
            session = next;
        }
        let emitted = if session.frames() > 0 {
            session.incremental_beam_search(backend, cfg)?.len()
        } else {
            0
        };
        trace.push(BlockTrace { block_index: block.block_index, horizon, cuts, emitted });
    }
    segments.push(session.finish(backend, cfg)?);
    Ok(StreamRun { segments, counters: backend.counters(), trace })
}
