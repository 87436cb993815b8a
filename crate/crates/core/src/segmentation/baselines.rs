use crate::lattice::{SegmentBoundary, Trigger};
use crate::{Error, Result};

use super::mask::{longest, PauseMask};
use super::{PolicyConfig, MS_EPS};

/// Last frame that starts before `cut_ms`.
fn frame_before(cut_ms: f64, frame_duration_ms: f64) -> usize {
    let x = cut_ms / frame_duration_ms;
    let r = x.round();
    let frames = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (frames as usize).saturating_sub(1)
}

/// Next cut at a multiple of `segment_len_ms` that falls in a segment
/// starting at `start_frame` and lies strictly inside the first `horizon`
/// frames.
pub fn fixed_next_boundary(
    start_frame: usize,
    horizon: usize,
    frame_duration_ms: f64,
    segment_len_ms: f64,
) -> Option<SegmentBoundary> {
    let start_ms = start_frame as f64 * frame_duration_ms;
    let mut k = (start_ms / segment_len_ms).floor() as u64 + 1;
    loop {
        let cut_ms = k as f64 * segment_len_ms;
        let frame = frame_before(cut_ms, frame_duration_ms);
        if frame + 1 >= horizon {
            return None;
        }
        if frame >= start_frame {
            return Some(SegmentBoundary {
                frame,
                source_ms: cut_ms,
                trigger: Trigger::Fixed,
            });
        }
        k += 1;
    }
}

/// All fixed-length cuts `k * segment_len_ms` strictly inside a stream of
/// `total_frames` frames. The remainder stays as a shorter final segment.
pub fn fixed_length_boundaries(
    total_frames: usize,
    frame_duration_ms: f64,
    segment_len_ms: f64,
) -> Result<Vec<SegmentBoundary>> {
    if !(segment_len_ms.is_finite() && segment_len_ms > 0.0) {
        return Err(Error::Config(format!("segment length must be > 0, got {segment_len_ms}")));
    }
    let mut out = Vec::new();
    let mut start = 0;
    while let Some(b) = fixed_next_boundary(start, total_frames, frame_duration_ms, segment_len_ms) {
        start = b.frame + 1;
        out.push(b);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DacOutput {
    pub boundaries: Vec<SegmentBoundary>,
    /// Over-long segments `[start, end)` that had no pause to split on.
    pub unsplit: Vec<(usize, usize)>,
}

/// Offline divide and conquer: split every segment longer than
/// `max_len_ms` at the midpoint of its longest interior pause.
pub fn dac_boundaries(mask: &PauseMask, max_len_ms: f64, min_pause_ms: f64) -> DacOutput {
    let ms = mask.frame_duration_ms();
    let mut out = DacOutput::default();
    let mut stack = vec![(0, mask.len())];
    while let Some((s, e)) = stack.pop() {
        if e <= s || (e - s) as f64 * ms <= max_len_ms + MS_EPS {
            continue;
        }
        // a pause touching the segment edge cannot split it
        let interior: Vec<_> = mask
            .pauses(s, e, min_pause_ms)
            .into_iter()
            .filter(|p| p.start > s && p.end() < e)
            .collect();
        match longest(&interior) {
            Some(p) => {
                let c = p.cut_frame();
                out.boundaries.push(SegmentBoundary::at_frame(c, ms, Trigger::Pause));
                stack.push((c + 1, e));
                stack.push((s, c + 1));
            }
            None => out.unsplit.push((s, e)),
        }
    }
    out.boundaries.sort_by_key(|b| b.frame);
    out.unsplit.sort();
    out
}

/// Streaming pause policy. `mask` holds the frames seen so far and the open
/// segment starts at `start_frame`. Once it reaches `max_len_ms`, cut at the
/// longest pause whose midpoint keeps the segment within
/// `[min_len_ms, max_len_ms]`, or force a cut at exactly `max_len_ms`.
pub fn sim_next_boundary(mask: &PauseMask, start_frame: usize, cfg: &PolicyConfig) -> Option<SegmentBoundary> {
    let ms = mask.frame_duration_ms();
    let lo = ((cfg.min_len_ms / ms) - 1e-9).ceil().max(1.0) as usize;
    let hi = ((cfg.max_len_ms / ms) + 1e-9).floor().max(1.0) as usize;
    if mask.len() < start_frame + hi {
        return None;
    }
    let window = mask.pauses(start_frame + lo, start_frame + hi, cfg.min_pause_ms);
    Some(match longest(&window) {
        Some(p) => SegmentBoundary::at_frame(p.cut_frame(), ms, Trigger::Pause),
        None => SegmentBoundary::at_frame(start_frame + hi - 1, ms, Trigger::ForcedMaxLen),
    })
}

/// Replay [`sim_next_boundary`] over a complete mask, revealing it
/// `block_frames` at a time.
pub fn sim_boundaries(mask: &PauseMask, cfg: &PolicyConfig, block_frames: usize) -> Vec<SegmentBoundary> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut horizon = 0;
    while horizon < mask.len() {
        horizon = (horizon + block_frames.max(1)).min(mask.len());
        let seen = mask.prefix(horizon);
        while let Some(b) = sim_next_boundary(&seen, start, cfg) {
            start = b.frame + 1;
            out.push(b);
        }
    }
    out
}
