use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One streaming chunk of source audio, described by its span only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechBlock {
    pub block_index: usize,
    pub feature_frames: usize,
    pub source_start_ms: f64,
    pub source_end_ms: f64,
}

impl SpeechBlock {
    pub fn new(
        block_index: usize,
        source_start_ms: f64,
        feature_frames: usize,
        input_frame_ms: f64,
    ) -> SpeechBlock {
        SpeechBlock {
            block_index,
            feature_frames,
            source_start_ms,
            source_end_ms: source_start_ms + feature_frames as f64 * input_frame_ms,
        }
    }

    pub fn duration_ms(&self) -> f64 {
        self.source_end_ms - self.source_start_ms
    }

    /// Check that `self` directly follows `prev` without a gap.
    pub fn check_follows(&self, prev: Option<&SpeechBlock>) -> Result<()> {
        let (want_index, want_start) = match prev {
            Some(p) => (p.block_index + 1, p.source_end_ms),
            None => (0, 0.0),
        };
        if self.block_index != want_index {
            return Err(Error::Stream(format!(
                "block {} arrived, expected block {want_index}",
                self.block_index
            )));
        }
        if (self.source_start_ms - want_start).abs() > 1e-6 {
            return Err(Error::Stream(format!(
                "block {} starts at {} ms, expected {want_start} ms",
                self.block_index, self.source_start_ms
            )));
        }
        if self.source_end_ms < self.source_start_ms {
            return Err(Error::Stream(format!(
                "block {} ends before it starts",
                self.block_index
            )));
        }
        Ok(())
    }
}

/// Split `total_frames` input frames into consecutive blocks of
/// `block_frames`; the last block may be shorter.
pub fn blocks_for_duration(
    total_frames: usize,
    block_frames: usize,
    input_frame_ms: f64,
) -> Vec<SpeechBlock> {
    assert!(block_frames > 0, "block_frames must be positive");
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < total_frames {
        let n = block_frames.min(total_frames - start);
        blocks.push(SpeechBlock::new(
            blocks.len(),
            start as f64 * input_frame_ms,
            n,
            input_frame_ms,
        ));
        start += n;
    }
    blocks
}

/// What caused a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    GreedyPunct,
    AlignPunct,
    Pause,
    Fixed,
    ForcedMaxLen,
}

/// A proposed sentence cut. `frame` is the last encoder frame (absolute,
/// stream-relative) that still belongs to the closing segment; `source_ms`
/// is the cut time, i.e. the end of that frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentBoundary {
    pub frame: usize,
    pub source_ms: f64,
    pub trigger: Trigger,
}

impl SegmentBoundary {
    pub fn at_frame(frame: usize, frame_duration_ms: f64, trigger: Trigger) -> SegmentBoundary {
        SegmentBoundary {
            frame,
            source_ms: (frame + 1) as f64 * frame_duration_ms,
            trigger,
        }
    }
}
