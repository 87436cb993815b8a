use crate::ctc::{best_prefix_frame, greedy_labels};
use crate::lattice::{CtcLattice, SegmentBoundary, TokenId, Trigger, Vocabulary};
use crate::{Error, Result};

use super::MS_EPS;

/// A segment ending at segment-relative `frame` is long enough.
pub fn meets_min_len(frame: usize, frame_duration_ms: f64, min_len_ms: f64) -> bool {
    (frame + 1) as f64 * frame_duration_ms + MS_EPS >= min_len_ms
}

/// Latest frame of the open segment whose greedy label is sentence
/// punctuation. `lattice` holds the frames since the last boundary, the
/// first of which is absolute frame `start_frame`.
pub fn greedy_punct_step(
    lattice: &CtcLattice,
    start_frame: usize,
    min_len_ms: f64,
    vocab: &Vocabulary,
) -> Option<SegmentBoundary> {
    let labels = greedy_labels(lattice).labels;
    let t = labels.iter().rposition(|&l| vocab.is_punct(l))?;
    let ms = lattice.frame_duration_ms();
    meets_min_len(t, ms, min_len_ms).then(|| SegmentBoundary::at_frame(start_frame + t, ms, Trigger::GreedyPunct))
}

/// Cut found by the align policy. The first `tokens` tokens of the
/// hypothesis (through the punctuation mark) close the segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignCut {
    pub boundary: SegmentBoundary,
    pub tokens: usize,
}

/// Locate the last punctuation token of `hyp` in the open segment's
/// lattice. Returns `None` when there is no punctuation, the prefix cannot
/// be aligned, or the cut would be shorter than `min_len_ms`.
pub fn align_punct_step(
    hyp: &[TokenId],
    lattice: &CtcLattice,
    start_frame: usize,
    min_len_ms: f64,
    vocab: &Vocabulary,
) -> Result<Option<AlignCut>> {
    let Some(l) = hyp.iter().rposition(|&tok| vocab.is_punct(tok)) else {
        return Ok(None);
    };
    if lattice.is_empty() {
        return Ok(None);
    }
    let b = match best_prefix_frame(lattice, &hyp[..=l], 0, vocab.blank_id()) {
        Ok(b) => b,
        Err(Error::AlignmentNotFound) => return Ok(None),
        Err(e) => return Err(e),
    };
    let ms = lattice.frame_duration_ms();
    if !meets_min_len(b, ms, min_len_ms) {
        return Ok(None);
    }
    Ok(Some(AlignCut {
        boundary: SegmentBoundary::at_frame(start_frame + b, ms, Trigger::AlignPunct),
        tokens: l + 1,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctc::oracle;
    use crate::lattice::make_vocabulary;
    use crate::synth::{script_to_lattice, Script};

    fn vocab() -> Vocabulary {
        make_vocabulary(&["\u{2581}a", "\u{2581}b", ".", "?"], "<blank>").unwrap()
    }

    /// The first `frames` frames of a two-sentence stream.
    fn lattice(beta: f64, frames: usize) -> (CtcLattice, Vec<usize>) {
        let (lat, truth) = script_to_lattice(&script(beta), &vocab()).unwrap();
        (lat.slice(0, frames).unwrap(), truth.boundary_frames)
    }

    fn script(beta: f64) -> Script {
        Script {
            sentences: vec![vec![0, 1, 2], vec![1, 0, 3]],
            spans: vec![vec![[3, 10], [10, 18], [18, 19]], vec![[45, 50], [50, 56], [56, 57]]],
            sharpness: beta,
            seed: 9,
            frames: 60,
            frame_duration_ms: 40.0,
        }
    }

    #[test]
    fn greedy_finds_last_punctuation() {
        let (lat, truth) = lattice(1.0, 40);
        let b = greedy_punct_step(&lat, 0, 400.0, &vocab()).unwrap();
        assert_eq!(b.frame, 18);
        assert_eq!(truth[0], 18);
        assert_eq!(b.source_ms, 19.0 * 40.0);
        // offset into the stream is applied
        assert_eq!(greedy_punct_step(&lat, 100, 400.0, &vocab()).unwrap().frame, 118);
    }

    #[test]
    fn greedy_takes_the_later_of_two() {
        let (lat, _) = lattice(1.0, 60);
        assert_eq!(greedy_punct_step(&lat, 0, 400.0, &vocab()).unwrap().frame, 56);
    }

    #[test]
    fn greedy_min_len_gate() {
        let (lat, _) = lattice(1.0, 40);
        assert!(greedy_punct_step(&lat, 0, 19.0 * 40.0, &vocab()).is_some());
        assert!(greedy_punct_step(&lat, 0, 19.0 * 40.0 + 1.0, &vocab()).is_none());
        let (early, _) = lattice(1.0, 18);
        assert!(greedy_punct_step(&early, 0, 400.0, &vocab()).is_none());
    }

    #[test]
    fn align_locates_sentence_end() {
        for beta in [1.0, 0.8] {
            let (lat, truth) = lattice(beta, 44);
            let cut = align_punct_step(&[0, 1, 2, 1], &lat, 0, 400.0, &vocab()).unwrap().unwrap();
            assert_eq!(cut.tokens, 3);
            assert!(cut.boundary.frame.abs_diff(truth[0]) <= 2, "beta={beta} {cut:?} {truth:?}");
            assert_eq!(cut.boundary.trigger, Trigger::AlignPunct);
        }
    }

    #[test]
    fn align_agrees_with_exhaustive_scan() {
        // a short lattice so path enumeration stays small
        let s = Script {
            sentences: vec![vec![0, 2]],
            spans: vec![vec![[0, 2], [3, 4]]],
            sharpness: 0.7,
            seed: 4,
            frames: 6,
            frame_duration_ms: 40.0,
        };
        let (lat, _) = script_to_lattice(&s, &vocab()).unwrap();
        let blank = vocab().blank_id();
        let scores: Vec<f64> = (0..lat.frames()).map(|t| oracle::completion(&lat, &[0, 2], blank, t)).collect();
        let expect = (0..scores.len()).fold(0, |b, t| if scores[t] > scores[b] { t } else { b });
        let cut = align_punct_step(&[0, 2], &lat, 0, 40.0, &vocab()).unwrap().unwrap();
        assert_eq!(cut.boundary.frame, expect);
    }

    #[test]
    fn align_without_punctuation_or_below_min_len() {
        let (lat, _) = lattice(1.0, 44);
        assert_eq!(align_punct_step(&[0, 1], &lat, 0, 400.0, &vocab()).unwrap(), None);
        assert_eq!(align_punct_step(&[0, 1, 2], &lat, 0, 1000.0, &vocab()).unwrap(), None);
    }

    #[test]
    fn align_defers_when_prefix_impossible() {
        // one-hot lattice: "?" never appears in the first 40 frames
        let (lat, _) = lattice(1.0, 40);
        assert_eq!(align_punct_step(&[0, 1, 3], &lat, 0, 400.0, &vocab()).unwrap(), None);
    }
}
