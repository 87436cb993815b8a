use std::fmt::Write as _;
use std::path::Path;

use crate::lattice::io::{decode_mask_sidecar, encode_mask_sidecar};
use crate::{Error, Result};

pub const DEFAULT_MIN_PAUSE_MS: f64 = 200.0;

/// Per-frame speech activity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauseMask {
    speech: Vec<bool>,
    frame_duration_ms: f64,
}

/// A run of non-speech frames `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pause {
    pub start: usize,
    pub len: usize,
}

impl Pause {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    /// Last frame before the pause midpoint; a cut here splits the silence
    /// evenly (the extra frame of an odd run goes right).
    pub fn cut_frame(&self) -> usize {
        self.start + (self.len / 2).max(1) - 1
    }

    pub fn duration_ms(&self, frame_duration_ms: f64) -> f64 {
        self.len as f64 * frame_duration_ms
    }
}

impl PauseMask {
    pub fn new(speech: Vec<bool>, frame_duration_ms: f64) -> Result<PauseMask> {
        if !(frame_duration_ms.is_finite() && frame_duration_ms > 0.0) {
            return Err(Error::Validation(format!(
                "mask frame duration must be positive, got {frame_duration_ms}"
            )));
        }
        Ok(PauseMask { speech, frame_duration_ms })
    }

    pub fn from_sidecar(bytes: &[u8], frame_duration_ms: f64) -> Result<PauseMask> {
        PauseMask::new(decode_mask_sidecar(bytes)?, frame_duration_ms)
    }

    pub fn to_sidecar(&self) -> Vec<u8> {
        encode_mask_sidecar(&self.speech)
    }

    /// Parse `start_ms<TAB>end_ms<TAB>speech|nonspeech` lines. Intervals must
    /// start at 0 and tile the stream without gaps. Blank lines and `#`
    /// comments are skipped.
    pub fn from_tsv(text: &str, frame_duration_ms: f64) -> Result<PauseMask> {
        let mut speech = Vec::new();
        let mut prev_end = 0.0_f64;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Fixture(format!("mask line {}: {what}: {line:?}", n + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            let [start, end, label] = cols[..] else {
                return Err(bad("expected three tab-separated columns"));
            };
            let start: f64 = start.trim().parse().map_err(|_| bad("bad start_ms"))?;
            let end: f64 = end.trim().parse().map_err(|_| bad("bad end_ms"))?;
            let is_speech = match label.trim() {
                "speech" => true,
                "nonspeech" => false,
                _ => return Err(bad("label must be speech or nonspeech")),
            };
            if (start - prev_end).abs() > 1e-6 {
                return Err(bad("interval does not start where the previous one ended"));
            }
            if !(end > start) {
                return Err(bad("empty or reversed interval"));
            }
            let from = (start / frame_duration_ms).round() as usize;
            let to = (end / frame_duration_ms).round() as usize;
            speech.resize(to.max(from), is_speech);
            prev_end = end;
        }
        PauseMask::new(speech, frame_duration_ms)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut t = 0;
        while t < self.speech.len() {
            let label = self.speech[t];
            let run = self.speech[t..].iter().take_while(|&&s| s == label).count();
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                t as f64 * self.frame_duration_ms,
                (t + run) as f64 * self.frame_duration_ms,
                if label { "speech" } else { "nonspeech" }
            );
            t += run;
        }
        out
    }

    /// Read a mask file: `.tsv` is the interval format, anything else the
    /// byte sidecar.
    pub fn load(path: &Path, frame_duration_ms: f64) -> Result<PauseMask> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Fixture(format!("cannot read mask {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "tsv") {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Fixture(format!("mask {} is not UTF-8", path.display())))?;
            PauseMask::from_tsv(&text, frame_duration_ms)
        } else {
            PauseMask::from_sidecar(&bytes, frame_duration_ms)
        }
    }

    pub fn len(&self) -> usize {
        self.speech.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speech.is_empty()
    }

    pub fn frame_duration_ms(&self) -> f64 {
        self.frame_duration_ms
    }

    pub fn duration_ms(&self) -> f64 {
        self.speech.len() as f64 * self.frame_duration_ms
    }

    pub fn speech(&self) -> &[bool] {
        &self.speech
    }

    pub fn is_speech(&self, frame: usize) -> bool {
        self.speech[frame]
    }

    /// The first `frames` frames (what a streaming policy has seen).
    pub fn prefix(&self, frames: usize) -> PauseMask {
        PauseMask {
            speech: self.speech[..frames.min(self.speech.len())].to_vec(),
            frame_duration_ms: self.frame_duration_ms,
        }
    }

    pub fn check_frames(&self, frames: usize) -> Result<()> {
        if self.speech.len() != frames {
            return Err(Error::Fixture(format!(
                "mask covers {} frames but the stream has {frames}",
                self.speech.len()
            )));
        }
        Ok(())
    }

    /// Maximal non-speech runs inside `from..to`, clipped to that window.
    pub fn runs(&self, from: usize, to: usize) -> Vec<Pause> {
        let to = to.min(self.speech.len());
        let mut out = Vec::new();
        let mut t = from;
        while t < to {
            if self.speech[t] {
                t += 1;
                continue;
            }
            let len = self.speech[t..to].iter().take_while(|&&s| !s).count();
            out.push(Pause { start: t, len });
            t += len;
        }
        out
    }

    /// Runs in `from..to` lasting at least `min_pause_ms`.
    pub fn pauses(&self, from: usize, to: usize, min_pause_ms: f64) -> Vec<Pause> {
        self.runs(from, to)
            .into_iter()
            .filter(|p| p.duration_ms(self.frame_duration_ms) + super::MS_EPS >= min_pause_ms)
            .collect()
    }
}

/// Longest pause, ties to the earliest.
pub(crate) fn longest(pauses: &[Pause]) -> Option<Pause> {
    let mut best: Option<Pause> = None;
    for &p in pauses {
        if best.is_none_or(|b| p.len > b.len) {
            best = Some(p);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(bits: &str) -> PauseMask {
        PauseMask::new(bits.chars().map(|c| c == '1').collect(), 40.0).unwrap()
    }

    #[test]
    fn runs_are_maximal_and_clipped() {
        let m = mask("0011000111100");
        assert_eq!(
            m.runs(0, m.len()),
            vec![Pause { start: 0, len: 2 }, Pause { start: 4, len: 3 }, Pause { start: 11, len: 2 }]
        );
        assert_eq!(m.runs(5, 12), vec![Pause { start: 5, len: 2 }, Pause { start: 11, len: 1 }]);
        assert_eq!(m.pauses(0, m.len(), 120.0), vec![Pause { start: 4, len: 3 }]);
    }

    #[test]
    fn cut_frame_splits_silence() {
        assert_eq!(Pause { start: 10, len: 6 }.cut_frame(), 12);
        assert_eq!(Pause { start: 10, len: 5 }.cut_frame(), 11);
        assert_eq!(Pause { start: 10, len: 1 }.cut_frame(), 10);
    }

    #[test]
    fn tsv_round_trip() {
        let m = mask("1110000011");
        let text = m.to_tsv();
        assert_eq!(text, "0\t120\tspeech\n120\t320\tnonspeech\n320\t400\tspeech\n");
        assert_eq!(PauseMask::from_tsv(&text, 40.0).unwrap(), m);
    }

    #[test]
    fn tsv_rejects_gaps_and_bad_labels() {
        for text in [
            "0\t100\tspeech\n120\t200\tnonspeech\n",
            "40\t100\tspeech\n",
            "0\t100\tvoice\n",
            "0\t100\n",
            "0\t0\tspeech\n",
        ] {
            assert!(matches!(PauseMask::from_tsv(text, 20.0), Err(Error::Fixture(_))), "{text:?}");
        }
    }

    #[test]
    fn sidecar_and_file_loading() {
        let m = mask("0110");
        assert_eq!(PauseMask::from_sidecar(&m.to_sidecar(), 40.0).unwrap(), m);
        let dir = tempfile::tempdir().unwrap();
        let tsv = dir.path().join("m.tsv");
        std::fs::write(&tsv, m.to_tsv()).unwrap();
        assert_eq!(PauseMask::load(&tsv, 40.0).unwrap(), m);
        let side = dir.path().join("m.mask");
        std::fs::write(&side, m.to_sidecar()).unwrap();
        assert_eq!(PauseMask::load(&side, 40.0).unwrap(), m);
        assert!(m.check_frames(5).is_err());
        assert!(PauseMask::load(&dir.path().join("missing.tsv"), 40.0).is_err());
    }

    #[test]
    fn longest_prefers_earliest() {
        let ps = [Pause { start: 1, len: 3 }, Pause { start: 9, len: 3 }, Pause { start: 20, len: 2 }];
        assert_eq!(longest(&ps), Some(ps[0]));
        assert_eq!(longest(&[]), None);
    }
}
