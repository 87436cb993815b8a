use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decoder::CallCounters;
use crate::eval::{boundary_prf, corpus_bleu, evaluate_stream, timed_words, CorpusEval, Prf, StreamEval, Tokenizer};
use crate::lattice::{SegmentBoundary, TokenId, Trigger, Vocabulary};
use crate::{Error, Result};

use super::config::RunConfig;
use super::fixtures::FixtureSet;
use super::runner::{BlockTrace, StreamRun};

/// Round to a fixed number of decimals so reports print identically.
pub(crate) fn fixed(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    let r = (v * p).round() / p;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

const MS_DECIMALS: i32 = 3;
const SCORE_DECIMALS: i32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub token: TokenId,
    pub surface: String,
    pub delay_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub start_frame: usize,
    pub end_frame: usize,
    pub start_ms: f64,
    pub end_ms: f64,
    pub text: String,
    pub tokens: Vec<TokenRecord>,
    pub boundary: Option<SegmentBoundary>,
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub id: String,
    pub frames: usize,
    pub duration_ms: f64,
    pub segments: Vec<SegmentReport>,
    pub counters: CallCounters,
    pub trace: Vec<BlockTrace>,
}

impl StreamRecord {
    pub fn from_run(id: &str, frames: usize, frame_duration_ms: f64, run: &StreamRun, vocab: &Vocabulary) -> Self {
        let segments = run
            .segments
            .iter()
            .map(|s| {
                let ids: Vec<TokenId> = s.tokens.iter().map(|c| c.token).collect();
                SegmentReport {
                    start_frame: s.start_frame,
                    end_frame: s.end_frame,
                    start_ms: fixed(s.start_frame as f64 * frame_duration_ms, MS_DECIMALS),
                    end_ms: fixed(s.end_frame as f64 * frame_duration_ms, MS_DECIMALS),
                    text: vocab.detokenize(&ids),
                    tokens: s
                        .tokens
                        .iter()
                        .map(|c| TokenRecord {
                            token: c.token,
                            surface: vocab.surface(c.token).unwrap_or_default().to_string(),
                            delay_ms: fixed(c.delay_ms, MS_DECIMALS),
                        })
                        .collect(),
                    boundary: s.boundary.map(|b| SegmentBoundary {
                        source_ms: fixed(b.source_ms, MS_DECIMALS),
                        ..b
                    }),
                }
            })
            .collect();
        StreamRecord {
            id: id.to_string(),
            frames,
            duration_ms: fixed(frames as f64 * frame_duration_ms, MS_DECIMALS),
            segments,
            counters: run.counters,
            trace: run.trace.clone(),
        }
    }

    pub fn committed(&self) -> Vec<crate::decoder::CommittedToken> {
        self.segments
            .iter()
            .flat_map(|s| s.tokens.iter())
            .map(|t| crate::decoder::CommittedToken { token: t.token, delay_ms: t.delay_ms })
            .collect()
    }

    pub fn boundary_frames(&self) -> Vec<usize> {
        self.segments.iter().filter_map(|s| s.boundary.map(|b| b.frame)).collect()
    }

    pub fn forced_cuts(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.boundary.is_some_and(|b| b.trigger == Trigger::ForcedMaxLen))
            .count()
    }
}

pub fn write_records(records: &[StreamRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_records(text: &str) -> Result<Vec<StreamRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Evaluation(format!("record line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMetrics {
    pub id: String,
    pub bleu: f64,
    pub laal_ms: Option<f64>,
    /// Set when no sentence of the stream received output.
    pub laal_error: Option<String>,
    pub boundary_exact: Prf,
    pub boundary_tolerant: Prf,
    pub segments: usize,
    pub forced_cuts: usize,
    pub counters: CallCounters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetrics {
    pub bleu: f64,
    pub bleu_detail: crate::eval::BleuScore,
    pub laal_ms: Option<f64>,
    pub sentences: usize,
    pub sentences_without_output: usize,
    pub mwer_distance: usize,
    pub boundary_tolerance_frames: usize,
    pub boundary_exact: Prf,
    pub boundary_tolerant: Prf,
    pub segments: usize,
    pub mean_segment_ms: f64,
    pub segments_per_minute: f64,
    pub forced_cuts: usize,
    pub forced_cuts_per_minute: f64,
    pub duration_ms: f64,
    pub counters: CallCounters,
}

/// The metrics document written by `evaluate` and embedded in `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub streams: Vec<StreamMetrics>,
    pub corpus: CorpusMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub fixtures_sha256: String,
    /// Fixture file hashes per stream.
    pub fixture_files: BTreeMap<String, BTreeMap<String, String>>,
    pub metrics: Metrics,
}

fn round_prf(p: Prf) -> Prf {
    Prf {
        precision: fixed(p.precision, SCORE_DECIMALS),
        recall: fixed(p.recall, SCORE_DECIMALS),
        f1: fixed(p.f1, SCORE_DECIMALS),
        ..p
    }
}

/// Score simulation records against the fixtures' references and ground truth.
pub fn evaluate_records(
    records: &[StreamRecord],
    fixtures: &FixtureSet,
    tokenizer: Tokenizer,
    tolerance: usize,
) -> Result<Metrics> {
    let by_id: BTreeMap<&str, &StreamRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    if by_id.len() != records.len() {
        return Err(Error::Evaluation("duplicate stream ids in records".into()));
    }
    for r in records {
        if !fixtures.streams.iter().any(|s| s.id == r.id) {
            return Err(Error::Evaluation(format!("record {} has no fixture stream", r.id)));
        }
    }
    let mut stream_evals: Vec<StreamEval> = Vec::new();
    let mut streams = Vec::new();
    let (mut exact, mut tolerant) = (Prf::from_counts(0, 0, 0), Prf::from_counts(0, 0, 0));
    let (mut counters, mut segments, mut forced, mut duration) = (CallCounters::default(), 0, 0, 0.0);
    for fx in &fixtures.streams {
        let rec = by_id
            .get(fx.id.as_str())
            .ok_or_else(|| Error::Evaluation(format!("no record for stream {}", fx.id)))?;
        if rec.frames != fx.lattice.frames() {
            return Err(Error::Evaluation(format!("record {} covers {} frames, fixture {}", fx.id, rec.frames, fx.lattice.frames())));
        }
        let words = timed_words(&rec.committed(), &fixtures.vocab);
        let ev = evaluate_stream(&words, &fx.ref_segments(), tokenizer)?;
        let bleu = corpus_bleu(&ev.hyp_segments, &ev.ref_segments, tokenizer)?.score;
        let lags: Vec<f64> = ev.laal_ms.iter().flatten().copied().collect();
        let (laal_ms, laal_error) = if lags.is_empty() {
            (None, Some("no sentence received output; LAAL is undefined".to_string()))
        } else {
            (Some(fixed(lags.iter().sum::<f64>() / lags.len() as f64, MS_DECIMALS)), None)
        };
        let predicted = rec.boundary_frames();
        let e = boundary_prf(&predicted, &fx.truth.boundary_frames, 0);
        let t = boundary_prf(&predicted, &fx.truth.boundary_frames, tolerance);
        exact = exact.merge(e);
        tolerant = tolerant.merge(t);
        counters.encode_calls += rec.counters.encode_calls;
        counters.decode_steps += rec.counters.decode_steps;
        counters.resets += rec.counters.resets;
        segments += rec.segments.len();
        forced += rec.forced_cuts();
        duration += fx.duration_ms();
        streams.push(StreamMetrics {
            id: fx.id.clone(),
            bleu: fixed(bleu, SCORE_DECIMALS),
            laal_ms,
            laal_error,
            boundary_exact: round_prf(e),
            boundary_tolerant: round_prf(t),
            segments: rec.segments.len(),
            forced_cuts: rec.forced_cuts(),
            counters: rec.counters,
        });
        stream_evals.push(ev);
    }
    let corpus = CorpusEval::from_streams(&stream_evals, tokenizer)?;
    let minutes = duration / 60000.0;
    let mut bleu_detail = corpus.bleu.clone();
    bleu_detail.score = fixed(bleu_detail.score, SCORE_DECIMALS);
    bleu_detail.brevity_penalty = fixed(bleu_detail.brevity_penalty, SCORE_DECIMALS);
    Ok(Metrics {
        streams,
        corpus: CorpusMetrics {
            bleu: fixed(corpus.bleu.score, SCORE_DECIMALS),
            bleu_detail,
            laal_ms: corpus.laal_ms.map(|v| fixed(v, MS_DECIMALS)),
            sentences: corpus.sentences,
            sentences_without_output: corpus.sentences_without_output,
            mwer_distance: corpus.mwer_distance,
            boundary_tolerance_frames: tolerance,
            boundary_exact: round_prf(exact),
            boundary_tolerant: round_prf(tolerant),
            segments,
            mean_segment_ms: fixed(if segments == 0 { 0.0 } else { duration / segments as f64 }, MS_DECIMALS),
            segments_per_minute: fixed(segments as f64 / minutes, SCORE_DECIMALS),
            forced_cuts: forced,
            forced_cuts_per_minute: fixed(forced as f64 / minutes, SCORE_DECIMALS),
            duration_ms: fixed(duration, MS_DECIMALS),
            counters,
        },
    })
}
