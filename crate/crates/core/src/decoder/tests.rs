use super::*;
use crate::lattice::{blocks_for_duration, make_vocabulary, SpeechBlock, Vocabulary};
use crate::synth::{Script, ScriptedBackend};
use crate::Error;

fn vocab() -> Vocabulary {
    make_vocabulary(&["\u{2581}a", "\u{2581}b", "\u{2581}c", ".", "?"], "<blank>").unwrap()
}

/// "a b ." then "c a ?", with a 6-frame pause between sentences.
fn script(beta: f64) -> Script {
    Script {
        sentences: vec![vec![0, 1, 3], vec![2, 0, 4]],
        spans: vec![
            vec![[2, 6], [6, 10], [10, 11]],
            vec![[17, 21], [21, 24], [24, 25]],
        ],
        sharpness: beta,
        seed: 5,
        frames: 30,
        frame_duration_ms: 40.0,
    }
}

fn run_stream(
    backend: &mut ScriptedBackend,
    block_frames: usize,
    cfg: &DecoderConfig,
) -> (Vec<CommittedToken>, Vec<Vec<usize>>) {
    let frames = backend.lattice().frames();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    let mut history = Vec::new();
    let mut out = Vec::new();
    for block in blocks_for_duration(frames, block_frames, 40.0) {
        s.feed_block(&block, backend).unwrap();
        out.extend(s.incremental_beam_search(backend, cfg).unwrap());
        history.push(out.iter().map(|c| c.token).collect());
    }
    let rec = s.finish(backend, cfg).unwrap();
    out.extend(rec.tokens[out.len()..].iter().copied());
    (out, history)
}

#[test]
fn feeding_advances_horizon() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    let n = s.feed_block(&SpeechBlock::new(0, 0.0, 8, 40.0), &mut b).unwrap();
    assert_eq!(n, 8);
    assert_eq!(s.frame_horizon(), 8);
    assert!(s.committed().is_empty());
}

#[test]
fn two_blocks_equal_one_concatenated_block() {
    let mut b1 = ScriptedBackend::new(&script(0.8), vocab()).unwrap();
    let mut b2 = b1.clone();
    let mut split = DecodeSession::new(vocab(), 40.0).unwrap();
    split.feed_block(&SpeechBlock::new(0, 0.0, 7, 40.0), &mut b1).unwrap();
    split.feed_block(&SpeechBlock::new(1, 280.0, 9, 40.0), &mut b1).unwrap();
    let mut whole = DecodeSession::new(vocab(), 40.0).unwrap();
    whole.feed_block(&SpeechBlock::new(0, 0.0, 16, 40.0), &mut b2).unwrap();
    assert_eq!(split.lattice(), whole.lattice());
    assert_eq!(split.states(), whole.states());
    assert_eq!(split.beam(), whole.beam());
}

#[test]
fn empty_block_changes_nothing() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 8, 40.0), &mut b).unwrap();
    let before = (s.lattice().clone(), s.beam().to_vec(), b.counters());
    s.feed_block(&SpeechBlock::new(1, 320.0, 0, 40.0), &mut b).unwrap();
    assert_eq!((s.lattice().clone(), s.beam().to_vec(), b.counters()), before);
}

#[test]
fn non_contiguous_block_is_a_stream_error() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 8, 40.0), &mut b).unwrap();
    let err = s.feed_block(&SpeechBlock::new(2, 640.0, 8, 40.0), &mut b);
    assert!(matches!(err, Err(Error::Stream(_))));
}

#[test]
fn search_needs_frames() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    assert!(s.incremental_beam_search(&mut b, &DecoderConfig::default()).is_err());
}

#[test]
fn noiseless_script_is_reproduced() {
    for block in [4, 8, 40] {
        let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
        let (out, history) = run_stream(&mut b, block, &DecoderConfig::default());
        let tokens: Vec<usize> = out.iter().map(|c| c.token).collect();
        assert_eq!(tokens, script(1.0).tokens(), "block={block}");
        // prefix-monotone emission history
        for w in history.windows(2) {
            assert!(w[1].starts_with(&w[0]));
        }
        // delays are non-decreasing and within the stream
        assert!(out.windows(2).all(|w| w[0].delay_ms <= w[1].delay_ms));
        assert!(out.iter().all(|c| c.delay_ms <= 30.0 * 40.0));
    }
}

#[test]
fn tokens_wait_for_their_audio() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let (out, _) = run_stream(&mut b, 4, &DecoderConfig::default());
    let spans = script(1.0).flat_spans();
    for (c, span) in out.iter().zip(spans) {
        // the first supporting frame must have been consumed
        assert!(c.delay_ms >= (span[0] + 1) as f64 * 40.0, "{c:?} {span:?}");
    }
}

#[test]
fn noisy_script_is_reproduced_with_beam() {
    let mut b = ScriptedBackend::new(&script(0.8), vocab()).unwrap();
    let (out, _) = run_stream(&mut b, 5, &DecoderConfig::default());
    let tokens: Vec<usize> = out.iter().map(|c| c.token).collect();
    assert_eq!(tokens, script(0.8).tokens());
}

#[test]
fn beam_one_without_ctc_is_greedy_decoding() {
    let cfg = DecoderConfig {
        beam_width: 1,
        ctc_weight: 0.0,
        ..DecoderConfig::default()
    };
    let mut b = ScriptedBackend::new(&script(0.8), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 30, 40.0), &mut b).unwrap();
    s.expand(&mut b, &cfg).unwrap();
    assert_eq!(s.beam().len(), 1);
    // greedy argmax of the decoder at each step reproduces the script
    assert_eq!(s.best().tokens, script(0.8).tokens());
    assert!((s.best().joint_score - s.best().dec_logprob).abs() < 1e-12);
    // one decoder call per emitted token
    assert_eq!(b.counters().decode_steps, 6);
}

#[test]
fn full_ctc_weight_ranks_by_prefix_score() {
    let cfg = DecoderConfig {
        ctc_weight: 1.0,
        ..DecoderConfig::default()
    };
    let mut b = ScriptedBackend::new(&script(0.8), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 12, 40.0), &mut b).unwrap();
    s.expand(&mut b, &cfg).unwrap();
    let scores: Vec<f64> = s.beam().iter().map(|h| h.joint_score).collect();
    for (h, &j) in s.beam().iter().zip(&scores) {
        assert_eq!(h.ctc_prefix_logprob, j);
    }
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(s.best().tokens, vec![0, 1, 3]);
}

#[test]
fn cut_at_horizon_has_empty_carry() {
    let cfg = DecoderConfig::default();
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 12, 40.0), &mut b).unwrap();
    assert!(matches!(
        s.clone().cut(12, Finish::Horizon, &mut b, &cfg),
        Err(Error::Bounds { .. })
    ));
    let (rec, next) = s.cut(11, Finish::Horizon, &mut b, &cfg).unwrap();
    assert_eq!(rec.end_frame, 12);
    assert_eq!(next.frames(), 0);
    assert_eq!(next.start_frame(), 12);
    assert_eq!(rec.tokens.iter().map(|c| c.token).collect::<Vec<_>>(), vec![0, 1, 3]);
    assert_eq!(b.counters().resets, 1);
}

#[test]
fn cut_at_sentence_boundary_round_trips() {
    let cfg = DecoderConfig::default();
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 20, 40.0), &mut b).unwrap();
    let (first, mut next) = s.cut(10, Finish::Horizon, &mut b, &cfg).unwrap();
    assert_eq!(next.start_frame(), 11);
    assert_eq!(next.frames(), 9);
    next.feed_block(&SpeechBlock::new(1, 800.0, 10, 40.0), &mut b).unwrap();
    next.incremental_beam_search(&mut b, &cfg).unwrap();
    let second = next.finish(&mut b, &cfg).unwrap();
    let mut all: Vec<usize> = first.tokens.iter().map(|c| c.token).collect();
    all.extend(second.tokens.iter().map(|c| c.token));
    assert_eq!(all, script(1.0).tokens());
    // carried frames keep their source time
    assert_eq!(second.start_frame, 11);
    assert_eq!(second.end_frame, 30);
}

#[test]
fn cut_with_explicit_tokens_checks_committed_prefix() {
    let cfg = DecoderConfig::default();
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 20, 40.0), &mut b).unwrap();
    s.incremental_beam_search(&mut b, &cfg).unwrap();
    assert_eq!(s.committed_tokens(), vec![0, 1, 3, 2]);
    assert!(s.clone().cut(10, Finish::Tokens(vec![0, 1, 3]), &mut b, &cfg).is_err());
    let (rec, _) = s.cut(10, Finish::Tokens(vec![0, 1, 3, 2]), &mut b, &cfg).unwrap();
    assert_eq!(rec.tokens.len(), 4);
}

#[test]
fn invalid_config_is_rejected() {
    let mut b = ScriptedBackend::new(&script(1.0), vocab()).unwrap();
    let mut s = DecodeSession::new(vocab(), 40.0).unwrap();
    s.feed_block(&SpeechBlock::new(0, 0.0, 8, 40.0), &mut b).unwrap();
    let cfg = DecoderConfig {
        ctc_weight: 1.5,
        ..DecoderConfig::default()
    };
    assert!(matches!(s.expand(&mut b, &cfg), Err(Error::Config(_))));
}

#[test]
fn joint_score_endpoints() {
    assert_eq!(joint_score(-1.0, f64::NEG_INFINITY, 0.0), -1.0);
    assert_eq!(joint_score(f64::NEG_INFINITY, -2.0, 1.0), -2.0);
    assert!((joint_score(-1.0, -2.0, 0.3) - (-1.3)).abs() < 1e-12);
}
