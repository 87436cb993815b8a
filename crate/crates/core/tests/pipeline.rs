use punctseg::harness::{cmd_gen_synth, load_fixtures, simulate, RunConfig};
use punctseg::segmentation::PolicyKind;
use punctseg::synth::CorpusConfig;

fn small(sharpness: f64) -> (tempfile::TempDir, RunConfig) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        fixtures: dir.path().join("fx"),
        out: dir.path().join("out"),
        corpus: CorpusConfig { streams: 4, sharpness, mid_pause_prob: 0.3, ..CorpusConfig::default() },
        ..RunConfig::default()
    };
    cmd_gen_synth(&cfg).unwrap();
    (dir, cfg)
}

#[test]
fn reports_are_complete_and_causal() {
    let (_dir, mut cfg) = small(0.8);
    let fx = load_fixtures(&cfg.fixtures).unwrap();
    for kind in PolicyKind::ALL {
        cfg.policy.kind = kind;
        cfg.policy.min_len_ms = if kind == PolicyKind::Sim { 4000.0 } else { 2000.0 };
        cfg.policy.max_len_ms = 7000.0;
        let sim = simulate(&cfg, &fx).unwrap();
        for (rec, stream) in sim.records.iter().zip(&fx.streams) {
            // segments tile the stream
            let mut at = 0;
            for s in &rec.segments {
                assert_eq!(s.start_frame, at, "{kind} {}", rec.id);
                at = s.end_frame;
            }
            assert_eq!(at, stream.lattice.frames(), "{kind} {}", rec.id);
            let total: f64 = rec.segments.iter().map(|s| s.end_ms - s.start_ms).sum();
            assert!((total - rec.duration_ms).abs() < 1e-6);

            // every token carries a delay inside the stream
            for t in rec.segments.iter().flat_map(|s| &s.tokens) {
                assert!(t.delay_ms > 0.0 && t.delay_ms <= rec.duration_ms + 1e-9);
            }

            if kind.is_streaming() {
                for b in &rec.trace {
                    for &c in &b.cuts {
                        assert!(c < b.horizon, "{kind} {} cut {c} past horizon {}", rec.id, b.horizon);
                    }
                }
                let horizons: Vec<usize> = rec.trace.iter().map(|b| b.horizon).collect();
                assert!(horizons.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}

#[test]
fn punctuation_policies_beat_blind_cuts_on_a_small_corpus() {
    let (_dir, mut cfg) = small(0.8);
    let fx = load_fixtures(&cfg.fixtures).unwrap();
    cfg.policy.kind = PolicyKind::Greedy;
    let greedy = simulate(&cfg, &fx).unwrap().report.metrics.corpus;
    cfg.policy.kind = PolicyKind::Fixed;
    cfg.policy.max_len_ms = greedy.mean_segment_ms;
    let fixed = simulate(&cfg, &fx).unwrap().report.metrics.corpus;
    assert!(greedy.bleu >= fixed.bleu, "greedy {} fixed {}", greedy.bleu, fixed.bleu);
    assert!(greedy.boundary_tolerant.f1 > fixed.boundary_tolerant.f1);
}
