//! Fixture generation, simulation runs, evaluation and sweeps.

mod commands;
mod config;
mod fixtures;
mod report;
mod runner;

pub use config::{BackendKind, Overrides, RunConfig, SweepConfig, SweepParam};
pub use fixtures::{
    gen_synth, load_fixtures, sha256_hex, FixtureSet, FixtureStream, Manifest, ManifestStream, MANIFEST,
};
pub use runner::{run_stream, BlockTrace, StreamRun, StreamSettings};
pub use commands::{
    cmd_evaluate, cmd_gen_synth, cmd_simulate, cmd_sweep, simulate, sweep, sweep_csv, Simulation, SweepRow, METRICS,
    RECORDS, SUMMARY, SWEEP_CSV, TIMING,
};
pub use report::{
    evaluate_records, read_records, write_records, CorpusMetrics, Metrics, RunReport, SegmentReport, StreamMetrics,
    StreamRecord, TokenRecord,
};
