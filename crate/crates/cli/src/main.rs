//! `punctseg` command-line harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use punctseg::harness::{
    cmd_evaluate, cmd_gen_synth, cmd_simulate, cmd_sweep, Overrides, RunConfig, METRICS, RECORDS, SUMMARY, SWEEP_CSV,
};
use punctseg::segmentation::PolicyKind;
use punctseg::Error;

#[derive(Parser, Debug)]
#[command(name = "punctseg", version, about = "Streaming speech-translation segmentation simulator")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Opts {
    /// TOML run config; flags below override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// fixed, dac, sim, greedy, align or none.
    #[arg(long, global = true, value_name = "POLICY")]
    policy: Option<PolicyKind>,
    /// Beam width.
    #[arg(long, global = true, value_name = "N")]
    beam: Option<usize>,
    /// CTC weight in the joint score.
    #[arg(long, global = true, value_name = "F")]
    lambda: Option<f64>,
    /// Speech block duration.
    #[arg(long = "block-ms", global = true, value_name = "N")]
    block_ms: Option<f64>,
    /// Minimum segment duration.
    #[arg(long = "min-len-ms", global = true, value_name = "N")]
    min_len_ms: Option<f64>,
    /// Maximum segment duration (fixed, dac, sim).
    #[arg(long = "max-len-ms", global = true, value_name = "N")]
    max_len_ms: Option<f64>,
    /// Corpus seed for gen-synth.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Fixture directory.
    #[arg(long, global = true, value_name = "DIR")]
    fixtures: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic fixture corpus.
    GenSynth,
    /// Run every fixture stream and write records and a summary.
    Simulate,
    /// Score a records file against the fixtures.
    Evaluate {
        /// Defaults to `<out>/records.jsonl`.
        records: Option<PathBuf>,
    },
    /// Simulate over the configured grid and write a CSV.
    Sweep,
}

impl Opts {
    fn overrides(&self) -> Overrides {
        Overrides {
            policy: self.policy,
            beam: self.beam,
            lambda: self.lambda,
            block_ms: self.block_ms,
            min_len_ms: self.min_len_ms,
            max_len_ms: self.max_len_ms,
            seed: self.seed,
            out: self.out.clone(),
            fixtures: self.fixtures.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = cli.opts.resolve()?;
    match cli.command {
        Command::GenSynth => {
            let manifest = cmd_gen_synth(&cfg)?;
            println!(
                "wrote {} streams to {} (sha256 {})",
                manifest.streams.len(),
                cfg.fixtures.display(),
                manifest.digest()
            );
        }
        Command::Simulate => {
            let report = cmd_simulate(&cfg)?;
            let c = &report.metrics.corpus;
            println!(
                "policy={} bleu={:.2} laal_ms={} boundary_f1={:.4} segments={} forced_cuts={}",
                cfg.policy.kind,
                c.bleu,
                c.laal_ms.map_or("undefined".to_string(), |v| format!("{v:.1}")),
                c.boundary_tolerant.f1,
                c.segments,
                c.forced_cuts
            );
            println!(
                "wrote {} and {}",
                cfg.out.join(RECORDS).display(),
                cfg.out.join(SUMMARY).display()
            );
        }
        Command::Evaluate { records } => {
            let path = records.unwrap_or_else(|| cfg.out.join(RECORDS));
            let metrics = cmd_evaluate(&cfg, &path)?;
            println!(
                "bleu={:.2} laal_ms={} sentences={}",
                metrics.corpus.bleu,
                metrics.corpus.laal_ms.map_or("undefined".to_string(), |v| format!("{v:.1}")),
                metrics.corpus.sentences
            );
            println!("wrote {}", cfg.out.join(METRICS).display());
        }
        Command::Sweep => {
            let rows = cmd_sweep(&cfg)?;
            println!("wrote {} rows to {}", rows.len(), cfg.out.join(SWEEP_CSV).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
