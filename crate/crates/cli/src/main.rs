use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qvote::anoncast::OrParams;
use qvote::election::{ElectionConfig, DEFAULT_SEED, SEED_ENV};
use qvote::harness::{self, ExperimentReport};

#[derive(Parser)]
#[command(name = "qvote", version, about = "Authority-free quantum e-voting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form bounds for a configuration.
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one election and write its outcome and transcript.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a saved run and compare outcome records byte for byte.
    Replay { transcript: PathBuf },
    /// Run a named experiment and print its report.
    Experiment {
        name: ExperimentName,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Use the full coin count instead of the reduced-scale default.
        #[arg(long)]
        full: bool,
        /// Also print one machine-readable line per check.
        #[arg(long)]
        records: bool,
    },
    /// Reproduce the four-voter worked example.
    Fig1,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    T1,
    T2,
    T3,
    Correctness,
    Privacy,
    Logicalor,
    Example,
}

enum Failure {
    Usage(String),
    Check,
}

impl From<qvote::Error> for Failure {
    fn from(e: qvote::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<ElectionConfig, Failure> {
    match path {
        None => Ok(ElectionConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(ElectionConfig::from_toml(&text)?)
        }
    }
}

fn experiment(name: ExperimentName, trials: Option<u64>, seed: u64, full: bool) -> Result<Vec<ExperimentReport>, Failure> {
    use harness::*;
    let t = |default: u64| trials.unwrap_or(default);
    let reports = match name {
        ExperimentName::T1 => {
            let cfg = ElectionConfig::default();
            let m = if full { cfg.m()? } else { 6 };
            let mut out = Vec::new();
            for eps in [0.3, 0.6] {
                out.push(experiment_verification(4, eps, t(100_000), 10_000, seed)?);
            }
            out.push(experiment_abort_bound(4, 0.6, 0.05, m, t(if full { 200 } else { 1000 }), seed)?);
            out
        }
        ExperimentName::T2 => vec![experiment_identity_sweep(&[3, 4, 5, 6], &[0.0, 0.3, 0.6])?],
        ExperimentName::T3 => vec![
            experiment_vote_flip(4, 0.3, t(100_000), seed)?,
            experiment_vote_flip(4, 0.6, t(100_000), seed)?,
        ],
        ExperimentName::Correctness => {
            vec![experiment_correctness(4, 0.1, OrParams::new(10, 108)?, 0.5, t(10_000), seed)?]
        }
        ExperimentName::Privacy => vec![experiment_privacy(4, 0.6, 1, 5, t(100_000), seed)?],
        ExperimentName::Logicalor => vec![experiment_logicalor(4, OrParams::new(3, 4)?, 3, t(100_000), seed)?],
        ExperimentName::Example => vec![experiment_example()?],
    };
    Ok(reports)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds { config } => {
            let cfg = load_config(config.as_deref())?;
            println!("{}", harness::compute_bounds(&cfg)?);
        }
        Command::Run { config, out } => {
            let cfg = load_config(Some(&config))?;
            let (text, record) = harness::run_to_file(&cfg)?;
            match out {
                Some(path) => fs::write(&path, &text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            eprintln!("{}", record.outcome.record());
        }
        Command::Replay { transcript } => {
            let text = fs::read_to_string(&transcript)
                .map_err(|e| Failure::Usage(format!("{}: {e}", transcript.display())))?;
            let report = harness::replay(&text)?;
            println!("original: {}", report.original_outcome);
            println!("replayed: {}", report.replayed_outcome);
            if !report.identical {
                if let Some(diff) = &report.first_difference {
                    println!("first difference: {diff}");
                }
                println!("replay MISMATCH");
                return Err(Failure::Check);
            }
            println!("replay identical");
        }
        Command::Experiment { name, trials, seed, full, records } => {
            let mut ok = true;
            for report in experiment(name, trials, seed, full)? {
                println!("{report}");
                if records {
                    for line in report.records() {
                        println!("{line}");
                    }
                }
                ok &= report.passed();
            }
            if !ok {
                return Err(Failure::Check);
            }
        }
        Command::Fig1 => println!("{}", harness::worked_example()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
