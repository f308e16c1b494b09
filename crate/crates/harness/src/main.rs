use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use schemanet::cause_effect::ReliabilityMatrix;
use schemanet_harness::oracle::{run_suite, Suite};
use schemanet_harness::plot::{plot, Figure};
use schemanet_harness::run::{read_json, MATRIX};
use schemanet_harness::{run, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "schemanet", version, about = "Run, plot and check schemanet experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config trial budget.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Render a figure from an existing run directory.
    Plot {
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_figure)]
        figure: Figure,
    },
    /// Run reference checks and print the report.
    Oracle {
        #[arg(value_parser = parse_suite, default_value = "all")]
        suite: Suite,
        /// Directory for the report and reference files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the final reliability matrix of a run as TSV.
    DumpMatrix {
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    Figure::parse(s).ok_or_else(|| format!("unknown figure `{s}` (path, mhm, traces, matrix)"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| format!("unknown suite `{s}` (drive, cause-effect, gradient, dual-inverse, override, all)"))
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command) -> Result<ExitCode, HarnessError> {
    match cmd {
        Command::Run { config, seed, out, trials } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if trials.is_some() {
                cfg.trials = trials;
            }
            let done = run(&cfg, out.as_deref())?;
            println!("{}", done.dir.display());
            println!("manifest sha256 {}", done.manifest_hash);
        }
        Command::Plot { out, figure } => {
            println!("{}", plot(&out, figure)?.display());
        }
        Command::Oracle { suite, out } => {
            let report = run_suite(suite);
            let text = report.render();
            print!("{text}");
            if let Some(dir) = out {
                report.write(&dir)?;
            }
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::DumpMatrix { out } => {
            let m: ReliabilityMatrix = read_json(&out, MATRIX)?;
            print!("{}", m.dump());
        }
    }
    Ok(ExitCode::SUCCESS)
}
