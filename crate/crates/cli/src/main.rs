//! Scenario-driven pool simulator.
//!
//! `termpool simulate` replays a JSON event script against a pool and
//! writes the trajectory (JSON-Lines and/or CSV). `termpool oracle` replays
//! the same script while re-deriving every curve solve by bisection, every
//! present value by brute-force position closing, and every Newton solve by
//! bisection, and reports the worst deviations.
//!
//! Exit codes: 0 on success, 1 on argument/parse/validation errors, 2 when
//! an invariant violation is detected (a failed per-event check, or an
//! oracle deviation beyond tolerance).

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use termpool::oracle::oracle_check;
use termpool::scenario::{run_scenario, Scenario, TrajectoryRecord};
use termpool::state::PoolConfig;

#[derive(Parser)]
#[command(
    name = "termpool",
    version,
    about = "Deterministic scenario simulator for a term-structure AMM pool"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a scenario and write its trajectory.
    Simulate {
        /// Pool configuration (JSON: sigma, phi_n, phi_m, phi_g,
        /// phi_g_zombie, d_c, position_duration, z_min).
        #[arg(long)]
        config: PathBuf,
        /// Event script (JSON: {"events": [...]}; the first event must be
        /// init).
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Folded into every stochastic rate model's seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Which trajectory files to write.
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Re-derive every numerical result independently and report deviations.
    ///
    /// Requires a fee-free configuration and at most 500 events.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Jsonl,
    Csv,
    Both,
}

fn load_config(path: &Path) -> Result<PoolConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: PoolConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(config)
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario: Scenario =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(scenario)
}

/// 0 when every per-event invariant held, 2 otherwise.
fn exit_for_records(records: &[TrajectoryRecord]) -> u8 {
    let violations = records.iter().filter(|r| !r.checks.passed()).count();
    if violations > 0 {
        eprintln!("invariant violation: {violations} event(s) failed their checks");
        2
    } else {
        0
    }
}

fn simulate(
    config: PathBuf,
    scenario: PathBuf,
    out: PathBuf,
    seed: u64,
    format: Format,
) -> Result<u8> {
    let config = load_config(&config)?;
    let scenario = load_scenario(&scenario)?;
    let records = run_scenario(config, &scenario, seed)?;

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    if format != Format::Csv {
        report::write_jsonl(&records, &out.join("trajectory.jsonl"))?;
    }
    if format != Format::Jsonl {
        report::write_csv(&records, &out.join("summary.csv"))?;
    }
    let errors = records
        .iter()
        .filter(|r| r.outcome.error.is_some())
        .count();
    println!(
        "{} events applied ({} rejected), final time {}; wrote {}",
        records.len(),
        errors,
        records.last().map(|r| r.time).unwrap_or(0),
        out.display()
    );
    Ok(exit_for_records(&records))
}

fn oracle(config: PathBuf, scenario: PathBuf) -> Result<u8> {
    let config = load_config(&config)?;
    let scenario = load_scenario(&scenario)?;
    let report = oracle_check(config, &scenario, 0)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.passed { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            scenario,
            out,
            seed,
            format,
        } => simulate(config, scenario, out, seed, format),
        Command::Oracle { config, scenario } => oracle(config, scenario),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
