//! Command-line front end. Exit codes: 0 success, 2 infeasible instance,
//! 1 malformed input or internal error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use matround::core::partition::partition;
use matround::report::{infeasible_report, is_infeasible, solve_instance, verify_report};
use matround::schema::{ground_to_ids, ids_to_ground, InstanceFile, MatroidSpec, ReportFile};
use matround::{gen, resolve_sep_cap, selftest};

#[derive(Parser)]
#[command(name = "matround", version, about = "Iterative relaxation rounding over matroid polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SepCap {
    /// Cap on subset enumeration in the separation oracle
    /// (overrides MATROUND_SEP_CAP).
    #[arg(long)]
    sep_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and emit a verified report.
    Solve {
        path: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the full event trace in the report.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        sep: SepCap,
    },
    /// Re-check a report against its instance.
    Verify { instance: PathBuf, report: PathBuf },
    /// Generate seeded random instances.
    Gen {
        /// One of: round, round-knapsack, 3mat, intersect2, gmdst.
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground-set size (vertex budget for gmdst).
        #[arg(long, default_value_t = 8)]
        size: usize,
        /// How many instances (seeds seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Output file; with --count > 1, a basename extended per seed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized verification suites and print a slack table.
    Selftest {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sep: SepCap,
    },
    /// Maximum-weight common independent set of two matroids.
    Intersect2 {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sep: SepCap,
    },
    /// Partition a set into at most q independent sets of a matroid.
    Partition {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Input document for the `partition` subcommand.
#[derive(Deserialize)]
struct PartitionRequest {
    matroid: MatroidSpec,
    set: Vec<u64>,
    q: u32,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_instance(path: &PathBuf) -> Result<InstanceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InstanceFile::parse(&text)
}

fn emit_report(report: &ReportFile, out: &Option<PathBuf>) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(report)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { path, out, trace, sep } => {
            let file = read_instance(&path)?;
            match solve_instance(&file, resolve_sep_cap(sep.sep_cap), trace) {
                Ok(report) => {
                    emit_report(&report, &out)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) if is_infeasible(&e) => {
                    emit_report(&infeasible_report(&file.problem), &out)?;
                    Ok(ExitCode::from(2))
                }
                Err(e) => Err(e),
            }
        }
        Command::Verify { instance, report } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            let rep = ReportFile::parse(&text)?;
            let failures = verify_report(&inst, &rep)?;
            if failures.is_empty() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &failures {
                    eprintln!("verification failure: {f}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Gen { problem, seed, size, count, out } => {
            for i in 0..count {
                let s = seed + i as u64;
                let file = gen::gen_instance(&problem, s, size)?;
                let text = serde_json::to_string_pretty(&file)?;
                let target = match (&out, count) {
                    (None, _) => None,
                    (Some(path), 1) => Some(path.clone()),
                    (Some(path), _) => {
                        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                        let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("json");
                        Some(path.with_file_name(format!("{stem}-{s}.{ext}")))
                    }
                };
                emit(&target, &text)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { count, size, seed, sep } => {
            let summary = selftest::run_selftest(count, size, seed, resolve_sep_cap(sep.sep_cap));
            print!("{}", summary.render());
            if summary.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Intersect2 { path, out, sep } => {
            let mut file = read_instance(&path)?;
            file.problem = "intersect2".to_string();
            let report = solve_instance(&file, resolve_sep_cap(sep.sep_cap), false)?;
            emit_report(&report, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Partition { path, out } => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let req: PartitionRequest =
                serde_json::from_str(&text).context("malformed partition request")?;
            let m = req.matroid.build()?;
            let set = ids_to_ground(&req.set);
            match partition(&m, &set, req.q).map_err(|e| anyhow!("{e}"))? {
                Some(cert) => {
                    let parts: Vec<Vec<u64>> =
                        cert.parts.iter().map(ground_to_ids).collect();
                    emit(&out, &serde_json::to_string_pretty(&serde_json::json!({
                        "status": "partitioned",
                        "parts": parts,
                    }))?)?;
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    emit(&out, &serde_json::to_string_pretty(&serde_json::json!({
                        "status": "infeasible",
                    }))?)?;
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
