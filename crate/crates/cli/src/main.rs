//! Batch front door: classify a torus character or run the verification
//! suites, emitting machine-readable reports.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
//! 3 working precision exhausted.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use laps_core::suite::{self, RunConfig, SuiteKind};
use laps_core::Error;

#[derive(Parser)]
#[command(
    name = "laps",
    version,
    about = "Desk-scale checks for the locally analytic principal series of SL2(Qp)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a torus character: simple or reducible, constituents, length.
    Classify {
        /// The prime p.
        #[arg(long, default_value_t = 5)]
        p: u64,
        /// Relative working precision in p-adic digits.
        #[arg(long, default_value_t = 30)]
        precision: u32,
        /// Character spec "m=<int>;cond=<n>;unit=<values>;at_p=<scalar>".
        #[arg(long)]
        chi: String,
        /// Output format.
        #[arg(long, default_value = "json", value_parser = ["json", "text"])]
        format: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Run verification suites with a fixed seed and report every check.
    Suite {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 30)]
        precision: u32,
        /// Slack (digits) allowed below the precision in valuation checks.
        #[arg(long, default_value_t = 5)]
        slack: i64,
        /// Optional character spec pinning the exactness slice.
        #[arg(long)]
        chi: Option<String>,
        /// Cover level h for slice checks.
        #[arg(long, default_value_t = 1)]
        level: u32,
        /// Truncation degree D for slice checks.
        #[arg(long, default_value_t = 9)]
        degree: usize,
        /// Level of the finite smooth module.
        #[arg(long = "smooth-level", default_value_t = 1)]
        smooth_level: u32,
        /// Seed for all pseudo-random draws.
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        /// Comma-separated suite list (default: all). Known: exactness,
        /// equivariance, group-law, lie-oracle, taylor, smooth-case,
        /// finite-identities, generation.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value = "json", value_parser = ["json", "text"])]
        format: String,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Test hook: corrupt the named convention and expect a failure.
        #[arg(long = "negative-control", hide = true)]
        negative_control: Option<String>,
    },
}

fn emit(text: &str, out: &Option<std::path::PathBuf>) -> std::io::Result<()> {
    match out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(path) => std::fs::write(path, text),
    }
}

fn exit_for(err: &Error) -> ExitCode {
    if err.is_precision() {
        ExitCode::from(3)
    } else {
        ExitCode::from(2)
    }
}

fn run() -> Result<ExitCode, (Error, ExitCode)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify {
            p,
            precision,
            chi,
            format,
            out,
        } => {
            let report = suite::classify_report(p, precision, &chi)
                .map_err(|e| {
                    let code = exit_for(&e);
                    (e, code)
                })?;
            let text = if format == "json" {
                serde_json::to_string_pretty(&report).expect("serializable")
            } else {
                let mut t = format!(
                    "c(chi) = {}\nverdict: {}\n",
                    report.c_of_chi, report.verdict
                );
                if let Some(m) = report.m {
                    t.push_str(&format!("m = {m}\n"));
                }
                if let Some(case) = &report.case {
                    t.push_str(&format!("case: {case:?}\n"));
                }
                t.push_str(&format!(
                    "topological length: {}\nconstituents:\n",
                    report.topological_length
                ));
                for c in &report.constituents {
                    t.push_str(&format!("  - [{}] {}\n", c.kind, c.description));
                }
                t
            };
            emit(&text, &out).map_err(|e| (Error::Io(e), ExitCode::from(2)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite {
            p,
            precision,
            slack,
            chi,
            level,
            degree,
            smooth_level,
            seed,
            suite,
            format,
            out,
            negative_control,
        } => {
            let suites = match suite {
                None => SuiteKind::all(),
                Some(ref s) if s.trim().is_empty() => Vec::new(),
                Some(ref s) => s
                    .split(',')
                    .map(|name| SuiteKind::parse(name.trim()))
                    .collect::<laps_core::Result<_>>()
                    .map_err(|e| (e, ExitCode::from(2)))?,
            };
            let cfg = RunConfig {
                p,
                precision,
                slack,
                chi_spec: chi,
                level_h: level,
                degree,
                smooth_level,
                seed,
                suites,
                negative_control,
            };
            let report = suite::run_suites(&cfg).map_err(|e| {
                let code = exit_for(&e);
                (e, code)
            })?;
            let text = if format == "json" {
                report.to_json()
            } else {
                report.to_text()
            };
            emit(&text, &out).map_err(|e| (Error::Io(e), ExitCode::from(2)))?;
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err((err, code)) => {
            eprintln!("error: {err}");
            code
        }
    }
}
