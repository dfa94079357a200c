use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use supergeom::cli_reports::{self, DecomposeFixture, Suite, SuiteConfig, CONFIG_ENV};
use supergeom::sigma2d::{self, Target};
use supergeom::Result;

#[derive(Parser)]
#[command(
    name = "supergeom",
    version,
    about = "Verification suites for the super-geometry library"
)]
struct Cli {
    /// Config file; defaults to built-in settings when unset.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite: algebra, toy, berezin, reduction, susy2d, currents, flow, decompose or all.
    Verify {
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Record per-suite wall time in each check.
        #[arg(long)]
        timings: bool,
    },
    /// Fix the sign conventions and write them into the config file.
    Calibrate,
    /// Harmonic map flow from a perturbed identity map of the torus.
    Flow {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Decompose a planted deformation described by a fixture file.
    Decompose {
        #[arg(long)]
        fixture: PathBuf,
    },
}

/// A missing file is only tolerated by `calibrate`, which creates it.
fn load(path: Option<&Path>, allow_missing: bool) -> Result<SuiteConfig> {
    match path {
        Some(p) if allow_missing && !p.exists() => Ok(SuiteConfig::default()),
        Some(p) => SuiteConfig::load(p),
        None => Ok(SuiteConfig::default()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load(cli.config.as_deref(), matches!(cli.command, Command::Calibrate))?;
    match cli.command {
        Command::Verify {
            suite,
            seed,
            json,
            timings,
        } => {
            let suite: Suite = suite.parse()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = cli_reports::run_suite(&cfg, suite, timings)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = json {
                std::fs::write(path, text.clone() + "\n")?;
            }
            println!("{text}");
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAIL {} residual {:.3e} > {:.3e}", c.name, c.residual, c.tolerance);
            }
            Ok(report.all_passed())
        }
        Command::Calibrate => {
            let path = cli
                .config
                .ok_or_else(|| supergeom::Error::Config(format!("calibrate needs --config or {CONFIG_ENV}")))?;
            cfg.conventions = Some(cli_reports::calibrate(&cfg)?);
            cfg.save(&path)?;
            println!("{}", serde_json::to_string_pretty(&cfg.conventions)?);
            Ok(true)
        }
        Command::Flow { steps, dt } => {
            let mut params = cli_reports::flow_params(&cfg);
            params.steps = steps.unwrap_or(params.steps);
            params.dt = dt.unwrap_or(params.dt);
            let res = sigma2d::harmonic_flow(&cli_reports::perturbed_identity(&cfg), &Target::Flat { dim: 2 }, params)?;
            let out = serde_json::json!({
                "steps": res.steps,
                "initial_energy": res.initial_energy,
                "energy": res.energy,
                "gradient_norm": res.gradient_norm,
                "converged": res.converged,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(res.converged)
        }
        Command::Decompose { fixture } => {
            let fx: DecomposeFixture = serde_json::from_str(&std::fs::read_to_string(fixture)?)?;
            let sign = fx
                .frame_sign
                .unwrap_or(cli_reports::active_conventions(&cfg)?.action.s3);
            let out = cli_reports::run_decompose(&fx, sign)?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
