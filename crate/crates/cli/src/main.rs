//! `faddeev`: run, sweep and verify the radial Faddeev simulator.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 blow-up detected,
//! 3 verification failure.

mod output;
mod suites;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use faddeev_core::config;
use faddeev_core::evolve::{RunConfig, RunStatus};

const EXIT_CONFIG: u8 = 1;
const EXIT_BLOWUP: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "faddeev", version, about = "Equivariant Faddeev model simulator")]
struct Cli {
    /// Worker threads for the right-hand side and sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (`[section]` headers and `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override `section.key=value`; repeatable, later wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write diagnostics, snapshots and metadata.
    Run(ConfigArgs),

    /// Run a desk-scale verification suite.
    Verify {
        suite: Suite,

        /// Directory for the report CSV.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },

    /// Run the Cartesian product of parameter lists, one directory per run.
    Sweep {
        #[command(flatten)]
        base: ConfigArgs,

        /// `section.key=v1,v2,...`; repeatable.
        #[arg(long = "grid", value_name = "KEY=V1,V2")]
        grid: Vec<String>,
    },

    /// Print kernel samples as CSV.
    KernelsTable {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,

        /// Largest kernel argument.
        #[arg(long, default_value_t = 4.0)]
        x_max: f64,

        #[arg(long, default_value_t = 401)]
        samples: usize,

        /// Radius at which the A coefficients are sampled.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,

        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Suite {
    Kernels,
    Transforms,
    Convergence,
    Energy,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
struct Exit {
    code: u8,
    kind: &'static str,
    error: anyhow::Error,
}

fn config_error(error: anyhow::Error) -> Exit {
    Exit {
        code: EXIT_CONFIG,
        kind: "config",
        error,
    }
}

fn io_error(error: anyhow::Error) -> Exit {
    Exit {
        code: EXIT_CONFIG,
        kind: "io",
        error,
    }
}

/// Config file text (empty without `--config`) and parsed overrides.
fn config_sources(path: Option<&Path>, set: &[String]) -> Result<(String, Vec<(String, String)>)> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("cannot read config {}", p.display()))?,
        None => String::new(),
    };
    let overrides = set
        .iter()
        .map(|s| config::parse_override(s))
        .collect::<faddeev_core::Result<Vec<_>>>()?;
    Ok((text, overrides))
}

fn load_config(path: Option<&Path>, set: &[String]) -> Result<RunConfig> {
    let (text, overrides) = config_sources(path, set)?;
    Ok(config::load(&text, &overrides)?)
}

fn cmd_run(args: &ConfigArgs) -> std::result::Result<u8, Exit> {
    let cfg = load_config(args.config.as_deref(), &args.set).map_err(config_error)?;
    let outcome = output::run_to_dir(&cfg, &args.out).map_err(io_error)?;
    println!(
        "status={} steps={} t={} out={}",
        outcome.status.label(),
        outcome.steps_taken,
        outcome.final_state.time,
        args.out.display()
    );
    Ok(match outcome.status {
        RunStatus::Completed => 0,
        RunStatus::BlowUp(_) => EXIT_BLOWUP,
    })
}

fn cmd_verify(suite: Suite, out: &Path) -> std::result::Result<u8, Exit> {
    let report = suites::run_suite(suite).map_err(io_error)?;
    print!("{}", report.csv());
    let path = out.join(format!("verify_{}.csv", suites::suite_name(suite)));
    output::write(&path, &report.csv()).map_err(io_error)?;
    if !report.studies.is_empty() {
        let studies = faddeev_core::verify::studies_csv(&report.studies);
        output::write(&out.join(format!("studies_{}.csv", suites::suite_name(suite))), &studies)
            .map_err(io_error)?;
    }
    Ok(if report.all_pass() { 0 } else { EXIT_VERIFY })
}

fn cmd_sweep(base: &ConfigArgs, grid: &[String]) -> std::result::Result<u8, Exit> {
    let (text, overrides) = config_sources(base.config.as_deref(), &base.set).map_err(config_error)?;
    let axes = grid
        .iter()
        .map(|g| sweep::parse_axis(g))
        .collect::<Result<Vec<_>>>()
        .map_err(config_error)?;
    let points = sweep::expand(&text, &overrides, &axes).map_err(config_error)?;
    let rows = sweep::run_all(&points, &base.out);
    let summary = sweep::summary_csv(&axes, &points, &rows);
    output::write(&base.out.join("summary.csv"), &summary).map_err(io_error)?;
    print!("{summary}");
    Ok(0)
}

fn cmd_kernels_table(
    alpha: f64,
    x_max: f64,
    samples: usize,
    radius: f64,
    out: Option<&Path>,
) -> std::result::Result<u8, Exit> {
    let text = output::kernels_table(alpha, x_max, samples, radius).map_err(config_error)?;
    match out {
        Some(path) => output::write(path, &text).map_err(io_error)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> std::result::Result<u8, Exit> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| config_error(e.into()))?;
    }
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify { suite, out } => cmd_verify(*suite, out),
        Command::Sweep { base, grid } => cmd_sweep(base, grid),
        Command::KernelsTable {
            alpha,
            x_max,
            samples,
            radius,
            out,
        } => cmd_kernels_table(*alpha, *x_max, *samples, *radius, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(exit) => {
            let reason = format!("{:#}", exit.error).replace('\n', " ");
            eprintln!("error kind={} reason={reason}", exit.kind);
            ExitCode::from(exit.code)
        }
    }
}
