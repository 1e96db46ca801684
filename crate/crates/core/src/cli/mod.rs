//! `hjvar`: batch front end over the library.
//!
//! Exit status 0 on success, 1 on invalid input, 2 on runtime failure.

mod commands;
mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{parse_override, HashCheckSection, InfluenceSection, ReportSection, RunConfig, SampleEnvSection, SiteScan, SolveSection};

use crate::error::{Error, Result};

/// Output directory when `--out` is absent and `HJVAR_OUT` is unset.
pub const DEFAULT_OUT: &str = "hjvar-out";

#[derive(Debug, Parser)]
#[command(name = "hjvar", version, about = "Random Hamilton-Jacobi value functions: solves, influences and variance campaigns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config (or a previous run's manifest.json).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory [default: $HJVAR_OUT or hjvar-out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Override one config key, e.g. `campaign.samples=100`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample an environment and write its snapshot.
    SampleEnv,
    /// Solve one value function and export the table and near-optimal paths.
    Solve,
    /// Flip sites, classify important cubes and write the survey CSV.
    Influence,
    /// Monte Carlo variance campaign with growth fits.
    Campaign,
    /// First-passage percolation variance curve.
    Fpp,
    /// Shift-hash uniformity and single-flip Lipschitz checks.
    HashCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SampleEnv => "sample-env",
            Command::Solve => "solve",
            Command::Influence => "influence",
            Command::Campaign => "campaign",
            Command::Fpp => "fpp",
            Command::HashCheck => "hash-check",
        }
    }
}

/// What a command produced.
pub(crate) struct Outcome {
    pub files: Vec<String>,
    /// Printed to stdout.
    pub lines: Vec<String>,
    /// Set when results were written but the run must report failure.
    pub failure: Option<String>,
}

pub(crate) fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_doc(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config { key: "--config".into(), msg: format!("{}: {e}", path.display()) })?;
    serde_json::from_str(&text).map_err(|e| Error::Config { key: "--config".into(), msg: e.to_string() })
}

fn write_manifest(
    out: &Path,
    cli: &Cli,
    cfg: &RunConfig,
    cfg_bytes: &[u8],
    started: u64,
    elapsed: f64,
    outcome: &Result<Outcome>,
) -> Result<()> {
    let outputs: Vec<Value> = match outcome {
        Ok(o) => o.files.iter().map(|f| Ok(json!({"file": f, "sha256": hex_sha256(&fs::read(out.join(f))?)}))).collect::<Result<_>>()?,
        Err(_) => Vec::new(),
    };
    let status = match outcome {
        Ok(Outcome { failure: None, .. }) => json!("ok"),
        Ok(Outcome { failure: Some(m), .. }) => json!({"failed": m}),
        Err(e) => json!({"error": e.to_string()}),
    };
    let manifest = json!({
        "hjvar_manifest": 1,
        "command": cli.command.name(),
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config_file": "config.resolved.json",
        "config_sha256": hex_sha256(cfg_bytes),
        "config": cfg,
        "overrides": cli.set,
        "jobs": cli.jobs,
        "started_unix": started,
        "elapsed_seconds": elapsed,
        "outputs": outputs,
        "status": status,
    });
    fs::write(out.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    let overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    let doc = cli.config.as_deref().map(load_doc).transpose()?;
    let cfg = RunConfig::resolve(doc, &overrides)?;
    let out = cli.out.clone().or_else(|| std::env::var_os("HJVAR_OUT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&out)?;
    let cfg_bytes = serde_json::to_vec_pretty(&cfg)?;
    fs::write(out.join("config.resolved.json"), &cfg_bytes)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config { key: "--jobs".into(), msg: e.to_string() })?;
    let outcome = pool.install(|| commands::run(cli.command, &cfg, &out));
    write_manifest(&out, cli, &cfg, &cfg_bytes, started, clock.elapsed().as_secs_f64(), &outcome)?;
    let o = outcome?;
    for l in &o.lines {
        println!("{l}");
    }
    match o.failure {
        None => Ok(0),
        Some(m) => {
            eprintln!("error: {m}");
            Ok(2)
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
