//! Command-line front end: config loading, flag overrides, worker pool,
//! output files and run manifests.

pub mod config;
pub mod manifest;
pub mod run;
pub mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::feynman_kac::Monitoring;
use crate::front_lab::ScaleKind;
pub use config::ExperimentConfig;
use manifest::{build_id, OutputSet, RunManifest, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Overrides the worker count given on the command line.
pub const WORKERS_ENV: &str = "IFL_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "ifl", version, about = "Moment bounds, Feynman-Kac Monte Carlo and front scans")]
pub struct Cli {
    /// Experiment config (JSON). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Never changes any output value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form front constants.
    Bounds,
    /// Monte Carlo estimate of E u^p(t, x).
    Moment(MomentArgs),
    /// Scan the normalized log-moment over a rho grid.
    Front(FrontArgs),
    /// Small-ball probability of Brownian motion.
    Smallball(SmallBallArgs),
    /// Run the oracle suite.
    Selftest,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Distance from the origin.
    #[arg(long)]
    pub x: Option<f64>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_steps: Option<usize>,
    /// Comma-separated horizons.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_scale)]
    pub scale: Option<ScaleKind>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct SmallBallArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// grid or bridge_kill.
    #[arg(long, value_parser = parse_monitoring)]
    pub monitoring: Option<Monitoring>,
}

fn parse_scale(s: &str) -> std::result::Result<ScaleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_monitoring(s: &str) -> std::result::Result<Monitoring, String> {
    match s {
        "grid" => Ok(Monitoring::Grid),
        "bridge_kill" => Ok(Monitoring::BridgeKill),
        other => Err(format!("expected grid or bridge_kill, got {other}")),
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Moment(_) => "moment",
            Command::Front(_) => "front",
            Command::Smallball(_) => "smallball",
            Command::Selftest => "selftest",
        }
    }
}

fn apply_mc(cfg: &mut ExperimentConfig, a: &McArgs) {
    if let Some(v) = a.reps {
        cfg.mc.n_rep = v;
    }
    if let Some(v) = a.steps {
        cfg.mc.n_steps = v;
    }
    if let Some(v) = a.seed {
        cfg.mc.seed = v;
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Folds command-line flags into the config, so the manifest echo alone
/// reproduces the run.
pub fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) -> Result<()> {
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    match &cli.command {
        Command::Bounds | Command::Selftest => {}
        Command::Moment(a) => {
            if let Some(p) = a.p {
                cfg.model.p = p;
            }
            if let Some(t) = a.t {
                cfg.moment.t = t;
            }
            if let Some(x) = a.x {
                cfg.moment.x = x;
            }
            apply_mc(cfg, &a.mc);
        }
        Command::Front(a) => {
            if a.rho_min.is_some() || a.rho_max.is_some() || a.rho_steps.is_some() {
                let g = &cfg.front.rho_grid;
                let lo = a.rho_min.or(g.first().copied()).unwrap_or(0.1);
                let hi = a.rho_max.or(g.last().copied()).unwrap_or(lo);
                let n = a.rho_steps.unwrap_or(g.len().max(2));
                if n == 0 {
                    return Err(Error::config("--rho-steps", "must be >= 1"));
                }
                cfg.front.rho_grid = linspace(lo, hi, n);
            }
            if let Some(t) = &a.t_grid {
                cfg.front.t_grid = t.clone();
            }
            if let Some(s) = a.scale {
                cfg.front.scale = s;
            }
            apply_mc(cfg, &a.mc);
        }
        Command::Smallball(a) => {
            let sb = &mut cfg.small_ball;
            if let Some(v) = a.d {
                sb.d = v;
            }
            if let Some(v) = a.eps {
                sb.eps = v;
            }
            if let Some(v) = a.steps {
                sb.n_steps = v;
            }
            if let Some(v) = a.reps {
                sb.n_rep = v;
            }
            if let Some(v) = a.monitoring {
                sb.monitoring = v;
            }
            if let Some(v) = a.seed {
                cfg.mc.seed = v;
            }
        }
    }
    cfg.validate()
}

/// `IFL_WORKERS` wins over `--workers`; `None` keeps rayon's default.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(WORKERS_ENV, format!("expected a positive integer, got {v:?}")))?,
        ),
        Err(_) => flag,
    };
    if n == Some(0) {
        return Err(Error::config("workers", "must be >= 1"));
    }
    Ok(n)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolve_workers(cli.workers)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Io(e.to_string()))?;

    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut out = OutputSet::create(&cfg.output.directory)?;
    let mut counters = run::Counters::new();
    let result = pool.install(|| match &cli.command {
        Command::Bounds => run::bounds(&cfg, &mut out, &mut counters).map(|_| true),
        Command::Moment(_) => run::moment(&cfg, &mut out, &mut counters).map(|_| true),
        Command::Front(_) => run::front(&cfg, &mut out, &mut counters).map(|_| true),
        Command::Smallball(_) => run::small_ball(&cfg, &mut out, &mut counters).map(|_| true),
        Command::Selftest => run::selftest(&cfg, &mut out, &mut counters),
    });
    let passed = match result {
        Ok(p) => p,
        Err(e) => {
            out.discard();
            return Err(e);
        }
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        subcommand: cli.command.name().to_string(),
        seed: cfg.mc.seed,
        config: cfg,
        build: build_id(),
        started_at,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        workers: pool.current_num_threads(),
        outputs: Vec::new(),
        counters,
    };
    let path = out.finish(manifest)?;
    println!("manifest: {}", path.display());
    Ok(if passed { EXIT_OK } else { EXIT_SELFTEST })
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
