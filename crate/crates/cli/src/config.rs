//! Command-line and config-file handling.
//!
//! Every long flag can also be given as a `key=value` line in a config
//! file (repeatable flags repeat the key); explicit command-line flags win
//! over file values.

use clap::Parser;
use mgd_solver::krylov::GmresParams;
use mgd_solver::mgdgen::Preset;
use mgd_solver::precond::{parse_precond_name, PrecondConfig, PrecondKind};
use mgd_solver::{Error, Result};
use std::path::PathBuf;

#[derive(Parser, Debug, Default)]
#[command(
    name = "mgd-bench",
    about = "Benchmark block-preconditioned GMRES(m) on synthetic multi-group radiation diffusion systems",
    disable_help_flag = false
)]
pub struct Cli {
    /// Problem preset: smooth | layered | stiff
    #[arg(long)]
    pub preset: Option<String>,

    /// Grid as NXxNY, e.g. 64x24
    #[arg(long)]
    pub grid: Option<String>,

    /// Number of radiation energy groups
    #[arg(long)]
    pub groups: Option<usize>,

    /// Generator seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Load the problem from a block-system manifest instead of a preset
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Preconditioner to run (repeatable):
    /// none | amg | pctl | schur1 | schur2 | apctl | aschur1 | aschur2
    #[arg(long = "precond")]
    pub precond: Vec<String>,

    /// GMRES restart length m
    #[arg(long)]
    pub restart: Option<usize>,

    /// Relative residual stopping tolerance
    #[arg(long)]
    pub tol: Option<f64>,

    /// Maximum GMRES iterations
    #[arg(long)]
    pub maxit: Option<usize>,

    /// Weak diagonal dominance threshold
    #[arg(long = "theta-wd")]
    pub theta_wd: Option<f64>,

    /// Weak coupling threshold
    #[arg(long = "theta-wc")]
    pub theta_wc: Option<f64>,

    /// Adaptive switch criterion on the weak coupling factor
    #[arg(long = "sigma-wc")]
    pub sigma_wc: Option<f64>,

    /// Tolerance for inner V-cycle solves driven to accuracy
    #[arg(long = "inner-tol")]
    pub inner_tol: Option<f64>,

    /// Fixed sweeps for radiation-group inner solves
    #[arg(long = "sweeps-radiation")]
    pub sweeps_radiation: Option<usize>,

    /// Fixed sweeps for electron/ion inner solves
    #[arg(long = "sweeps-ei")]
    pub sweeps_ei: Option<usize>,

    /// CSV report path
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Run a verification suite instead of benchmarking:
    /// oracle | counters | invariants
    #[arg(long)]
    pub verify: Option<String>,

    /// Print per-solve progress and hierarchy summaries
    #[arg(long)]
    pub verbose: bool,

    /// Run independent (problem, preconditioner) pairs concurrently
    #[arg(long)]
    pub parallel: bool,

    /// Write zeros in the CSV timing columns (byte-reproducible reports)
    #[arg(long = "no-timings")]
    pub no_timings: bool,

    /// Read defaults from a key=value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum ProblemSource {
    Preset {
        preset: Preset,
        nx: usize,
        ny: usize,
        groups: usize,
        seed: u64,
    },
    Manifest(PathBuf),
}

impl ProblemSource {
    pub fn name(&self) -> String {
        match self {
            ProblemSource::Preset {
                preset,
                nx,
                ny,
                groups,
                seed,
            } => format!("{preset}-{nx}x{ny}-g{groups}-s{seed}"),
            ProblemSource::Manifest(p) => p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("manifest")
                .to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problem: ProblemSource,
    pub precond_names: Vec<String>,
    pub gmres: GmresParams,
    /// template carrying indicators, sweeps and inner tolerances; the
    /// kind/adaptive fields are overridden per preconditioner name
    pub base: PrecondConfig,
    pub output: PathBuf,
    pub verbose: bool,
    pub parallel: bool,
    pub no_timings: bool,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidParam(format!("grid must look like 64x24, got {s}")))?;
    let nx = a
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad grid dimension {a}")))?;
    let ny = b
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad grid dimension {b}")))?;
    Ok((nx, ny))
}

impl Cli {
    /// Folds config-file values under explicit flags.
    pub fn merge_config_file(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)?;
        for (lineno, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "{}:{}: expected key=value, got {t}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Parse(format!("{}: bad {what}: {v}", path.display()));
            match k {
                "preset" => {
                    self.preset.get_or_insert_with(|| v.to_string());
                }
                "grid" => {
                    self.grid.get_or_insert_with(|| v.to_string());
                }
                "groups" => {
                    self.groups
                        .get_or_insert(v.parse().map_err(|_| bad("groups"))?);
                }
                "seed" => {
                    self.seed.get_or_insert(v.parse().map_err(|_| bad("seed"))?);
                }
                "manifest" => {
                    self.manifest.get_or_insert_with(|| PathBuf::from(v));
                }
                "precond" => {
                    self.precond.push(v.to_string());
                }
                "restart" => {
                    self.restart
                        .get_or_insert(v.parse().map_err(|_| bad("restart"))?);
                }
                "tol" => {
                    self.tol.get_or_insert(v.parse().map_err(|_| bad("tol"))?);
                }
                "maxit" => {
                    self.maxit
                        .get_or_insert(v.parse().map_err(|_| bad("maxit"))?);
                }
                "theta-wd" => {
                    self.theta_wd
                        .get_or_insert(v.parse().map_err(|_| bad("theta-wd"))?);
                }
                "theta-wc" => {
                    self.theta_wc
                        .get_or_insert(v.parse().map_err(|_| bad("theta-wc"))?);
                }
                "sigma-wc" => {
                    self.sigma_wc
                        .get_or_insert(v.parse().map_err(|_| bad("sigma-wc"))?);
                }
                "inner-tol" => {
                    self.inner_tol
                        .get_or_insert(v.parse().map_err(|_| bad("inner-tol"))?);
                }
                "sweeps-radiation" => {
                    self.sweeps_radiation
                        .get_or_insert(v.parse().map_err(|_| bad("sweeps-radiation"))?);
                }
                "sweeps-ei" => {
                    self.sweeps_ei
                        .get_or_insert(v.parse().map_err(|_| bad("sweeps-ei"))?);
                }
                "output" => {
                    self.output.get_or_insert_with(|| PathBuf::from(v));
                }
                "verbose" => {
                    self.verbose |= v.parse::<bool>().map_err(|_| bad("verbose"))?;
                }
                "parallel" => {
                    self.parallel |= v.parse::<bool>().map_err(|_| bad("parallel"))?;
                }
                "no-timings" => {
                    self.no_timings |= v.parse::<bool>().map_err(|_| bad("no-timings"))?;
                }
                other => {
                    return Err(Error::Parse(format!(
                        "{}: unknown config key {other}",
                        path.display()
                    )))
                }
            }
        }
        Ok(self)
    }

    /// Validates and assembles the benchmark configuration.
    pub fn into_bench_config(self) -> Result<BenchConfig> {
        let problem = match (&self.manifest, &self.preset) {
            (Some(path), _) => ProblemSource::Manifest(path.clone()),
            (None, Some(p)) => {
                let preset: Preset = p.parse()?;
                let (nx, ny) = parse_grid(self.grid.as_deref().unwrap_or("16x16"))?;
                ProblemSource::Preset {
                    preset,
                    nx,
                    ny,
                    groups: self.groups.unwrap_or(1),
                    seed: self.seed.unwrap_or(42),
                }
            }
            (None, None) => {
                return Err(Error::InvalidParam(
                    "no problem given: pass --preset or --manifest".into(),
                ))
            }
        };

        if self.precond.is_empty() {
            return Err(Error::InvalidParam(
                "no preconditioner given: pass --precond at least once".into(),
            ));
        }
        for name in &self.precond {
            parse_precond_name(name)?;
        }

        let gmres = GmresParams {
            restart: self.restart.unwrap_or(30),
            rel_tol: self.tol.unwrap_or(1e-7),
            max_iters: self.maxit.unwrap_or(1000),
        };
        gmres.validate()?;

        let mut base = PrecondConfig::with_kind(PrecondKind::AmgMono, false);
        if let Some(v) = self.theta_wd {
            base.indicators.theta_wd = v;
        }
        if let Some(v) = self.theta_wc {
            base.indicators.theta_wc = v;
        }
        if let Some(v) = self.sigma_wc {
            base.indicators.sigma_wc = v;
        }
        if let Some(v) = self.inner_tol {
            base.inner_tol = v;
        }
        if let Some(v) = self.sweeps_radiation {
            base.sweeps_radiation = v;
        }
        if let Some(v) = self.sweeps_ei {
            base.sweeps_ei = v;
        }
        base.validate()?;

        Ok(BenchConfig {
            problem,
            precond_names: self.precond,
            gmres,
            base,
            output: self.output.unwrap_or_else(|| PathBuf::from("bench.csv")),
            verbose: self.verbose,
            parallel: self.parallel,
            no_timings: self.no_timings,
        })
    }
}
