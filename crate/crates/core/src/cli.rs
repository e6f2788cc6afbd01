//! Command-line front end: `fit`, `predict`, `cv`, `sweep`, `synth` and
//! `friedman`.
//!
//! Every option can also be given in a flat `key=value` file passed with
//! `--config`; keys are the long flag names without dashes (`sigma-cap`,
//! `sigma_cap` and `SIGMA_CAP` are the same key). Flags override file
//! values, and the effective settings are written next to the outputs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use crate::dataset::{
    format_features, load_dataset_with_classes, load_manifest, make_synthetic, normalize_rows,
    normalize_unit_length, parse_key_values, read_features, read_file, write_file, Dataset,
    SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate_with_plan, friedman_test, parse_accuracy_table, sweep, write_sweep_csv,
    SweepGrid,
};
use crate::graph::build_knn_graph;
use crate::inference::{write_predictions_csv, Predictor};
use crate::labelspace::LabelCodec;
use crate::solver::{alm_fit, SolverConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.txt";
pub const MODEL_FILE: &str = "model.txt";
pub const TRAIN_FEATURES_FILE: &str = "train_features.tsv";
pub const ONEHOT_FILE: &str = "onehot.tsv";
pub const LABELS_FILE: &str = "labels.csv";
pub const FSTAR_FILE: &str = "f_star.tsv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RESULTS_FILE: &str = "results.csv";
pub const BASELINE_FILE: &str = "baseline.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Parser)]
#[command(
    name = "partial-label",
    version,
    about = "Disambiguate candidate label sets and classify by nearest-neighbor voting"
)]
struct Cli {
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Disambiguate a training set and write the model directory.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label new examples with a fitted model.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Neighbor count override (defaults to the training K).
        #[arg(long = "k", alias = "K")]
        k: Option<usize>,
        /// Kernel width override (defaults to the training theta).
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Stratified five-fold cross validation.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross validation over a grid of alpha, beta and K.
    Sweep {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic ambiguous dataset.
    Synth {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        sep: Option<f64>,
        /// Probability of adding false candidates to an example.
        #[arg(long)]
        p: Option<f64>,
        /// Number of false candidates per corrupted example.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Friedman rank test over a methods x datasets accuracy table.
    Friedman {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// key=value manifest naming the data files (replaces the three paths).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Declared class count.
    #[arg(long)]
    classes: Option<usize>,
    /// Scale feature rows to unit length before training.
    #[arg(long)]
    normalize: bool,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "k", alias = "K")]
    k: Option<usize>,
    /// Kernel width, or "auto" for the mean K-nearest-neighbor distance.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    sigma_cap: Option<f64>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    loop_max: Option<usize>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    gd_max_iters: Option<usize>,
    #[arg(long)]
    gd_grad_tol: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    armijo_c: Option<f64>,
    #[arg(long)]
    backtrack_factor: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Run folds serially.
    #[arg(long)]
    deterministic: bool,
}

/// Merged settings: config-file values overlaid by command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let map = parse_key_values(&text, &path.display().to_string())?;
        Ok(Self {
            values: map
                .into_iter()
                .map(|(k, v)| (normalize_key(&k), v))
                .collect(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(normalize_key(key), value.to_string());
    }

    fn set_opt<T: ToString>(&mut self, key: &str, value: &Option<T>) {
        if let Some(v) = value {
            self.set(key, v.to_string());
        }
    }

    fn set_path(&mut self, key: &str, value: &Option<PathBuf>) {
        if let Some(v) = value {
            self.set(key, v.display());
        }
    }

    fn set_flag(&mut self, key: &str, on: bool) {
        if on {
            self.set(key, true);
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("invalid value for {key}: {v:?}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Like [`Settings::get`], treating the literal `auto` as unset.
    pub fn get_auto<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            Some(v) if v.eq_ignore_ascii_case("auto") => Ok(None),
            _ => self.get(key),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key)
            .ok_or_else(|| Error::Config(format!("missing required option --{key}")))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(Error::Config(format!("invalid boolean for {key}: {v:?}"))),
            },
        }
    }
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_path("features", &self.features);
        s.set_path("candidates", &self.candidates);
        s.set_path("truth", &self.truth);
        s.set_path("manifest", &self.manifest);
        s.set_opt("classes", &self.classes);
        s.set_flag("normalize", self.normalize);
    }
}

impl SolverArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("alpha", &self.alpha);
        s.set_opt("beta", &self.beta);
        s.set_opt("k", &self.k);
        s.set_opt("theta", &self.theta);
        s.set_opt("rho", &self.rho);
        s.set_opt("sigma0", &self.sigma0);
        s.set_opt("sigma-cap", &self.sigma_cap);
        s.set_opt("t-max", &self.t_max);
        s.set_opt("eps0", &self.eps0);
        s.set_opt("loop-max", &self.loop_max);
        s.set_opt("eps1", &self.eps1);
        s.set_opt("gd-max-iters", &self.gd_max_iters);
        s.set_opt("gd-grad-tol", &self.gd_grad_tol);
        s.set_opt("tau0", &self.tau0);
        s.set_opt("armijo-c", &self.armijo_c);
        s.set_opt("backtrack-factor", &self.backtrack_factor);
    }
}

impl RunArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("seed", &self.seed);
        s.set_flag("deterministic", self.deterministic);
    }
}

/// Where a command reads its training data from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Manifest(PathBuf),
    Files {
        features: PathBuf,
        candidates: PathBuf,
        truth: Option<PathBuf>,
        classes: Option<usize>,
    },
}

impl DataSource {
    fn from_settings(s: &Settings) -> Result<Self> {
        if let Some(m) = s.path("manifest") {
            return Ok(DataSource::Manifest(m));
        }
        Ok(DataSource::Files {
            features: s.require_path("features")?,
            candidates: s.require_path("candidates")?,
            truth: s.path("truth"),
            classes: s.get("classes")?,
        })
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Manifest(m) => load_manifest(m),
            DataSource::Files {
                features,
                candidates,
                truth,
                classes,
            } => load_dataset_with_classes(features, candidates, truth.as_deref(), *classes),
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            DataSource::Manifest(m) => {
                let _ = writeln!(out, "manifest={}", m.display());
            }
            DataSource::Files {
                features,
                candidates,
                truth,
                classes,
            } => {
                let _ = writeln!(out, "features={}", features.display());
                let _ = writeln!(out, "candidates={}", candidates.display());
                if let Some(t) = truth {
                    let _ = writeln!(out, "truth={}", t.display());
                }
                if let Some(c) = classes {
                    let _ = writeln!(out, "classes={c}");
                }
            }
        }
    }
}

pub fn solver_config_from(s: &Settings) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        alpha: s.get_or("alpha", d.alpha)?,
        beta: s.get_or("beta", d.beta)?,
        k: s.get_or("k", d.k)?,
        theta: s.get_or("theta", d.theta)?,
        rho: s.get_or("rho", d.rho)?,
        sigma0: s.get_or("sigma0", d.sigma0)?,
        sigma_cap: s.get_or("sigma-cap", d.sigma_cap)?,
        t_max: s.get_or("t-max", d.t_max)?,
        eps0: s.get_or("eps0", d.eps0)?,
        loop_max: s.get_or("loop-max", d.loop_max)?,
        eps1: s.get_or("eps1", d.eps1)?,
        gd_max_iters: s.get_or("gd-max-iters", d.gd_max_iters)?,
        gd_grad_tol: s.get_auto("gd-grad-tol")?,
        tau0: s.get_auto("tau0")?,
        armijo_c: s.get_or("armijo-c", d.armijo_c)?,
        backtrack_factor: s.get_or("backtrack-factor", d.backtrack_factor)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `key=value` lines for every solver setting.
pub fn render_solver_config(cfg: &SolverConfig) -> String {
    let mut out = String::new();
    let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
    let _ = writeln!(out, "alpha={}", cfg.alpha);
    let _ = writeln!(out, "beta={}", cfg.beta);
    let _ = writeln!(out, "k={}", cfg.k);
    let _ = writeln!(out, "theta={}", cfg.theta);
    let _ = writeln!(out, "rho={}", cfg.rho);
    let _ = writeln!(out, "sigma0={}", cfg.sigma0);
    let _ = writeln!(out, "sigma-cap={}", cfg.sigma_cap);
    let _ = writeln!(out, "t-max={}", cfg.t_max);
    let _ = writeln!(out, "eps0={}", cfg.eps0);
    let _ = writeln!(out, "loop-max={}", cfg.loop_max);
    let _ = writeln!(out, "eps1={}", cfg.eps1);
    let _ = writeln!(out, "gd-max-iters={}", cfg.gd_max_iters);
    let _ = writeln!(out, "gd-grad-tol={}", opt(cfg.gd_grad_tol));
    let _ = writeln!(out, "tau0={}", opt(cfg.tau0));
    let _ = writeln!(out, "armijo-c={}", cfg.armijo_c);
    let _ = writeln!(out, "backtrack-factor={}", cfg.backtrack_factor);
    out
}

/// Fully resolved command.
#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Fit {
        data: DataSource,
        solver: SolverConfig,
        normalize: bool,
        out: PathBuf,
    },
    Predict {
        model: PathBuf,
        features: PathBuf,
        out: PathBuf,
        k: Option<usize>,
        theta: Option<f64>,
    },
    Cv {
        data: DataSource,
        solver: SolverConfig,
        normalize: bool,
        seed: u64,
        deterministic: bool,
        out: PathBuf,
    },
    Sweep {
        grid: PathBuf,
        data: DataSource,
        solver: SolverConfig,
        normalize: bool,
        seed: u64,
        deterministic: bool,
        out: PathBuf,
    },
    Synth {
        spec: SyntheticSpec,
        out: PathBuf,
    },
    Friedman {
        table: PathBuf,
        confidence: f64,
        out: Option<PathBuf>,
    },
}

impl RunConfig {
    /// Parses command-line arguments (program name first) and merges any
    /// `--config` file.
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
        let mut s = match &cli.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(Self::resolve(cli.command, &mut s)?)
    }

    fn resolve(command: Command, s: &mut Settings) -> Result<Self> {
        Ok(match command {
            Command::Fit { data, solver, out } => {
                data.apply(s);
                solver.apply(s);
                s.set_path("out", &out);
                RunConfig::Fit {
                    data: DataSource::from_settings(s)?,
                    solver: solver_config_from(s)?,
                    normalize: s.flag("normalize")?,
                    out: s.require_path("out")?,
                }
            }
            Command::Predict {
                model,
                features,
                out,
                k,
                theta,
            } => {
                s.set_path("model", &model);
                s.set_path("features", &features);
                s.set_path("out", &out);
                s.set_opt("k", &k);
                s.set_opt("theta", &theta);
                RunConfig::Predict {
                    model: s.require_path("model")?,
                    features: s.require_path("features")?,
                    out: s.require_path("out")?,
                    k: s.get("k")?,
                    theta: s.get("theta")?,
                }
            }
            Command::Cv {
                data,
                solver,
                run,
                out,
            } => {
                data.apply(s);
                solver.apply(s);
                run.apply(s);
                s.set_path("out", &out);
                RunConfig::Cv {
                    data: DataSource::from_settings(s)?,
                    solver: solver_config_from(s)?,
                    normalize: s.flag("normalize")?,
                    seed: s.get_or("seed", 0)?,
                    deterministic: s.flag("deterministic")?,
                    out: s.require_path("out")?,
                }
            }
            Command::Sweep {
                grid,
                data,
                solver,
                run,
                out,
            } => {
                data.apply(s);
                solver.apply(s);
                run.apply(s);
                s.set_path("grid", &grid);
                s.set_path("out", &out);
                RunConfig::Sweep {
                    grid: s.require_path("grid")?,
                    data: DataSource::from_settings(s)?,
                    solver: solver_config_from(s)?,
                    normalize: s.flag("normalize")?,
                    seed: s.get_or("seed", 0)?,
                    deterministic: s.flag("deterministic")?,
                    out: s.require_path("out")?,
                }
            }
            Command::Synth {
                n,
                c,
                d,
                sep,
                p,
                r,
                seed,
                out,
            } => {
                s.set_opt("n", &n);
                s.set_opt("c", &c);
                s.set_opt("d", &d);
                s.set_opt("sep", &sep);
                s.set_opt("p", &p);
                s.set_opt("r", &r);
                s.set_opt("seed", &seed);
                s.set_path("out", &out);
                let def = SyntheticSpec::default();
                RunConfig::Synth {
                    spec: SyntheticSpec {
                        n: s.get_or("n", def.n)?,
                        c: s.get_or("c", def.c)?,
                        d: s.get_or("d", def.d)?,
                        sep: s.get_or("sep", def.sep)?,
                        p_coocc: s.get_or("p", def.p_coocc)?,
                        r_extra: s.get_or("r", def.r_extra)?,
                        seed: s.get_or("seed", def.seed)?,
                    },
                    out: s.require_path("out")?,
                }
            }
            Command::Friedman {
                table,
                confidence,
                out,
            } => {
                s.set_path("table", &table);
                s.set_opt("confidence", &confidence);
                s.set_path("out", &out);
                RunConfig::Friedman {
                    table: s.require_path("table")?,
                    confidence: s.get_or("confidence", 0.90)?,
                    out: s.path("out"),
                }
            }
        })
    }

    /// The effective settings as `key=value` text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        match self {
            RunConfig::Fit {
                data,
                solver,
                normalize,
                out: dir,
            } => {
                line("command", "fit".into());
                line("out", dir.display().to_string());
                line("normalize", normalize.to_string());
                let mut s = String::new();
                data.render(&mut s);
                out.push_str(&s);
                out.push_str(&render_solver_config(solver));
            }
            RunConfig::Predict {
                model,
                features,
                out: file,
                k,
                theta,
            } => {
                line("command", "predict".into());
                line("model", model.display().to_string());
                line("features", features.display().to_string());
                line("out", file.display().to_string());
                if let Some(k) = k {
                    line("k", k.to_string());
                }
                if let Some(t) = theta {
                    line("theta", t.to_string());
                }
            }
            RunConfig::Cv {
                data,
                solver,
                normalize,
                seed,
                deterministic,
                out: dir,
            } => {
                line("command", "cv".into());
                line("out", dir.display().to_string());
                line("normalize", normalize.to_string());
                line("seed", seed.to_string());
                line("deterministic", deterministic.to_string());
                let mut s = String::new();
                data.render(&mut s);
                out.push_str(&s);
                out.push_str(&render_solver_config(solver));
            }
            RunConfig::Sweep {
                grid,
                data,
                solver,
                normalize,
                seed,
                deterministic,
                out: dir,
            } => {
                line("command", "sweep".into());
                line("grid", grid.display().to_string());
                line("out", dir.display().to_string());
                line("normalize", normalize.to_string());
                line("seed", seed.to_string());
                line("deterministic", deterministic.to_string());
                let mut s = String::new();
                data.render(&mut s);
                out.push_str(&s);
                out.push_str(&render_solver_config(solver));
            }
            RunConfig::Synth { spec, out: dir } => {
                line("command", "synth".into());
                line("out", dir.display().to_string());
                line("n", spec.n.to_string());
                line("c", spec.c.to_string());
                line("d", spec.d.to_string());
                line("sep", spec.sep.to_string());
                line("p", spec.p_coocc.to_string());
                line("r", spec.r_extra.to_string());
                line("seed", spec.seed.to_string());
            }
            RunConfig::Friedman {
                table,
                confidence,
                out: file,
            } => {
                line("command", "friedman".into());
                line("table", table.display().to_string());
                line("confidence", confidence.to_string());
                if let Some(f) = file {
                    line("out", f.display().to_string());
                }
            }
        }
        out
    }
}

/// Failure of a CLI run: argument parsing or execution.
#[derive(Debug)]
pub enum CliError {
    Clap(clap::Error),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) => EXIT_USAGE,
            CliError::Run(e) => exit_code(e),
        }
    }

    /// Single line: `error kind=<kind> code=<code> message="<text>"`.
    pub fn machine_line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Clap(e) => (
                "usage",
                e.to_string().lines().next().unwrap_or_default().to_string(),
            ),
            CliError::Run(e) => (e.kind(), e.to_string()),
        };
        let msg = msg
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', " ");
        format!(
            "error kind={kind} code={} message=\"{msg}\"",
            self.exit_code()
        )
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidTheta(_)
        | Error::KOutOfRange { .. } => EXIT_USAGE,
        Error::NonFinite { .. } | Error::EmptyGraph => EXIT_SOLVER,
        Error::Fold { source, .. } => exit_code(source),
        _ => EXIT_DATA,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
/// Errors are reported on stderr as one machine-readable line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = RunConfig::from_args(args).and_then(|cfg| execute(&cfg).map_err(CliError::Run));
    match outcome {
        Ok(()) => 0,
        Err(CliError::Clap(e)) if !e.use_stderr() => {
            let _ = e.print();
            0
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create_file(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn load_training(data: &DataSource, normalize: bool) -> Result<Dataset> {
    let ds = data.load()?;
    if normalize {
        normalize_unit_length(&ds)
    } else {
        Ok(ds)
    }
}

fn format_matrix(m: &Array2<f64>) -> String {
    format_features(m)
}

/// Executes a resolved command.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    match cfg {
        RunConfig::Fit {
            data,
            solver,
            normalize,
            out,
        } => {
            let ds = load_training(data, *normalize)?;
            let graph = build_knn_graph(&ds, solver.k, solver.theta)?;
            let codec = LabelCodec::encode(&ds);
            let report = alm_fit(&graph, &codec, solver)?;

            create_dir(out)?;
            write_file(&out.join(EFFECTIVE_CONFIG_FILE), &cfg.render())?;
            write_with(&out.join(LABELS_FILE), |w| {
                writeln!(w, "index,label")?;
                for (i, y) in report.labels.iter().enumerate() {
                    writeln!(w, "{},{}", i + 1, y + 1)?;
                }
                Ok(())
            })?;
            write_file(&out.join(ONEHOT_FILE), &format_matrix(&report.onehot))?;
            write_file(&out.join(FSTAR_FILE), &format_matrix(&report.f_star))?;
            write_with(&out.join(TRACE_FILE), |w| report.write_trace_csv(w))?;
            write_file(
                &out.join(TRAIN_FEATURES_FILE),
                &format_features(ds.features()),
            )?;
            let model = format!(
                "k={}\ntheta={}\nclasses={}\nnormalize={}\nfeatures={TRAIN_FEATURES_FILE}\nonehot={ONEHOT_FILE}\nconverged={}\nloops={}\n",
                solver.k,
                graph.theta(),
                ds.c(),
                normalize,
                report.converged,
                report.loops_used
            );
            write_file(&out.join(MODEL_FILE), &model)?;
            if let Some(truth) = ds.truth() {
                let acc = crate::evaluation::accuracy(&report.labels, truth)?;
                log::info!("training accuracy {acc}");
            }
            Ok(())
        }
        RunConfig::Predict {
            model,
            features,
            out,
            k,
            theta,
        } => {
            let model_file = model.join(MODEL_FILE);
            let kv = parse_key_values(&read_file(&model_file)?, &model_file.display().to_string())?;
            let field = |key: &str| -> Result<&String> {
                kv.get(key).ok_or_else(|| {
                    Error::Config(format!("{}: missing {key}", model_file.display()))
                })
            };
            let parse_err =
                |key: &str| Error::Config(format!("{}: invalid {key}", model_file.display()));
            let train_k: usize = field("k")?.parse().map_err(|_| parse_err("k"))?;
            let train_theta: f64 = field("theta")?.parse().map_err(|_| parse_err("theta"))?;
            let normalize: bool = field("normalize")?
                .parse()
                .map_err(|_| parse_err("normalize"))?;
            let train = read_features(&model.join(field("features")?))?;
            let onehot = read_features(&model.join(field("onehot")?))?;

            let mut xs = read_features(features)?;
            if normalize {
                normalize_rows(&mut xs)?;
            }
            let predictor = Predictor::new(
                train,
                onehot,
                k.unwrap_or(train_k),
                theta.unwrap_or(train_theta),
            )?;
            let preds = predictor.predict_batch(&xs)?;
            write_with(out, |w| {
                write_predictions_csv(&preds, predictor.classes(), w)
            })?;
            let mut echo = out.clone().into_os_string();
            echo.push(".config.txt");
            write_file(Path::new(&echo), &cfg.render())
        }
        RunConfig::Cv {
            data,
            solver,
            normalize,
            seed,
            deterministic,
            out,
        } => {
            let ds = load_training(data, *normalize)?;
            let plan = crate::dataset::plan_splits(&ds, *seed)?;
            let result = cross_validate_with_plan(&ds, solver, &plan, !deterministic)?;
            create_dir(out)?;
            write_file(&out.join(EFFECTIVE_CONFIG_FILE), &cfg.render())?;
            write_with(&out.join(RESULTS_FILE), |w| result.write_csv(w))?;
            write_with(&out.join(BASELINE_FILE), |w| result.write_baseline_csv(w))?;
            let summary = format!(
                "mean_train={}\nstd_train={}\nmean_test={}\nstd_test={}\nmean_baseline_test={}\n",
                result.mean_train,
                result.std_train,
                result.mean_test,
                result.std_test,
                result.mean_baseline_test
            );
            write_file(&out.join(SUMMARY_FILE), &summary)
        }
        RunConfig::Sweep {
            grid,
            data,
            solver,
            normalize,
            seed,
            deterministic,
            out,
        } => {
            let ds = load_training(data, *normalize)?;
            let grid = SweepGrid::parse(&read_file(grid)?, solver)?;
            let rows = sweep(&ds, solver, &grid, *seed, !deterministic)?;
            create_dir(out)?;
            write_file(&out.join(EFFECTIVE_CONFIG_FILE), &cfg.render())?;
            write_with(&out.join(SWEEP_FILE), |w| write_sweep_csv(&rows, w))
        }
        RunConfig::Synth { spec, out } => {
            let ds = make_synthetic(spec)?;
            ds.save(out)?;
            write_file(&out.join(EFFECTIVE_CONFIG_FILE), &cfg.render())
        }
        RunConfig::Friedman {
            table,
            confidence,
            out,
        } => {
            let (names, values) = parse_accuracy_table(&read_file(table)?)?;
            let result = friedman_test(&values, *confidence)?;
            let mut report = format!(
                "statistic={}\ndf={}\ncritical={}\nreject={}\n",
                result.statistic, result.df, result.critical_value, result.reject
            );
            report.push_str("method,mean_rank,pairwise_statistic,reject\n");
            for (m, name) in names.iter().enumerate() {
                let stat = result.pairwise[m].map_or(String::new(), |p| p.statistic.to_string());
                let _ = writeln!(
                    report,
                    "{name},{},{stat},{}",
                    result.mean_ranks[m], result.reject_per_method[m]
                );
            }
            print!("{report}");
            if let Some(path) = out {
                write_file(path, &report)?;
            }
            Ok(())
        }
    }
}
