use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use weakval_core::fock::{DEFAULT_HARD_CAP, DEFAULT_TAIL_TOL};
use weakval_core::observables::GridSpec;

use crate::CliError;

pub const HARD_CAP_ENV: &str = "WEAKVAL_HARD_CAP";

/// Conditional signal-field statistics after inefficient idler detection.
#[derive(Debug, Parser)]
#[command(name = "weakval", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadrature distribution P(x), numeric and closed form.
    Quadrature(CommonArgs),
    /// Photon-number distribution P(n), numeric and closed form.
    Photons(CommonArgs),
    /// Mandel Q against detector efficiency.
    Mandel(CommonArgs),
    /// Wigner function on a phase-space rectangle.
    Wigner(CommonArgs),
    /// Closed forms against the two-mode oracle over a parameter sweep.
    Verify(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Quadrature(a)
            | Command::Photons(a)
            | Command::Mandel(a)
            | Command::Wigner(a)
            | Command::Verify(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Coherent input amplitude (repeatable for `verify`).
    #[arg(long)]
    pub alpha: Vec<f64>,
    /// Amplifier gain parameter (repeatable for `verify`).
    #[arg(long)]
    pub r: Vec<f64>,
    /// Detector efficiency; repeat for a sweep.
    #[arg(long)]
    pub eta: Vec<f64>,
    /// Detected idler photon count.
    #[arg(long)]
    pub ndet: Option<usize>,
    /// Fock cutoff; chosen from --tail-tol when absent.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Largest neglected probability mass.
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// Grid as min:max:step (x for quadrature, Re γ for wigner).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Im γ grid for wigner, as min:max:step.
    #[arg(long, allow_hyphen_values = true)]
    pub im_grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<OneOrMany>,
    r: Option<OneOrMany>,
    eta: Option<OneOrMany>,
    ndet: Option<usize>,
    nmax: Option<usize>,
    tail_tol: Option<f64>,
    grid: Option<String>,
    im_grid: Option<String>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Flags merged over the config file, with defaults still unresolved where a
/// command supplies its own.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alphas: Option<Vec<f64>>,
    pub rs: Option<Vec<f64>>,
    pub etas: Option<Vec<f64>>,
    pub n_det: usize,
    pub n_max: Option<usize>,
    pub tail_tol: f64,
    pub hard_cap: usize,
    pub grid: Option<GridSpec<f64>>,
    pub im_grid: Option<GridSpec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn nonempty(v: &[f64]) -> Option<Vec<f64>> {
    (!v.is_empty()).then(|| v.to_vec())
}

pub fn parse_grid(text: &str) -> Result<GridSpec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = match parts[..] {
        [a, b, c] => [a, b, c].map(|s| s.trim().parse::<f64>()),
        _ => return Err(CliError::config(format!("grid must be min:max:step, got {text:?}"))),
    };
    match nums {
        [Ok(min), Ok(max), Ok(step)] => GridSpec::new(min, max, step).map_err(CliError::from),
        _ => Err(CliError::config(format!("grid must be min:max:step, got {text:?}"))),
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        let msg = e.to_string().replace('\n', " ");
        CliError::config(format!("invalid config {}: {}", path.display(), msg.trim()))
    })
}

fn hard_cap_from_env(value: Option<String>) -> Result<usize, CliError> {
    match value {
        None => Ok(DEFAULT_HARD_CAP),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(format!("{HARD_CAP_ENV} must be a positive integer, got {v:?}"))),
    }
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let grid_text = args.grid.clone().or(file.grid);
        let im_text = args.im_grid.clone().or(file.im_grid);
        let tail_tol = args.tail_tol.or(file.tail_tol).unwrap_or(DEFAULT_TAIL_TOL);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(CliError::config(format!("tail-tol must lie in (0, 1), got {tail_tol}")));
        }
        Ok(Self {
            alphas: nonempty(&args.alpha).or(file.alpha.map(OneOrMany::into_vec)),
            rs: nonempty(&args.r).or(file.r.map(OneOrMany::into_vec)),
            etas: nonempty(&args.eta).or(file.eta.map(OneOrMany::into_vec)),
            n_det: args.ndet.or(file.ndet).unwrap_or(0),
            n_max: args.nmax.or(file.nmax),
            tail_tol,
            hard_cap: hard_cap_from_env(std::env::var(HARD_CAP_ENV).ok())?,
            grid: grid_text.as_deref().map(parse_grid).transpose()?,
            im_grid: im_text.as_deref().map(parse_grid).transpose()?,
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
        })
    }

    /// The single value of a scalar parameter, or its default.
    pub fn single(values: &Option<Vec<f64>>, name: &str, default: f64) -> Result<f64, CliError> {
        match values.as_deref() {
            None => Ok(default),
            Some([v]) => Ok(*v),
            Some(_) => Err(CliError::config(format!("--{name} takes one value for this command"))),
        }
    }
}
