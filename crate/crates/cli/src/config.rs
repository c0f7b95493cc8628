//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use hls_core::{GridSpec, HlsParams};
use serde::Deserialize;

use crate::error::CliError;

/// Every key accepted in a config file. Flags use the same names with
/// dashes (`grid_rho` ↔ `--grid-rho`).
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Heisenberg dimension parameter (ℍⁿ, Q = 2n + 2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Operator exponent; q is derived from it.
    #[arg(long, conflicts_with_all = ["r", "s"])]
    pub p: Option<f64>,
    /// Bilinear exponents (give both, or neither for the diagonal case).
    #[arg(long, requires = "s")]
    pub r: Option<f64>,
    #[arg(long, requires = "r")]
    pub s: Option<f64>,
    /// Euclidean dimension for the Lieb constants (default 2n + 1).
    #[arg(long)]
    pub dim: Option<usize>,

    /// Number of ρ nodes.
    #[arg(long)]
    pub grid_rho: Option<usize>,
    /// Number of t nodes.
    #[arg(long)]
    pub grid_t: Option<usize>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Monte Carlo samples (enables the Monte Carlo cross-check).
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, also the number of Monte Carlo streams.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file for the JSON document (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// `evaluate`: h, ball, gaussian or zero.
    #[arg(long)]
    pub preset: Option<String>,
    /// `evaluate`: grid function file (JSON) instead of a preset.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `evaluate`: number of grid refinements in the ladder.
    #[arg(long)]
    pub refine: Option<usize>,
    /// `evaluate`: CSV file for the refinement ladder.
    #[arg(long)]
    pub ladder_csv: Option<PathBuf>,

    /// `maximize`: perturbed-h, h or gaussian.
    #[arg(long)]
    pub init: Option<String>,
    /// `maximize`: amplitude of the perturbed-h initialisation.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// `maximize`: dilation applied to the initial profile.
    #[arg(long)]
    pub dilate: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    /// `maximize`: CSV file for the convergence trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// `classify`: spread, translate or split.
    #[arg(long)]
    pub generator: Option<String>,
    /// `classify`: mass of the split generator's concentrated piece.
    #[arg(long)]
    pub k: Option<f64>,
    /// `classify`: sequence length for generators.
    #[arg(long)]
    pub length: Option<usize>,
    /// `classify`: measure files (JSON), in sequence order.
    #[arg(long, num_args = 1..)]
    pub measures: Option<Vec<PathBuf>>,
    /// `classify`: rescale measure files to unit mass.
    #[arg(long)]
    #[serde(default)]
    pub normalize: bool,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,

    /// TOML config file; flags take precedence over its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        RunConfig {
            $($field: $flags.$field.or($file.$field),)*
            normalize: $flags.normalize || $file.normalize,
            config: $flags.config,
        }
    };
}

impl RunConfig {
    /// Reads `--config` if given and fills every unset flag from it.
    pub fn resolve(self) -> Result<Self, CliError> {
        let file = match &self.config {
            Some(path) => Self::from_file(path)?,
            None => return Ok(self),
        };
        let flags = self;
        Ok(overlay!(flags, file;
            n, lambda, p, r, s, dim, grid_rho, grid_t, rho_min, rho_max, t_max, samples, seed, workers, out,
            preset, input, refine, ladder_csv, init, amplitude, dilate, max_iter, rtol, trace, generator, k,
            length, measures, eps, radii))
    }

    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(1)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(2.0)
    }

    /// Exponents from `--p`, from `--r/--s`, or the diagonal choice.
    pub fn params(&self) -> Result<HlsParams, CliError> {
        let (n, lambda) = (self.n(), self.lambda());
        if n == 0 {
            return Err(CliError::Validation("n must be positive".into()));
        }
        let params = match (self.p, self.r, self.s) {
            (Some(p), _, _) => HlsParams::derive(n, lambda, p)?,
            (None, Some(r), Some(s)) => {
                let hp = HlsParams::derive(n, lambda, s)?;
                if (hp.r - r).abs() > hls_core::constants::ADMISSIBILITY_TOL * r.abs().max(1.0) {
                    return Err(CliError::Validation(format!(
                        "r={r}, s={s} violate 1/r + 1/s + lambda/Q = 2 (expected r={})",
                        hp.r
                    )));
                }
                hp
            }
            _ => HlsParams::diagonal(n, lambda)?,
        };
        Ok(params)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        let d = GridSpec::default();
        let spec = GridSpec {
            n_rho: self.grid_rho.unwrap_or(d.n_rho),
            rho_min: self.rho_min.unwrap_or(d.rho_min),
            rho_max: self.rho_max.unwrap_or(d.rho_max),
            n_t: self.grid_t.unwrap_or(d.n_t),
            t_max: self.t_max.unwrap_or(d.t_max),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn workers(&self) -> Result<usize, CliError> {
        match self.workers {
            Some(0) => Err(CliError::Validation("workers must be positive".into())),
            Some(w) => Ok(w),
            None => Ok(1),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Validation("--seed is required for stochastic runs".into()))
    }
}
