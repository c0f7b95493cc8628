use std::path::Path;
use std::sync::Arc;

use hls_core::constants::frank_lieb_constant;
use hls_core::extremal::{extremal_h, gaussian_profile};
use hls_core::grid::ball_indicator;
use hls_core::montecarlo::{mc_bilinear_energy, Geometry, McEstimate, McOptions};
use hls_core::operator::{bilinear_energy, FractionalIntegral};
use hls_core::{CylGrid, CylGridFunction, GridSpec, HlsParams};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, num, Document, SCHEMA_VERSION};

/// On-disk grid function: values in row-major order, ρ outer, t inner.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub n: usize,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Preset {
    H,
    Ball,
    Gaussian,
}

enum Source {
    Preset(Preset),
    File(CylGridFunction),
}

fn parse_preset(name: &str) -> Result<Preset, CliError> {
    match name {
        "h" | "H" => Ok(Preset::H),
        "ball" => Ok(Preset::Ball),
        "gaussian" => Ok(Preset::Gaussian),
        "zero" => Err(CliError::Validation(
            "preset zero: the quotient is undefined for f = 0".into(),
        )),
        other => Err(CliError::Validation(format!(
            "unknown preset {other:?} (expected h, ball, gaussian or zero)"
        ))),
    }
}

fn read_grid_file(path: &Path, n: usize) -> Result<CylGridFunction, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: GridFile = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    if file.n != n {
        return Err(CliError::Validation(format!(
            "{}: file has n={}, run has n={n}",
            path.display(),
            file.n
        )));
    }
    let grid = CylGrid::new(file.n, file.grid).map_err(|e| CliError::io(path, e))?;
    CylGridFunction::new(grid, file.values).map_err(|e| CliError::io(path, e))
}

fn build(preset: Preset, grid: Arc<CylGrid>, lambda: f64) -> Result<CylGridFunction, CliError> {
    Ok(match preset {
        Preset::H => extremal_h(grid, lambda)?,
        Preset::Ball => ball_indicator(grid, 1.0),
        Preset::Gaussian => gaussian_profile(grid),
    })
}

fn pointwise(preset: Preset, n: usize, lambda: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    let q = (2 * n + 2) as f64;
    let e = -(2.0 * q - lambda) / 4.0;
    move |u: &[f64]| {
        let z2: f64 = u[..2 * n].iter().map(|c| c * c).sum();
        let t = u[2 * n];
        match preset {
            Preset::H => ((1.0 + z2).powi(2) + t * t).powf(e),
            Preset::Ball => {
                if z2 * z2 + t * t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Preset::Gaussian => (-z2 - t * t).exp(),
        }
    }
}

#[derive(Serialize)]
struct Measures {
    energy: f64,
    norm_p: f64,
    norm_r: f64,
    norm_s: f64,
    /// `‖I_λ f‖_q`.
    image_norm_q: f64,
    /// `‖I_λ f‖_q / ‖f‖_p`.
    operator_quotient: f64,
    /// `E[f, f] / (‖f‖_r ‖f‖_s)`.
    bilinear_quotient: f64,
}

fn measure(f: &CylGridFunction, hp: &HlsParams) -> Result<Measures, CliError> {
    if f.is_zero() {
        return Err(CliError::Validation("the quotient is undefined for f = 0".into()));
    }
    let op = FractionalIntegral::cached(f.grid(), hp.lambda)?;
    let energy = bilinear_energy(f, f, hp.lambda)?;
    let (norm_p, norm_r, norm_s) = (f.lp_norm(hp.p), f.lp_norm(hp.r), f.lp_norm(hp.s));
    let image_norm_q = op.apply(f)?.lp_norm(hp.q);
    Ok(Measures {
        energy,
        norm_p,
        norm_r,
        norm_s,
        image_norm_q,
        operator_quotient: image_norm_q / norm_p,
        bilinear_quotient: energy / (norm_r * norm_s),
    })
}

#[derive(Serialize)]
struct LadderRow {
    level: usize,
    n_rho: usize,
    n_t: usize,
    bilinear_quotient: f64,
    rel_error: Option<f64>,
}

#[derive(Serialize)]
struct McReport {
    #[serde(flatten)]
    estimate: McEstimate,
    seed: u64,
    workers: usize,
    /// `|MC − grid| / stderr`.
    z_vs_grid: f64,
}

#[derive(Serialize)]
struct EvaluateReport {
    schema_version: u32,
    command: &'static str,
    params: HlsParams,
    grid: GridSpec,
    source: String,
    #[serde(flatten)]
    measures: Measures,
    /// Closed-form sharp constant (diagonal exponents only).
    sharp_constant: Option<f64>,
    rel_error: Option<f64>,
    ladder: Option<Vec<LadderRow>>,
    monotone_decrease: Option<bool>,
    monte_carlo: Option<McReport>,
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Document>, CliError> {
    let hp = cfg.params()?;
    let refine = cfg.refine.unwrap_or(0);
    let source = match (&cfg.preset, &cfg.input) {
        (Some(_), Some(_)) => return Err(CliError::Validation("give either --preset or --input, not both".into())),
        (_, Some(path)) => {
            if refine > 0 {
                return Err(CliError::Validation(
                    "--refine needs a preset (file grids are fixed)".into(),
                ));
            }
            Source::File(read_grid_file(path, hp.n)?)
        }
        (preset, None) => Source::Preset(parse_preset(preset.as_deref().unwrap_or("h"))?),
    };
    let mc = match cfg.samples {
        Some(samples) => Some(McOptions::with(samples, cfg.seed()?, cfg.workers()?)),
        None => None,
    };
    if cfg.ladder_csv.is_some() && refine == 0 {
        return Err(CliError::Validation("--ladder-csv needs --refine".into()));
    }
    let diagonal = (hp.r - hp.s).abs() <= 1e-12 * hp.s;
    let sharp = if diagonal {
        Some(frank_lieb_constant(hp.n, hp.lambda)?)
    } else {
        None
    };
    let rel = |q: f64| sharp.map(|c| (q - c).abs() / c);

    let (f, label) = match &source {
        Source::File(f) => (f.clone(), format!("file:{}", cfg.input.as_ref().unwrap().display())),
        Source::Preset(p) => {
            let grid = CylGrid::new(hp.n, cfg.grid_spec()?)?;
            (
                build(*p, grid, hp.lambda)?,
                format!("preset:{}", cfg.preset.as_deref().unwrap_or("h")),
            )
        }
    };
    let spec = *f.grid().spec();
    let measures = measure(&f, &hp)?;

    let mut ladder = None;
    let mut monotone = None;
    if let (Source::Preset(p), true) = (&source, refine > 0) {
        let mut rows = vec![LadderRow {
            level: 0,
            n_rho: spec.n_rho,
            n_t: spec.n_t,
            bilinear_quotient: measures.bilinear_quotient,
            rel_error: rel(measures.bilinear_quotient),
        }];
        let mut s = spec;
        for level in 1..=refine {
            s = s.refined();
            let g = build(*p, CylGrid::new(hp.n, s)?, hp.lambda)?;
            let q = measure(&g, &hp)?.bilinear_quotient;
            rows.push(LadderRow {
                level,
                n_rho: s.n_rho,
                n_t: s.n_t,
                bilinear_quotient: q,
                rel_error: rel(q),
            });
        }
        monotone = sharp.map(|_| rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error));
        ladder = Some(rows);
    }

    let monte_carlo = match (&mc, &source) {
        (Some(opts), src) => {
            let geom = Geometry::Heisenberg { n: hp.n };
            let est = match src {
                Source::Preset(p) => {
                    let f = pointwise(*p, hp.n, hp.lambda);
                    mc_bilinear_energy(&f, &f, hp.lambda, geom, opts)?
                }
                Source::File(g) => {
                    let n = hp.n;
                    let f = move |u: &[f64]| {
                        let rho = u[..2 * n].iter().map(|c| c * c).sum::<f64>().sqrt();
                        g.interpolate(rho, u[2 * n])
                    };
                    mc_bilinear_energy(f, f, hp.lambda, geom, opts)?
                }
            };
            Some(McReport {
                z_vs_grid: est.z_score(measures.energy),
                estimate: est,
                seed: opts.seed,
                workers: opts.workers,
            })
        }
        (None, _) => None,
    };

    let mut docs = Vec::new();
    if let (Some(path), Some(rows)) = (&cfg.ladder_csv, &ladder) {
        docs.push(output::csv(
            path.clone(),
            "level,n_rho,n_t,bilinear_quotient,rel_error",
            rows.iter().map(|r| {
                vec![
                    r.level.to_string(),
                    r.n_rho.to_string(),
                    r.n_t.to_string(),
                    num(r.bilinear_quotient),
                    r.rel_error.map_or(String::new(), num),
                ]
            }),
        ));
    }
    let report = EvaluateReport {
        schema_version: SCHEMA_VERSION,
        command: "evaluate",
        params: hp,
        grid: spec,
        source: label,
        rel_error: rel(measures.bilinear_quotient),
        measures,
        sharp_constant: sharp,
        ladder,
        monotone_decrease: monotone,
        monte_carlo,
    };
    docs.push(output::json(cfg.out.clone(), &report)?);
    Ok(docs)
}
