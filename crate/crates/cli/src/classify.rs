use std::path::Path;

use hls_core::cc_lab::{
    classify_trichotomy, generate, DiscreteMeasure, Generator, TrichotomyVerdict, DEFAULT_EPS, DEFAULT_RADII,
};
use hls_core::{CylGrid, CylGridFunction, GridSpec, GroupPoint};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, Document, SCHEMA_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

/// On-disk measure: either `atoms`, or a cylindrical density given by
/// `grid` and `values`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub n: usize,
    #[serde(default)]
    pub atoms: Option<Vec<Atom>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn read_measure(path: &Path, n: usize, normalize: bool) -> Result<DiscreteMeasure, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: MeasureFile = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    if file.n != n {
        return Err(CliError::Validation(format!(
            "{}: file has n={}, run has n={n}",
            path.display(),
            file.n
        )));
    }
    let mu = match (file.atoms, file.grid, file.values) {
        (Some(atoms), None, None) => {
            let mut points = Vec::with_capacity(atoms.len());
            let mut masses = Vec::with_capacity(atoms.len());
            for a in atoms {
                points.push(GroupPoint::from_coords(n, a.point).map_err(|e| CliError::io(path, e))?);
                masses.push(a.mass);
            }
            DiscreteMeasure::from_atoms(n, points, masses)
        }
        (None, Some(spec), Some(values)) => {
            let grid = CylGrid::new(n, spec).map_err(|e| CliError::io(path, e))?;
            let density = CylGridFunction::new(grid, values).map_err(|e| CliError::io(path, e))?;
            DiscreteMeasure::from_density(density)
        }
        _ => return Err(CliError::io(path, "expected either `atoms` or `grid` with `values`")),
    }
    .map_err(|e| CliError::io(path, e))?;
    if mu.is_normalized() {
        Ok(mu)
    } else if normalize {
        Ok(mu.normalized()?)
    } else {
        Err(CliError::Validation(format!(
            "{}: total mass {} is not 1 (pass --normalize to rescale)",
            path.display(),
            mu.total_mass()
        )))
    }
}

fn parse_generator(cfg: &RunConfig, name: &str) -> Result<Generator, CliError> {
    match name {
        "spread" => Ok(Generator::Spread),
        "translate" => Ok(Generator::Translate),
        "split" => {
            let k = cfg.k.unwrap_or(0.3);
            if !(k > 0.0 && k < 1.0) {
                return Err(CliError::Validation(format!("k must lie in (0, 1), got {k}")));
            }
            Ok(Generator::Split { k })
        }
        other => Err(CliError::Validation(format!(
            "unknown generator {other:?} (expected spread, translate or split)"
        ))),
    }
}

#[derive(Serialize)]
struct GeneratorInfo {
    name: &'static str,
    k: Option<f64>,
    length: usize,
    seed: u64,
}

#[derive(Serialize)]
struct ClassifyReport {
    schema_version: u32,
    command: &'static str,
    n: usize,
    generator: Option<GeneratorInfo>,
    measures: Option<Vec<String>>,
    #[serde(flatten)]
    verdict: TrichotomyVerdict,
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Document>, CliError> {
    let n = cfg.n();
    if n == 0 {
        return Err(CliError::Validation("n must be positive".into()));
    }
    let eps = cfg.eps.unwrap_or(DEFAULT_EPS);
    let radii = cfg.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
    let (seq, generator, files) = match (&cfg.generator, &cfg.measures) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "give either --generator or --measures, not both".into(),
            ))
        }
        (None, Some(paths)) => {
            let seq = paths
                .iter()
                .map(|p| read_measure(p, n, cfg.normalize))
                .collect::<Result<Vec<_>, _>>()?;
            let names = paths.iter().map(|p| p.display().to_string()).collect();
            (seq, None, Some(names))
        }
        (gen, None) => {
            let gen = parse_generator(cfg, gen.as_deref().unwrap_or("spread"))?;
            let length = cfg.length.unwrap_or(10);
            let seed = cfg.seed()?;
            let info = GeneratorInfo {
                name: gen.name(),
                k: match gen {
                    Generator::Split { k } => Some(k),
                    _ => None,
                },
                length,
                seed,
            };
            if length < 3 {
                return Err(CliError::Validation("length must be at least 3".into()));
            }
            (generate(gen, n, length, seed)?, Some(info), None)
        }
    };
    let verdict = classify_trichotomy(&seq, eps, &radii)?;
    let report = ClassifyReport {
        schema_version: SCHEMA_VERSION,
        command: "classify",
        n,
        generator,
        measures: files,
        verdict,
    };
    Ok(vec![output::json(cfg.out.clone(), &report)?])
}
