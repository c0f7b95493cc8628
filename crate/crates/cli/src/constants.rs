use hls_core::constants::{frank_lieb_constant, lieb_diagonal_constant, lieb_loss_upper_bound, theorem2_upper_bound};
use hls_core::group::ball_volume;
use hls_core::{EuclideanParams, HlsParams, LiebVariant};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, Document, SCHEMA_VERSION};

#[derive(Serialize)]
struct Record {
    name: &'static str,
    params: Value,
    value: f64,
}

#[derive(Serialize)]
struct Comparison {
    bound: &'static str,
    sharp: &'static str,
    bound_value: f64,
    sharp_value: f64,
    ratio: f64,
    strict: bool,
}

impl Comparison {
    fn new(bound: &'static str, sharp: &'static str, bound_value: f64, sharp_value: f64) -> Self {
        Self {
            bound,
            sharp,
            bound_value,
            sharp_value,
            ratio: bound_value / sharp_value,
            strict: bound_value > sharp_value,
        }
    }
}

#[derive(Serialize)]
struct ConstantsReport {
    schema_version: u32,
    command: &'static str,
    params: HlsParams,
    euclidean: Option<EuclideanParams>,
    records: Vec<Record>,
    dominance: Vec<Comparison>,
}

fn euclidean_params(cfg: &RunConfig, lambda: f64) -> Result<Option<EuclideanParams>, CliError> {
    match cfg.dim {
        Some(dim) => Ok(Some(EuclideanParams::diagonal(dim, lambda)?)),
        // Only reported when λ fits the default ℝ^{2n+1}.
        None => Ok(EuclideanParams::diagonal(2 * cfg.n() + 1, lambda).ok()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Document>, CliError> {
    let hp = cfg.params()?;
    let ep = euclidean_params(cfg, hp.lambda)?;
    let (n, lambda) = (hp.n, hp.lambda);

    let fl = frank_lieb_constant(n, lambda)?;
    let t2 = theorem2_upper_bound(n, lambda, hp.r, hp.s)?;
    let mut records = vec![
        Record {
            name: "frank_lieb_constant",
            params: json!({ "n": n, "lambda": lambda }),
            value: fl,
        },
        Record {
            name: "theorem2_upper_bound",
            params: json!({ "n": n, "lambda": lambda, "r": hp.r, "s": hp.s }),
            value: t2,
        },
        Record {
            name: "ball_volume",
            params: json!({ "n": n }),
            value: ball_volume(n)?,
        },
    ];
    let mut dominance = Vec::new();
    // The sharp value is only known on the diagonal.
    if (hp.r - hp.s).abs() <= 1e-12 * hp.s {
        dominance.push(Comparison::new("theorem2_upper_bound", "frank_lieb_constant", t2, fl));
    }

    if let Some(ep) = &ep {
        let dim = ep.dim;
        let standard = lieb_diagonal_constant(dim, lambda, LiebVariant::Standard)?;
        let scaled = lieb_diagonal_constant(dim, lambda, LiebVariant::DimensionScaled)?;
        let ll = lieb_loss_upper_bound(dim, lambda, ep.r, ep.s)?;
        for (variant, value) in [
            (LiebVariant::Standard, standard),
            (LiebVariant::DimensionScaled, scaled),
        ] {
            records.push(Record {
                name: "lieb_diagonal_constant",
                params: json!({
                    "dim": dim,
                    "lambda": lambda,
                    "variant": variant.name(),
                    "default": variant == LiebVariant::default(),
                }),
                value,
            });
        }
        records.push(Record {
            name: "lieb_loss_upper_bound",
            params: json!({ "dim": dim, "lambda": lambda, "r": ep.r, "s": ep.s }),
            value: ll,
        });
        let sharp = lieb_diagonal_constant(dim, lambda, LiebVariant::default())?;
        dominance.push(Comparison::new(
            "lieb_loss_upper_bound",
            "lieb_diagonal_constant",
            ll,
            sharp,
        ));
    }

    let report = ConstantsReport {
        schema_version: SCHEMA_VERSION,
        command: "constants",
        params: hp,
        euclidean: ep,
        records,
        dominance,
    };
    Ok(vec![output::json(cfg.out.clone(), &report)?])
}
