use hls_core::constants::frank_lieb_constant;
use hls_core::extremal::{align, extremal_h, gaussian_profile, maximize, perturbed_h, Alignment, MaximizeOptions};
use hls_core::{CylGrid, GridSpec, HlsParams};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, num, Document, SCHEMA_VERSION};

pub const TRACE_HEADER: &str = "iter,quotient,q1_concentration,dilation,t_shift,accepted";

#[derive(Serialize)]
struct MaximizeReport {
    schema_version: u32,
    command: &'static str,
    params: HlsParams,
    grid: GridSpec,
    init: String,
    amplitude: Option<f64>,
    dilate: f64,
    options: MaximizeOptions,
    quotient: f64,
    sharp_constant: Option<f64>,
    rel_error: Option<f64>,
    converged: bool,
    iterations: usize,
    accepted_steps: usize,
    trace_nondecreasing: bool,
    /// Best match of the final profile against the closed-form extremal.
    alignment: Alignment,
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Document>, CliError> {
    let hp = cfg.params()?;
    let spec = cfg.grid_spec()?;
    let init = cfg.init.clone().unwrap_or_else(|| "perturbed-h".into());
    let amplitude = match init.as_str() {
        "perturbed-h" => {
            let a = cfg.amplitude.unwrap_or(0.3);
            if !(a.abs() < 1.0) {
                return Err(CliError::Validation(format!("amplitude must lie in (-1, 1), got {a}")));
            }
            Some(a)
        }
        "h" | "gaussian" => None,
        other => {
            return Err(CliError::Validation(format!(
                "unknown init {other:?} (expected perturbed-h, h or gaussian)"
            )))
        }
    };
    let dilate = cfg.dilate.unwrap_or(1.0);
    if !(dilate > 0.0 && dilate.is_finite()) {
        return Err(CliError::Validation(format!("dilate must be positive, got {dilate}")));
    }
    let defaults = MaximizeOptions::default();
    let opts = MaximizeOptions {
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
        rtol: cfg.rtol.unwrap_or(defaults.rtol),
        ..defaults
    };
    if opts.max_iter == 0 || !(opts.rtol > 0.0) {
        return Err(CliError::Validation("max_iter and rtol must be positive".into()));
    }

    let grid = CylGrid::new(hp.n, spec)?;
    let f0 = match (init.as_str(), amplitude) {
        ("perturbed-h", Some(a)) => perturbed_h(grid.clone(), hp.lambda, a)?,
        ("h", _) => extremal_h(grid.clone(), hp.lambda)?,
        _ => gaussian_profile(grid.clone()),
    };
    // Resampling can overshoot below zero next to steep tails; clip as the
    // renormalisation does.
    let f0 = if dilate == 1.0 {
        f0
    } else {
        f0.transformed(dilate, 0.0, hp.p).map(|v| v.max(0.0))
    };
    let f0 = f0.normalized(hp.p)?;
    let result = maximize(&hp, &f0, &opts)?;
    let h = extremal_h(grid, hp.lambda)?.normalized(hp.p)?;
    let alignment = align(&result.f_star, &h, hp.p)?;

    let diagonal = (hp.r - hp.s).abs() <= 1e-12 * hp.s;
    let sharp = if diagonal {
        Some(frank_lieb_constant(hp.n, hp.lambda)?)
    } else {
        None
    };
    let records = &result.trace.records;

    let mut docs = Vec::new();
    if let Some(path) = &cfg.trace {
        docs.push(output::csv(
            path.clone(),
            TRACE_HEADER,
            records.iter().map(|r| {
                vec![
                    r.iter.to_string(),
                    num(r.quotient),
                    num(r.q1_concentration),
                    num(r.dilation),
                    num(r.t_shift),
                    r.accepted.to_string(),
                ]
            }),
        ));
    }
    let report = MaximizeReport {
        schema_version: SCHEMA_VERSION,
        command: "maximize",
        params: hp,
        grid: spec,
        init,
        amplitude,
        dilate,
        options: opts,
        quotient: result.quotient,
        sharp_constant: sharp,
        rel_error: sharp.map(|c| (result.quotient - c).abs() / c),
        converged: result.converged,
        iterations: records.len(),
        accepted_steps: records.iter().filter(|r| r.accepted).count(),
        trace_nondecreasing: result.trace.is_nondecreasing(),
        alignment,
    };
    docs.push(output::json(cfg.out.clone(), &report)?);
    Ok(docs)
}
