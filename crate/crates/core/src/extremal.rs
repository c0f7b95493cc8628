//! Maximisation of `‖I_λ f‖_q / ‖f‖_p` over nonnegative cylindrical
//! profiles on ℍ¹.
//!
//! The ascent map is the nonlinear power iteration
//! `f ↦ normalize((I*((I f)^{q−1}))^{1/(p−1)})`, whose fixed points satisfy
//! the Euler–Lagrange equation of the quotient. The quotient is invariant
//! under `f ↦ d^{-Q/p} f(δ_{1/d} ·)` and vertical translations, so each
//! iterate is pulled back to the scale where its `|f|^p` mass in the unit
//! ball around the concentration centre is exactly one half, with that
//! centre moved to the origin.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cc_lab::{concentration_center, DiscreteMeasure};
use crate::constants::HlsParams;
use crate::error::{HlsError, Result};
use crate::grid::{CylGrid, CylGridFunction};
use crate::group::homogeneous_dimension;
use crate::kernel::check_lambda;
use crate::operator::FractionalIntegral;

/// Tolerance on `|Q(1) − 1/2|` after renormalisation.
pub const CONCENTRATION_TOL: f64 = 1e-3;
const NORM_TOL: f64 = 1e-10;

/// `H(ρ, t) = ((1 + ρ²)² + t²)^{-(2Q−λ)/4}` sampled on `grid`.
pub fn extremal_h(grid: Arc<CylGrid>, lambda: f64) -> Result<CylGridFunction> {
    let q = homogeneous_dimension(grid.n());
    check_lambda(lambda, q)?;
    let e = -(2.0 * q - lambda) / 4.0;
    Ok(CylGridFunction::from_fn(grid, |r, t| {
        let a = 1.0 + r * r;
        (a * a + t * t).powf(e)
    }))
}

/// `H · (1 + amplitude · cos t)`.
pub fn perturbed_h(grid: Arc<CylGrid>, lambda: f64, amplitude: f64) -> Result<CylGridFunction> {
    if !(amplitude.abs() < 1.0) {
        return Err(HlsError::invalid("perturbation amplitude must be below 1"));
    }
    let h = extremal_h(Arc::clone(&grid), lambda)?;
    let bump = CylGridFunction::from_fn(grid, |_, t| 1.0 + amplitude * t.cos());
    let values = h.values().iter().zip(bump.values()).map(|(a, b)| a * b).collect();
    CylGridFunction::new(Arc::clone(h.grid()), values)
}

/// `exp(−ρ² − t²)`, the default starting profile.
pub fn gaussian_profile(grid: Arc<CylGrid>) -> CylGridFunction {
    CylGridFunction::from_fn(grid, |r, t| (-(r * r) - t * t).exp())
}

fn check_profile(f: &CylGridFunction, params: &HlsParams) -> Result<()> {
    if f.grid().n() != params.n {
        return Err(HlsError::DimensionMismatch {
            left: f.grid().n(),
            right: params.n,
        });
    }
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(HlsError::NegativeProfile);
    }
    Ok(())
}

fn check_normalized(f: &CylGridFunction, p: f64) -> Result<()> {
    let norm = f.lp_norm(p);
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(HlsError::Unnormalized(norm));
    }
    Ok(())
}

fn step_with(op: &FractionalIntegral, f: &CylGridFunction, params: &HlsParams) -> Result<CylGridFunction> {
    let q1 = params.q - 1.0;
    let inv = 1.0 / (params.p - 1.0);
    let g = op.apply(f)?.map(|v| v.max(0.0).powf(q1));
    op.apply_adjoint(&g)?.map(|v| v.max(0.0).powf(inv)).normalized(params.p)
}

/// One ascent step `normalize((I*((I f)^{q−1}))^{1/(p−1)})` for a
/// nonnegative `f` of unit `Lᵖ` norm.
pub fn euler_lagrange_step(f: &CylGridFunction, params: &HlsParams) -> Result<CylGridFunction> {
    check_profile(f, params)?;
    check_normalized(f, params.p)?;
    let op = FractionalIntegral::cached(f.grid(), params.lambda)?;
    step_with(&op, f, params)
}

#[derive(Debug, Clone)]
pub struct Renormalized {
    pub f: CylGridFunction,
    /// Applied dilation.
    pub d: f64,
    /// Applied vertical shift.
    pub a: f64,
    /// `Q(1)` of the returned profile.
    pub concentration: f64,
}

/// Radius `R*` at which the Levy concentration of `mu` reaches one half,
/// with the maximising centre height.
fn half_mass_radius(mu: &DiscreteMeasure) -> Result<(f64, f64)> {
    let grid = mu.density().expect("grid measure").grid();
    let spec = grid.spec();
    let mass = mu.total_mass();
    let conc = |r: f64| concentration_center(mu, r, None).map(|(m, c)| (m / mass, c.t()));
    let mut lo = grid.rho()[0] * 0.5;
    let mut hi = (spec.rho_max.powi(4) + 4.0 * spec.t_max * spec.t_max).powf(0.25);
    if conc(hi)?.0 < 0.5 {
        return Err(HlsError::Vanishing("no tested ball holds half of the mass".into()));
    }
    if conc(lo)?.0 >= 0.5 {
        return Err(HlsError::invalid("profile concentrates below the grid resolution"));
    }
    let mut best = conc(hi)?;
    let mut r_star = hi;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let (m, c) = conc(mid)?;
        if (m - 0.5).abs() <= 0.05 * CONCENTRATION_TOL {
            return Ok((mid, c));
        }
        if m < 0.5 {
            lo = mid;
        } else {
            hi = mid;
            best = (m, c);
            r_star = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    Ok((r_star, best.1))
}

fn unreachable_half() -> HlsError {
    HlsError::Vanishing("cannot reach half concentration by dilation (grid too coarse for the unit ball?)".into())
}

/// Dilates and shifts `f` so that its `|f|^p` mass in the unit ball at the
/// origin is one half and the origin maximises that mass. Returns `f`
/// unchanged when it already satisfies both to tolerance.
pub fn renormalize_concentration(f: &CylGridFunction, params: &HlsParams) -> Result<Renormalized> {
    check_profile(f, params)?;
    check_normalized(f, params.p)?;
    let mu = DiscreteMeasure::from_profile(f, params.p)?;
    let (q1, c1) = concentration_center(&mu, 1.0, None)?;
    let q1 = q1 / mu.total_mass();
    if (q1 - 0.5).abs() <= CONCENTRATION_TOL && c1.t() == 0.0 {
        return Ok(Renormalized {
            f: f.clone(),
            d: 1.0,
            a: 0.0,
            concentration: q1,
        });
    }
    let (r_star, c) = half_mass_radius(&mu)?;
    // The shift a = −c d² sends the centre (0, c) to the origin for every d;
    // d itself is refined against the measured Q(1) of the resampled
    // profile, which differs from the pre-transform estimate by the
    // discretisation error.
    let build = |ln_d: f64| -> Result<(CylGridFunction, f64, f64)> {
        let d = ln_d.exp();
        let a = -c * d * d;
        let g = f
            .transformed(d, a, params.p)
            .map(|v| v.max(0.0))
            .normalized(params.p)
            .map_err(|_| unreachable_half())?;
        let nu = DiscreteMeasure::from_profile(&g, params.p)?;
        let q = concentration_center(&nu, 1.0, None)?.0 / nu.total_mass();
        Ok((g, a, q))
    };
    let mut x0 = -r_star.ln();
    let mut best = build(x0)?;
    if (best.2 - 0.5).abs() > 0.25 * CONCENTRATION_TOL {
        // Q(1) decreases as d grows; bracket, then bisect.
        let dir = if best.2 > 0.5 { 1.0 } else { -1.0 };
        let mut width = 0.05;
        let mut x1 = x0 + dir * width;
        let mut other = build(x1)?;
        while (other.2 - 0.5) * (best.2 - 0.5) > 0.0 {
            width *= 2.0;
            if width > 20.0 {
                return Err(unreachable_half());
            }
            x0 = x1;
            best = other;
            x1 = x0 + dir * width;
            other = build(x1)?;
        }
        // lo: Q(1) > 1/2, hi: Q(1) < 1/2
        let (mut lo, mut hi) = if best.2 > 0.5 {
            ((x0, best), (x1, other))
        } else {
            ((x1, other), (x0, best))
        };
        for _ in 0..60 {
            if (lo.1 .2 - 0.5).abs() <= 0.25 * CONCENTRATION_TOL {
                break;
            }
            let mid = 0.5 * (lo.0 + hi.0);
            let m = build(mid)?;
            if m.2 >= 0.5 {
                lo = (mid, m);
            } else {
                hi = (mid, m);
            }
        }
        (x0, best) = if (lo.1 .2 - 0.5).abs() <= (hi.1 .2 - 0.5).abs() {
            lo
        } else {
            hi
        };
    }
    let (g, a, concentration) = best;
    Ok(Renormalized {
        f: g,
        d: x0.exp(),
        a,
        concentration,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub quotient: f64,
    pub q1_concentration: f64,
    pub dilation: f64,
    pub t_shift: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn quotients(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.quotient).collect()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].quotient >= w[0].quotient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizeOptions {
    pub max_iter: usize,
    /// Stop when the quotient improves by less than `rtol` (relative)
    /// over `window` iterations.
    pub rtol: f64,
    pub window: usize,
    /// Smallest damping factor tried before a step is rejected.
    pub min_theta: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rtol: 1e-7,
            window: 10,
            min_theta: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaximizeResult {
    pub f_star: CylGridFunction,
    pub quotient: f64,
    pub trace: ConvergenceTrace,
    pub converged: bool,
}

/// Safeguarded ascent with concentration renormalisation.
///
/// Each iteration proposes the renormalised ascent step; if that lowers the
/// quotient, the damped profile `normalize((1−θ) f + θ f_new)` is tried with
/// `θ` halved down to `min_theta`, after which the step is rejected and the
/// iterate kept.
pub fn maximize(params: &HlsParams, init: &CylGridFunction, opts: &MaximizeOptions) -> Result<MaximizeResult> {
    check_profile(init, params)?;
    if init.is_zero() {
        return Err(HlsError::ZeroFunction);
    }
    if opts.max_iter == 0 || opts.window == 0 || !(opts.rtol >= 0.0) || !(opts.min_theta > 0.0) {
        return Err(HlsError::invalid("iteration controls must be positive"));
    }
    let p = params.p;
    let op = FractionalIntegral::cached(init.grid(), params.lambda)?;
    let quotient = |f: &CylGridFunction| op.quotient(f, p, params.q);

    let start = renormalize_concentration(&init.normalized(p)?, params)?;
    let mut f = start.f;
    let mut q = quotient(&f)?;
    let mut trace = ConvergenceTrace {
        records: vec![TraceRecord {
            iter: 0,
            quotient: q,
            q1_concentration: start.concentration,
            dilation: start.d,
            t_shift: start.a,
            accepted: true,
        }],
    };
    let mut rejected_run = 0;
    let mut converged = false;
    for iter in 1..=opts.max_iter {
        let proposal = step_with(&op, &f, params)?;
        let mut theta = 1.0;
        let mut accepted = None;
        while theta >= opts.min_theta {
            let cand = if theta == 1.0 {
                proposal.clone()
            } else {
                let mixed = f
                    .values()
                    .iter()
                    .zip(proposal.values())
                    .map(|(a, b)| (1.0 - theta) * a + theta * b)
                    .collect();
                CylGridFunction::new(Arc::clone(f.grid()), mixed)?.normalized(p)?
            };
            let r = renormalize_concentration(&cand, params)?;
            let qc = quotient(&r.f)?;
            if qc >= q {
                accepted = Some((r, qc));
                break;
            }
            theta *= 0.5;
        }
        let record = match accepted {
            Some((r, qc)) => {
                rejected_run = 0;
                f = r.f;
                q = qc;
                TraceRecord {
                    iter,
                    quotient: q,
                    q1_concentration: r.concentration,
                    dilation: r.d,
                    t_shift: r.a,
                    accepted: true,
                }
            }
            None => {
                rejected_run += 1;
                let mu = DiscreteMeasure::from_profile(&f, p)?;
                TraceRecord {
                    iter,
                    quotient: q,
                    q1_concentration: concentration_center(&mu, 1.0, None)?.0 / mu.total_mass(),
                    dilation: 1.0,
                    t_shift: 0.0,
                    accepted: false,
                }
            }
        };
        trace.records.push(record);
        if rejected_run >= opts.window {
            converged = true;
            break;
        }
        if iter >= opts.window {
            let past = trace.records[iter - opts.window].quotient;
            if q - past <= opts.rtol * q {
                converged = true;
                break;
            }
        }
    }
    Ok(MaximizeResult {
        f_star: f,
        quotient: q,
        trace,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub d: f64,
    pub a: f64,
    /// `‖f − T_{d,a} g‖_p / ‖f‖_p`.
    pub rel_error: f64,
}

/// Finds the dilation `d` and vertical shift `a` for which the transformed
/// `g` (see [`CylGridFunction::transformed`]) is closest to `f` in `Lᵖ`:
/// a coarse scan over `ln d ∈ [−ln 4, ln 4]`, `a ∈ [−t_max/2, t_max/2]`,
/// then a compass search.
pub fn align(f: &CylGridFunction, g: &CylGridFunction, p: f64) -> Result<Alignment> {
    f.check_same_grid(g)?;
    if !(p >= 1.0) {
        return Err(HlsError::invalid("p must be at least 1"));
    }
    let nf = f.lp_norm(p);
    if !(nf > 0.0) || g.is_zero() {
        return Err(HlsError::ZeroFunction);
    }
    let err = |ln_d: f64, a: f64| -> f64 {
        let tg = g.transformed(ln_d.exp(), a, p);
        let diff: Vec<f64> = f.values().iter().zip(tg.values()).map(|(x, y)| x - y).collect();
        CylGridFunction::new(Arc::clone(f.grid()), diff)
            .map(|h| h.lp_norm(p) / nf)
            .unwrap_or(f64::INFINITY)
    };
    let a_max = 0.5 * f.grid().spec().t_max;
    let steps = 16;
    let ln4 = 4f64.ln();
    let mut best = (0.0, 0.0, err(0.0, 0.0));
    for i in 0..=steps {
        let ln_d = -ln4 + 2.0 * ln4 * i as f64 / steps as f64;
        for j in 0..=steps {
            let a = -a_max + 2.0 * a_max * j as f64 / steps as f64;
            let e = err(ln_d, a);
            if e < best.2 {
                best = (ln_d, a, e);
            }
        }
    }
    let mut step = (2.0 * ln4 / steps as f64, 2.0 * a_max / steps as f64);
    while step.0 > 1e-7 {
        let mut moved = false;
        for (dx, dy) in [(step.0, 0.0), (-step.0, 0.0), (0.0, step.1), (0.0, -step.1)] {
            let e = err(best.0 + dx, best.1 + dy);
            if e < best.2 {
                best = (best.0 + dx, best.1 + dy, e);
                moved = true;
            }
        }
        if !moved {
            step = (0.5 * step.0, 0.5 * step.1);
        }
    }
    Ok(Alignment {
        d: best.0.exp(),
        a: best.1,
        rel_error: best.2,
    })
}
