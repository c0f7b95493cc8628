//! Closed-form sharp constants, upper bounds and exponent bookkeeping.
//!
//! Every Γ-ratio is evaluated in log space and exponentiated once, so the
//! formulas stay finite near `λ → 0` and `λ → Q`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HlsError, Result};
use crate::group::{ball_volume, homogeneous_dimension};
use crate::special::log_gamma;

/// Tolerance on the linear exponent relations.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// Exponent tuple for the Heisenberg problem.
///
/// `p, q` are the operator exponents of `‖I_λ f‖_q ≤ C ‖f‖_p`; `r = q'`
/// and `s = p` are the matching bilinear exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlsParams {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q_dim: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

fn check_lambda(lambda: f64, q_dim: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < q_dim) || !lambda.is_finite() {
        return Err(HlsError::LambdaOutOfRange { lambda, q: q_dim });
    }
    Ok(())
}

impl HlsParams {
    /// Derives `q` from `1/q = 1/p − (Q − λ)/Q`, then `r = q'`, `s = p`.
    ///
    /// Requires `0 < λ < Q` and `1 < p < Q/(Q − λ)`; the derived `q` then
    /// satisfies `q > p` and `q > Q/λ`.
    pub fn derive(n: usize, lambda: f64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(HlsError::invalid("n must be positive"));
        }
        let q_dim = homogeneous_dimension(n);
        check_lambda(lambda, q_dim)?;
        let p_max = q_dim / (q_dim - lambda);
        if !(p > 1.0 && p < p_max) || !p.is_finite() {
            return Err(HlsError::invalid(format!(
                "p must lie in (1, Q/(Q-lambda)) = (1, {p_max}), got {p}"
            )));
        }
        let inv_q = 1.0 / p - (q_dim - lambda) / q_dim;
        let q = 1.0 / inv_q;
        if !(q.is_finite() && q > p && q > q_dim / lambda) {
            return Err(HlsError::invalid(format!("derived q={q} is not admissible")));
        }
        let r = q / (q - 1.0);
        Ok(Self {
            n,
            q_dim,
            lambda,
            p,
            q,
            r,
            s: p,
        })
    }

    /// Diagonal exponents `r = s = p = 2Q/(2Q − λ)`, `q = 2Q/λ`.
    pub fn diagonal(n: usize, lambda: f64) -> Result<Self> {
        let q_dim = homogeneous_dimension(n);
        check_lambda(lambda, q_dim)?;
        Self::derive(n, lambda, 2.0 * q_dim / (2.0 * q_dim - lambda))
    }

    /// `1/r + 1/s + λ/Q − 2`; zero up to rounding for any derived tuple.
    pub fn bilinear_residual(&self) -> f64 {
        1.0 / self.r + 1.0 / self.s + self.lambda / self.q_dim - 2.0
    }
}

/// Exponents of the Euclidean inequality on ℝᴺ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanParams {
    pub dim: usize,
    pub lambda: f64,
    pub r: f64,
    pub s: f64,
}

impl EuclideanParams {
    pub fn new(dim: usize, lambda: f64, r: f64, s: f64) -> Result<Self> {
        if dim == 0 {
            return Err(HlsError::invalid("N must be positive"));
        }
        check_lambda(lambda, dim as f64)?;
        check_bilinear(r, s, lambda, dim as f64)?;
        Ok(Self { dim, lambda, r, s })
    }

    /// `r = s = 2N/(2N − λ)`.
    pub fn diagonal(dim: usize, lambda: f64) -> Result<Self> {
        let nf = dim as f64;
        let r = 2.0 * nf / (2.0 * nf - lambda);
        Self::new(dim, lambda, r, r)
    }
}

fn check_bilinear(r: f64, s: f64, lambda: f64, dim: f64) -> Result<()> {
    if !(r > 1.0 && r.is_finite() && s > 1.0 && s.is_finite()) {
        return Err(HlsError::invalid(format!(
            "r and s must lie in (1, inf), got r={r}, s={s}"
        )));
    }
    let residual = 1.0 / r + 1.0 / s + lambda / dim - 2.0;
    if residual.abs() > ADMISSIBILITY_TOL {
        return Err(HlsError::invalid(format!(
            "1/r + 1/s + lambda/dim must equal 2 (residual {residual:e})"
        )));
    }
    Ok(())
}

/// Heisenberg diagonal sharp constant (bilinear normalisation):
///
/// `(π^{n+1} / (2^{n−1} n!))^{λ/Q} · n! · Γ((Q−λ)/2) / Γ((2Q−λ)/4)²`.
pub fn frank_lieb_constant(n: usize, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(HlsError::invalid("n must be positive"));
    }
    let q = homogeneous_dimension(n);
    check_lambda(lambda, q)?;
    let nf = n as f64;
    let ln_fact = log_gamma(nf + 1.0)?;
    let ln_base = (nf + 1.0) * PI.ln() - (nf - 1.0) * 2f64.ln() - ln_fact;
    let ln_c =
        lambda / q * ln_base + ln_fact + log_gamma((q - lambda) / 2.0)? - 2.0 * log_gamma((2.0 * q - lambda) / 4.0)?;
    Ok(ln_c.exp())
}

/// Upper bound for the Heisenberg constant at arbitrary admissible `(r, s)`:
///
/// `Q |B₁|^{λ/Q} / (r s (Q−λ)) · [ (λ/Q / (1−1/r))^{λ/Q} + (λ/Q / (1−1/s))^{λ/Q} ]`.
pub fn theorem2_upper_bound(n: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(HlsError::invalid("n must be positive"));
    }
    let q = homogeneous_dimension(n);
    check_lambda(lambda, q)?;
    check_bilinear(r, s, lambda, q)?;
    let ball = ball_volume(n)?;
    Ok(rearrangement_bound(q, ball, lambda, r, s))
}

/// Shared shape of both upper bounds; `unit_ball` is `|B₁|` in the
/// relevant geometry (`ω_{N−1}/N` in the Euclidean case).
fn rearrangement_bound(dim: f64, unit_ball: f64, lambda: f64, r: f64, s: f64) -> f64 {
    let a = lambda / dim;
    let prefactor = dim * unit_ball.powf(a) / (r * s * (dim - lambda));
    prefactor * ((a / (1.0 - 1.0 / r)).powf(a) + (a / (1.0 - 1.0 / s)).powf(a))
}

/// Which power of π multiplies the Euclidean diagonal constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LiebVariant {
    /// `π^{λ/N}`, the alternative reading of the formula.
    DimensionScaled,
    /// `π^{λ/2}`; confirmed by the Monte Carlo quotient of the extremal
    /// `(1 + |x|²)^{-(2N−λ)/2}` and shipped as the default.
    #[default]
    Standard,
}

impl LiebVariant {
    pub fn name(self) -> &'static str {
        match self {
            LiebVariant::DimensionScaled => "dimension-scaled",
            LiebVariant::Standard => "standard",
        }
    }
}

/// Euclidean diagonal sharp constant
/// `π^{e} Γ(N/2 − λ/2)/Γ(N − λ/2) · (Γ(N/2)/Γ(N))^{(λ−N)/N}` with `e`
/// selected by `variant`.
pub fn lieb_diagonal_constant(dim: usize, lambda: f64, variant: LiebVariant) -> Result<f64> {
    if dim == 0 {
        return Err(HlsError::invalid("N must be positive"));
    }
    let nf = dim as f64;
    check_lambda(lambda, nf)?;
    let pi_exp = match variant {
        LiebVariant::DimensionScaled => lambda / nf,
        LiebVariant::Standard => lambda / 2.0,
    };
    let ln_c = pi_exp * PI.ln() + log_gamma(nf / 2.0 - lambda / 2.0)? - log_gamma(nf - lambda / 2.0)?
        + (lambda - nf) / nf * (log_gamma(nf / 2.0)? - log_gamma(nf)?);
    Ok(ln_c.exp())
}

/// Surface area of the unit sphere in ℝᴺ, `2π^{N/2}/Γ(N/2)`.
pub fn sphere_area(dim: usize) -> Result<f64> {
    let nf = dim as f64;
    Ok(2.0 * (nf / 2.0 * PI.ln() - log_gamma(nf / 2.0)?).exp())
}

/// Euclidean upper bound
/// `N/(r s (N−λ)) (ω_{N−1}/N)^{λ/N} [ (λ/N/(1−1/r))^{λ/N} + (λ/N/(1−1/s))^{λ/N} ]`.
pub fn lieb_loss_upper_bound(dim: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    let params = EuclideanParams::new(dim, lambda, r, s)?;
    let nf = params.dim as f64;
    let unit_ball = sphere_area(dim)? / nf;
    Ok(rearrangement_bound(nf, unit_ball, lambda, r, s))
}
