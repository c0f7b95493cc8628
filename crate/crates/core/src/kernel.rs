//! The kernel `|u⁻¹v|^{-λ}` and its reductions for cylindrically symmetric
//! functions on ℍ¹.
//!
//! Writing `u = (ρ e^{iα}, t)`, `v = (ρ' e^{iβ}, t')`, `φ = β − α` and
//! `τ = t' − t`, the group law gives
//!
//! ```text
//! |u⁻¹v|⁴ = A(φ)² + (τ + B(φ))²,   A = ρ² + ρ'² − 2ρρ' cos φ,   B = 2ρρ' sin φ.
//! ```
//!
//! Only the average over φ enters integrals of cylindrical functions.

use std::f64::consts::PI;

use crate::error::{HlsError, Result};
use crate::group::GroupPoint;
use crate::quadrature::{adaptive_gk, gl_integrate};

pub(crate) fn check_lambda(lambda: f64, q_dim: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < q_dim) || !lambda.is_finite() {
        return Err(HlsError::LambdaOutOfRange { lambda, q: q_dim });
    }
    Ok(())
}

/// `|u⁻¹v|^{-λ}`; `+∞` when `u = v`.
pub fn riesz_kernel(u: &GroupPoint, v: &GroupPoint, lambda: f64) -> Result<f64> {
    check_lambda(lambda, crate::group::homogeneous_dimension(u.n()))?;
    let d = u.distance(v)?;
    if d == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(d.powf(-lambda))
}

/// `|z − z'|² = (ρ − ρ')² + 4ρρ' sin²(φ/2)`, free of cancellation near φ = 0.
#[inline]
fn z_gap_sq(rho: f64, rho2: f64, phi: f64) -> f64 {
    let h = (0.5 * phi).sin();
    (rho - rho2) * (rho - rho2) + 4.0 * rho * rho2 * h * h
}

#[inline]
fn quartic(rho: f64, rho2: f64, tau: f64, phi: f64) -> f64 {
    let a = z_gap_sq(rho, rho2, phi);
    let b = tau + 2.0 * rho * rho2 * phi.sin();
    a * a + b * b
}

/// Periodic trapezoid rule on `[−π, π)` with node doubling until two
/// successive estimates agree to `rel_tol`. Returns `None` if `max_nodes`
/// is reached first. The result is the mean value over the circle.
pub fn periodic_trapezoid_mean(
    f: &mut impl FnMut(f64) -> f64,
    m0: usize,
    rel_tol: f64,
    max_nodes: usize,
) -> Option<f64> {
    let m0 = m0.max(4);
    let mut m = m0;
    let mut sum: f64 = (0..m).map(|j| f(-PI + 2.0 * PI * j as f64 / m as f64)).sum();
    let mut mean = sum / m as f64;
    while 2 * m <= max_nodes {
        // midpoints of the current nodes
        let h = 2.0 * PI / m as f64;
        let extra: f64 = (0..m).map(|j| f(-PI + h * (j as f64 + 0.5))).sum();
        sum += extra;
        m *= 2;
        let next = sum / m as f64;
        if (next - mean).abs() <= rel_tol * next.abs() {
            return Some(next);
        }
        mean = next;
    }
    None
}

/// Angles in `(−π, π]` where `sin φ = x`, if any.
fn asin_pair(x: f64) -> Vec<f64> {
    if x.abs() > 1.0 {
        return Vec::new();
    }
    let a = x.asin();
    let b = if a >= 0.0 { PI - a } else { -PI - a };
    vec![a, b]
}

/// `(1/2π) ∫₀^{2π} (A² + (τ + B)²)^{-λ/4} dφ` for `n = 1`.
///
/// Starts from a periodic trapezoid rule with `m` nodes, doubling until
/// converged; near the singular locus `ρ ≈ ρ'`, `τ ≈ 0` it switches to
/// adaptive Gauss–Kronrod split at the peaks of the integrand. Returns
/// `+∞` at the singular point itself.
pub fn angular_average_kernel(rho: f64, rho2: f64, tau: f64, lambda: f64, m: usize) -> Result<f64> {
    check_lambda(lambda, 4.0)?;
    if !(rho >= 0.0 && rho2 >= 0.0) {
        return Err(HlsError::invalid("radii must be nonnegative"));
    }
    let e = -lambda / 4.0;
    if rho == 0.0 || rho2 == 0.0 {
        let r = rho.max(rho2);
        let w = r.powi(4) + tau * tau;
        return Ok(if w == 0.0 { f64::INFINITY } else { w.powf(e) });
    }
    if rho == rho2 && tau == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut f = |phi: f64| quartic(rho, rho2, tau, phi).powf(e);
    if let Some(v) = periodic_trapezoid_mean(&mut f, m, 1e-12, 4096) {
        return Ok(v);
    }
    let mut breaks = vec![0.0];
    breaks.extend(asin_pair(-tau / (2.0 * rho * rho2)));
    let total = adaptive_gk(f, -PI, PI, &breaks, 0.0, 1e-12, 4000);
    Ok(total / (2.0 * PI))
}

/// `∫_a^b (A² + x²)^{-λ/4} dx` for `A ≥ 0`.
pub fn line_integral(a: f64, lo: f64, hi: f64, lambda: f64) -> f64 {
    let c = 1.0 - lambda / 2.0;
    if a <= 0.0 {
        // ∫ |x|^{c-1} dx
        let prim = |x: f64| -> f64 {
            if c == 0.0 {
                x.abs().ln() * x.signum()
            } else {
                x.signum() * x.abs().powf(c) / c
            }
        };
        if c <= 0.0 && lo <= 0.0 && hi >= 0.0 {
            return f64::INFINITY;
        }
        if c == 0.0 {
            return (hi.abs() / lo.abs()).ln().abs();
        }
        return prim(hi) - prim(lo);
    }
    let va = (lo / a).asinh();
    let vb = (hi / a).asinh();
    if c == 0.0 {
        return vb - va;
    }
    a.powf(c) * cosh_pow_integral(c, va, vb)
}

const COSH_SPLIT: f64 = 3.0;

/// `∫_a^b cosh(v)^c dv` for `|c| < 1`, `a ≤ b`.
pub fn cosh_pow_integral(c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    // left tail (−∞, −S]: by symmetry equals ∫_{S}^{∞} with reflected limits
    if a < -COSH_SPLIT {
        let hi = b.min(-COSH_SPLIT);
        total += cosh_pow_tail(c, -hi, -a);
    }
    let mid_lo = a.max(-COSH_SPLIT);
    let mid_hi = b.min(COSH_SPLIT);
    if mid_hi > mid_lo {
        let panels = ((mid_hi - mid_lo) / 1.5).ceil().max(1.0) as usize;
        let w = (mid_hi - mid_lo) / panels as f64;
        for j in 0..panels {
            let x0 = mid_lo + j as f64 * w;
            total += gl_integrate(8, x0, x0 + w, |v| (c * ln_cosh(v)).exp());
        }
    }
    if b > COSH_SPLIT {
        let lo = a.max(COSH_SPLIT);
        total += cosh_pow_tail(c, lo, b);
    }
    total
}

#[inline]
fn ln_cosh(v: f64) -> f64 {
    let x = v.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `∫_a^b cosh(v)^c dv` for `S ≤ a ≤ b ≤ ∞` from the binomial series of
/// `2^{-c} e^{cv} (1 + e^{-2v})^c`.
fn cosh_pow_tail(c: f64, a: f64, b: f64) -> f64 {
    let mut coef = 1.0;
    let mut total = 0.0;
    for k in 0..8 {
        if k > 0 {
            coef *= (c - (k as f64 - 1.0)) / k as f64;
        }
        let rate = c - 2.0 * k as f64;
        let term = if b.is_infinite() {
            -(rate * a).exp() / rate
        } else {
            (rate * a).exp() * ((rate * (b - a)).exp_m1() / rate)
        };
        total += coef * term;
    }
    total * (-c * std::f64::consts::LN_2).exp()
}

/// Average over φ of the kernel integrated over the τ-interval `[lo, hi]`:
/// `(1/2π) ∫ dφ ∫_lo^hi (A² + (τ + B)²)^{-λ/4} dτ`.
pub fn cell_kernel(rho: f64, rho2: f64, lo: f64, hi: f64, lambda: f64) -> f64 {
    if rho == 0.0 || rho2 == 0.0 {
        let r = rho.max(rho2);
        return line_integral(r * r, lo, hi, lambda);
    }
    let rr = rho * rho2;
    let mut f = |phi: f64| {
        let a = z_gap_sq(rho, rho2, phi);
        let b = 2.0 * rr * phi.sin();
        line_integral(a, lo + b, hi + b, lambda)
    };
    // Smooth cases: the φ-peak at 0 has width ~|ρ−ρ'|/√(ρρ') and the edge
    // transitions have width ~A; both are resolved by a modest trapezoid rule
    // when ρ and ρ' are well separated.
    let sep = (rho - rho2).abs() / rr.sqrt();
    if sep > 0.6 {
        if let Some(v) = periodic_trapezoid_mean(&mut f, 16, 1e-11, 512) {
            return v;
        }
    }
    let mut breaks = vec![0.0];
    breaks.extend(asin_pair(-lo / (2.0 * rr)));
    breaks.extend(asin_pair(-hi / (2.0 * rr)));
    adaptive_gk(f, -PI, PI, &breaks, 1e-300, 1e-11, 2000) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_average(rho: f64, rho2: f64, tau: f64, lambda: f64, nodes: usize) -> f64 {
        let h = 2.0 * PI / nodes as f64;
        (0..nodes)
            .map(|j| quartic(rho, rho2, tau, -PI + (j as f64 + 0.5) * h).powf(-lambda / 4.0))
            .sum::<f64>()
            / nodes as f64
    }

    #[test]
    fn riesz_kernel_examples() {
        let e = GroupPoint::identity(1);
        let v = GroupPoint::new(&[1.0], &[0.0], 0.0).unwrap();
        assert!((riesz_kernel(&e, &v, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(riesz_kernel(&v, &v, 2.0).unwrap(), f64::INFINITY);
        assert!(riesz_kernel(&e, &v, 4.0).is_err());
        let u = GroupPoint::new(&[0.3], &[-0.7], 1.1).unwrap();
        let w = GroupPoint::new(&[-1.3], &[0.2], -0.4).unwrap();
        let k = riesz_kernel(&u, &w, 1.7).unwrap();
        assert!((k - riesz_kernel(&w, &u, 1.7).unwrap()).abs() < 1e-14 * k);
        let d = 1.9;
        let kd = riesz_kernel(&u.dilate(d).unwrap(), &w.dilate(d).unwrap(), 1.7).unwrap();
        assert!((kd - d.powf(-1.7) * k).abs() < 1e-13 * kd);
    }

    #[test]
    fn angular_average_matches_brute_force() {
        let reference = brute_average(1.0, 2.0, 0.0, 2.0, 1_000_000);
        let got = angular_average_kernel(1.0, 2.0, 0.0, 2.0, 32).unwrap();
        assert!((got / reference - 1.0).abs() < 1e-10, "{got} vs {reference}");
        for &(r1, r2, tau, lam) in &[(0.5, 0.52, 0.01, 2.0), (1.0, 1.05, -0.2, 3.5), (2.0, 0.1, 3.0, 0.5)] {
            let reference = brute_average(r1, r2, tau, lam, 1_000_000);
            let got = angular_average_kernel(r1, r2, tau, lam, 32).unwrap();
            assert!((got / reference - 1.0).abs() < 1e-7, "{got} vs {reference}");
        }
    }

    #[test]
    fn angular_average_special_cases() {
        let got = angular_average_kernel(1.5, 0.0, 0.7, 2.0, 16).unwrap();
        assert!((got - (1.5f64.powi(4) + 0.49).powf(-0.5)).abs() < 1e-15);
        let a = angular_average_kernel(0.8, 1.3, 0.4, 2.5, 32).unwrap();
        let b = angular_average_kernel(0.8, 1.3, -0.4, 2.5, 32).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert_eq!(angular_average_kernel(1.0, 1.0, 0.0, 2.0, 16).unwrap(), f64::INFINITY);
    }

    #[test]
    fn cosh_pow_integral_against_quadrature() {
        for &c in &[-0.9, -0.5, 0.3, 0.75] {
            for &(a, b) in &[(-0.5, 0.7), (-10.0, 2.0), (1.0, 25.0), (-30.0, -4.0), (3.5, 3.6)] {
                let reference = adaptive_gk(|v: f64| v.cosh().powf(c), a, b, &[], 0.0, 1e-14, 5000);
                let got = cosh_pow_integral(c, a, b);
                assert!(
                    (got / reference - 1.0).abs() < 1e-11,
                    "c={c} [{a},{b}]: {got} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn line_integral_closed_forms() {
        // λ = 2: asinh
        let got = line_integral(0.5, -1.0, 2.0, 2.0);
        assert!((got - ((4.0f64).asinh() + (2.0f64).asinh())).abs() < 1e-14);
        // λ = 4: ∫ dx/(A²+x²) = atan(x/A)/A
        let got = line_integral(0.5, -1.0, 2.0, 3.999_999_999);
        let exact = ((4.0f64).atan() + (2.0f64).atan()) / 0.5;
        assert!((got / exact - 1.0).abs() < 1e-7);
        assert!((line_integral(0.0, 1.0, 4.0, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cell_kernel_against_nested_quadrature() {
        for &(r1, r2, lo, hi, lam) in &[
            (1.0, 1.2, -0.4, 0.4, 2.0),
            (1.0, 1.0, -0.4, 0.4, 2.5),
            (0.05, 0.06, 0.1, 0.9, 1.0),
            (3.0, 0.5, -2.0, -1.0, 3.0),
        ] {
            let got = cell_kernel(r1, r2, lo, hi, lam);
            // τ = ±x² removes the τ^{-1/2}-type endpoint behaviour at τ = 0.
            let k = |tau: f64| angular_average_kernel(r1, r2, tau, lam, 64).unwrap();
            let side = |a: f64, b: f64, sign: f64| {
                adaptive_gk(|x| 2.0 * x * k(sign * x * x), a.sqrt(), b.sqrt(), &[], 0.0, 1e-10, 4000)
            };
            let reference = if lo >= 0.0 {
                side(lo, hi, 1.0)
            } else if hi <= 0.0 {
                side(-hi, -lo, -1.0)
            } else {
                side(0.0, hi, 1.0) + side(0.0, -lo, -1.0)
            };
            assert!((got / reference - 1.0).abs() < 1e-6, "{got} vs {reference}");
        }
    }
}
