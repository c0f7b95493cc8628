//! Heisenberg group arithmetic.
//!
//! A point `u = (z, t)` of ℍⁿ is stored as a flat array of `2n + 1` reals:
//! `[x_1, …, x_n, y_1, …, y_n, t]` with `z_j = x_j + i y_j`. The group law is
//!
//! ```text
//! (z, t)(z', t') = (z + z', t + t' + 2 Im(z · z̄'))
//! ```
//!
//! where `Im(z · z̄') = Σ_j (y_j x'_j − x_j y'_j)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HlsError, Result};
use crate::special::log_gamma;

/// Homogeneous dimension `Q = 2n + 2`.
pub fn homogeneous_dimension(n: usize) -> f64 {
    (2 * n + 2) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    n: usize,
    coords: Vec<f64>,
}

impl GroupPoint {
    /// Builds a point from `x`, `y` (each of length `n`) and `t`.
    pub fn new(x: &[f64], y: &[f64], t: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(HlsError::invalid(format!(
                "x and y must have the same positive length, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        let mut coords = Vec::with_capacity(2 * x.len() + 1);
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        coords.push(t);
        Self::from_coords(x.len(), coords)
    }

    /// Builds a point from its flat coordinate vector `[x, y, t]`.
    pub fn from_coords(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(HlsError::invalid("n must be positive"));
        }
        if coords.len() != 2 * n + 1 {
            return Err(HlsError::invalid(format!(
                "expected {} coordinates for n={n}, got {}",
                2 * n + 1,
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(HlsError::invalid("coordinates must be finite"));
        }
        Ok(Self { n, coords })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "n must be positive");
        Self {
            n,
            coords: vec![0.0; 2 * n + 1],
        }
    }

    /// Point on the vertical axis, `(0, t)`.
    pub fn vertical(n: usize, t: f64) -> Self {
        let mut p = Self::identity(n);
        p.coords[2 * n] = t;
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.n..2 * self.n]
    }

    pub fn t(&self) -> f64 {
        self.coords[2 * self.n]
    }

    /// `|z|`.
    pub fn z_abs(&self) -> f64 {
        self.coords[..2 * self.n].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(HlsError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = vec![0.0; self.coords.len()];
        compose(self.n, &self.coords, &other.coords, &mut out);
        Ok(Self { n: self.n, coords: out })
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// `δ_d u = (d z, d² t)`, restricted to `d > 0`.
    pub fn dilate(&self, d: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(HlsError::invalid(format!("dilation factor must be positive, got {d}")));
        }
        let mut coords = self.coords.clone();
        dilate_in_place(self.n, d, &mut coords);
        Ok(Self { n: self.n, coords })
    }

    /// Homogeneous norm `(|z|⁴ + t²)^{1/4}`.
    pub fn norm(&self) -> f64 {
        norm(self.n, &self.coords)
    }

    /// Left-invariant distance `|u⁻¹ v|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_n(other)?;
        Ok(distance(self.n, &self.coords, &other.coords))
    }
}

/// Writes `u · v` into `out`; all slices have length `2n + 1`.
#[inline]
pub fn compose(n: usize, u: &[f64], v: &[f64], out: &mut [f64]) {
    let mut im = 0.0;
    for j in 0..n {
        let (x, y) = (u[j], u[n + j]);
        let (xp, yp) = (v[j], v[n + j]);
        im += y * xp - x * yp;
    }
    for k in 0..2 * n {
        out[k] = u[k] + v[k];
    }
    out[2 * n] = u[2 * n] + v[2 * n] + 2.0 * im;
}

#[inline]
pub fn dilate_in_place(n: usize, d: f64, u: &mut [f64]) {
    for c in &mut u[..2 * n] {
        *c *= d;
    }
    u[2 * n] *= d * d;
}

#[inline]
pub fn norm(n: usize, u: &[f64]) -> f64 {
    let z2: f64 = u[..2 * n].iter().map(|c| c * c).sum();
    let t = u[2 * n];
    (z2 * z2 + t * t).sqrt().sqrt()
}

/// `|u⁻¹ v|` without allocating.
#[inline]
pub fn distance(n: usize, u: &[f64], v: &[f64]) -> f64 {
    // u⁻¹v = (z' − z, t' − t − 2 Im(z · z̄'))
    let mut z2 = 0.0;
    let mut im = 0.0;
    for j in 0..n {
        let dx = v[j] - u[j];
        let dy = v[n + j] - u[n + j];
        z2 += dx * dx + dy * dy;
        im += u[n + j] * v[j] - u[j] * v[n + j];
    }
    let t = v[2 * n] - u[2 * n] - 2.0 * im;
    (z2 * z2 + t * t).sqrt().sqrt()
}

/// Volume of the unit ball `{|u| < 1}` of ℍⁿ.
pub fn ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(HlsError::invalid("n must be positive"));
    }
    let q = homogeneous_dimension(n);
    let log_num = (PI.ln()) * (q - 2.0) / 2.0 + log_gamma(0.5)? + log_gamma((q + 2.0) / 4.0)?;
    let log_den = log_gamma((q - 2.0) / 2.0)? + log_gamma((q + 4.0) / 4.0)?;
    Ok(2.0 / (q - 2.0) * (log_num - log_den).exp())
}
