//! Cylindrically symmetric functions `f(|z|, t)` sampled on a `(ρ, t)` grid.
//!
//! `ρ = |z|` runs over a geometric progression and `t` over a uniform
//! symmetric progression. Each node owns the cell `[s_k ± Δs/2] × [t_l ± h/2]`
//! with `s = ln ρ`; the measure `dz dt = ω_{2n−1} ρ^{2n−1} dρ dt` becomes
//! `ω_{2n−1} ρ^{2n} ds dt`, so the node weight is `ω_{2n−1} ρ_k^{2n} Δs h`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HlsError, Result};
use crate::group::homogeneous_dimension;
use crate::special::log_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_rho: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_t: usize,
    pub t_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_rho: 64,
            rho_min: 1e-3,
            rho_max: 50.0,
            n_t: 128,
            t_max: 50.0,
        }
    }
}

impl GridSpec {
    /// Same domain with both spacings halved.
    pub fn refined(&self) -> Self {
        Self {
            n_rho: 2 * self.n_rho - 1,
            n_t: 2 * self.n_t - 1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rho < 4 || self.n_t < 4 {
            return Err(HlsError::invalid("grid needs at least 4 nodes per axis"));
        }
        if !(self.rho_min > 0.0 && self.rho_max > self.rho_min && self.rho_max.is_finite()) {
            return Err(HlsError::invalid("grid rho range must satisfy 0 < rho_min < rho_max"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(HlsError::invalid("grid t_max must be positive"));
        }
        Ok(())
    }
}

/// `ω_{2n−1} = 2πⁿ/(n−1)!`, the area of the unit sphere in ℂⁿ ≅ ℝ²ⁿ.
pub fn complex_sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * (nf * PI.ln() - log_gamma(nf).expect("n >= 1")).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylGrid {
    n: usize,
    spec: GridSpec,
    rho: Vec<f64>,
    t: Vec<f64>,
    ds: f64,
    ht: f64,
    w_rho: Vec<f64>,
}

impl CylGrid {
    pub fn new(n: usize, spec: GridSpec) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(HlsError::invalid("n must be positive"));
        }
        spec.validate()?;
        let s0 = spec.rho_min.ln();
        let ds = (spec.rho_max.ln() - s0) / (spec.n_rho - 1) as f64;
        let rho: Vec<f64> = (0..spec.n_rho).map(|k| (s0 + k as f64 * ds).exp()).collect();
        let ht = 2.0 * spec.t_max / (spec.n_t - 1) as f64;
        let t: Vec<f64> = (0..spec.n_t).map(|l| -spec.t_max + l as f64 * ht).collect();
        let omega = complex_sphere_area(n);
        let w_rho = rho.iter().map(|r| omega * r.powi(2 * n as i32) * ds).collect();
        Ok(Arc::new(Self {
            n,
            spec,
            rho,
            t,
            ds,
            ht,
            w_rho,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_dim(&self) -> f64 {
        homogeneous_dimension(self.n)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn n_t(&self) -> usize {
        self.t.len()
    }

    pub fn len(&self) -> usize {
        self.rho.len() * self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Log-spacing `Δs` of the ρ nodes.
    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// Uniform spacing of the t nodes.
    pub fn ht(&self) -> f64 {
        self.ht
    }

    /// Radial part of the weight, `ω_{2n−1} ρ_k^{2n} Δs`.
    pub fn rho_weight(&self, k: usize) -> f64 {
        self.w_rho[k]
    }

    pub fn weight(&self, k: usize, _l: usize) -> f64 {
        self.w_rho[k] * self.ht
    }

    #[inline]
    pub fn index(&self, k: usize, l: usize) -> usize {
        k * self.t.len() + l
    }

    /// Index of the t node closest to `t` (ties resolved towards smaller |t|).
    pub fn nearest_t(&self, t: f64) -> usize {
        let x = (t - self.t[0]) / self.ht;
        let lo = x.floor().clamp(0.0, (self.t.len() - 1) as f64) as usize;
        let hi = (lo + 1).min(self.t.len() - 1);
        let dl = (self.t[lo] - t).abs();
        let dh = (self.t[hi] - t).abs();
        if dh < dl || (dh == dl && self.t[hi].abs() < self.t[lo].abs()) {
            hi
        } else {
            lo
        }
    }
}

/// A cylindrically symmetric grid function; `values` are stored row-major
/// with ρ as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct CylGridFunction {
    grid: Arc<CylGrid>,
    values: Vec<f64>,
}

impl CylGridFunction {
    pub fn new(grid: Arc<CylGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HlsError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HlsError::invalid("grid function values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<CylGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    /// Samples `f(ρ, t)` at every node.
    pub fn from_fn(grid: Arc<CylGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.rho() {
            for &t in grid.t() {
                values.push(f(r, t));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<CylGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, k: usize, l: usize) -> f64 {
        self.values[self.grid.index(k, l)]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(HlsError::GridMismatch("functions live on different grids".into()))
        }
    }

    /// Weighted sum `Σ w_{kl} g(values_{kl})`.
    pub fn integrate_with(&self, g: impl Fn(f64) -> f64) -> f64 {
        let nt = self.grid.n_t();
        let ht = self.grid.ht();
        self.values
            .chunks(nt)
            .enumerate()
            .map(|(k, row)| self.grid.rho_weight(k) * ht * row.iter().map(|&v| g(v)).sum::<f64>())
            .sum()
    }

    /// `(Σ w |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p > 0.0, "p must be positive");
        if p == 1.0 {
            return self.integrate_with(f64::abs);
        }
        if p == 2.0 {
            return self.integrate_with(|v| v * v).sqrt();
        }
        self.integrate_with(|v| v.abs().powf(p)).powf(1.0 / p)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| g(v)).collect(),
        }
    }

    /// Rescaled to unit `Lᵖ` norm.
    pub fn normalized(&self, p: f64) -> Result<Self> {
        let norm = self.lp_norm(p);
        if !(norm > 0.0) {
            return Err(HlsError::ZeroFunction);
        }
        Ok(self.scaled(1.0 / norm))
    }

    /// Value with the boundary conventions used by interpolation: constant
    /// towards the axis, zero beyond `ρ_max` and beyond `±t_max`.
    fn padded(&self, k: isize, l: isize) -> f64 {
        let nr = self.grid.n_rho() as isize;
        let nt = self.grid.n_t() as isize;
        if k >= nr || l < 0 || l >= nt {
            return 0.0;
        }
        let k = k.max(0) as usize;
        self.values[self.grid.index(k, l as usize)]
    }

    /// Tensor cubic Lagrange interpolation in `(ln ρ, t)`.
    pub fn interpolate(&self, rho: f64, t: f64) -> f64 {
        let g = &self.grid;
        let s0 = g.rho()[0].ln();
        let s = if rho > 0.0 { rho.ln() } else { s0 };
        let x = ((s - s0) / g.ds()).max(0.0);
        let y = (t - g.t()[0]) / g.ht();
        let last_k = (g.n_rho() - 1) as f64;
        let last_l = (g.n_t() - 1) as f64;
        if x > last_k + 1.0 || y < -1.0 || y > last_l + 1.0 {
            return 0.0;
        }
        let k0 = x.floor() as isize;
        let l0 = y.floor() as isize;
        let wx = cubic_weights(x - k0 as f64);
        let wy = cubic_weights(y - l0 as f64);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            let k = k0 - 1 + a as isize;
            let mut row = 0.0;
            for (b, wb) in wy.iter().enumerate() {
                row += wb * self.padded(k, l0 - 1 + b as isize);
            }
            acc += wa * row;
        }
        acc
    }

    /// `d^{-Q/p} f(z/d, (t − a)/d²)` resampled on the same grid: a dilation
    /// by `d` followed by the vertical left translation `(0, a)`. Preserves
    /// `‖·‖_p` up to interpolation error.
    pub fn transformed(&self, d: f64, a: f64, p: f64) -> Self {
        let q_dim = self.grid.q_dim();
        let pref = d.powf(-q_dim / p);
        let g = Arc::clone(&self.grid);
        let mut values = Vec::with_capacity(g.len());
        for &r in g.rho() {
            for &t in g.t() {
                values.push(pref * self.interpolate(r / d, (t - a) / (d * d)));
            }
        }
        Self { grid: g, values }
    }
}

/// Four-point Lagrange weights for nodes at offsets −1, 0, 1, 2.
fn cubic_weights(u: f64) -> [f64; 4] {
    [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ]
}

/// Cell-averaged indicator of the centred ball `{ρ⁴ + t² < R⁴}`: each node
/// carries the measure-weighted fraction of its `(s, t)` cell inside the ball,
/// so that `Σ w · value` reproduces the ball volume.
pub fn ball_indicator(grid: Arc<CylGrid>, radius: f64) -> CylGridFunction {
    let h = grid.ht();
    let ds = grid.ds();
    let two_n = 2 * grid.n() as i32;
    let r4 = radius.powi(4);
    let t_overlap = |rho: f64, t: f64| -> f64 {
        let rem = r4 - rho.powi(4);
        if rem <= 0.0 {
            return 0.0;
        }
        let half = rem.sqrt();
        let lo = (t - 0.5 * h).max(-half);
        let hi = (t + 0.5 * h).min(half);
        ((hi - lo) / h).max(0.0)
    };
    CylGridFunction::from_fn(grid, |rho, t| {
        let s = rho.ln();
        let s_edge = radius.ln();
        let (lo, hi) = (s - 0.5 * ds, s + 0.5 * ds);
        if lo >= s_edge {
            return 0.0;
        }
        let hi = hi.min(s_edge);
        crate::quadrature::gl_integrate(16, lo, hi, |x| (two_n as f64 * (x - s)).exp() * t_overlap(x.exp(), t)) / ds
    })
}
