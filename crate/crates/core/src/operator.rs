//! The discrete fractional integral `I_λ` on cylindrical grid functions
//! (`n = 1`).
//!
//! A grid function is treated as piecewise constant on its `(s, t)` cells.
//! Its image at node `(ρ_i, t_j)` is then
//!
//! ```text
//! (I f)_{ij} = Σ_{k,l} W_{ik}(l − j) f_{kl},
//! W_{ik}(m) = 2π ∫_{cell k} ρ'² ds' · (1/2π)∫dφ ∫_{(m−½)h}^{(m+½)h} |u⁻¹v|^{-λ} dτ,
//! ```
//!
//! which depends on `t` only through the offset `m`. The τ-integral is done
//! in closed form per angle (see [`cell_kernel`]); the `s'` integral uses
//! the midpoint value except on cells adjacent to the singularity, where it
//! is integrated adaptively.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::constants::HlsParams;
use crate::error::{HlsError, Result};
use crate::grid::{CylGrid, CylGridFunction, GridSpec};
use crate::group::GroupPoint;
use crate::kernel::{cell_kernel, check_lambda};
use crate::quadrature::adaptive_gk;

/// Precomputed weights of `I_λ` on one grid.
#[derive(Debug)]
pub struct FractionalIntegral {
    grid: Arc<CylGrid>,
    lambda: f64,
    /// `W_{ik}(m)` stored at `(i·n_ρ + k)·(2n_t − 1) + m + n_t − 1`.
    table: Vec<f64>,
}

fn require_heisenberg_1(grid: &CylGrid) -> Result<()> {
    if grid.n() != 1 {
        return Err(HlsError::invalid(format!(
            "deterministic quadrature is implemented for n = 1 only (got n = {})",
            grid.n()
        )));
    }
    Ok(())
}

/// `2π ∫ ρ'² cell_kernel(ρ_i, ρ', lo, hi) ds'` over `[s_lo, s_hi]`, split at `s_i`.
fn near_entry(rho_i: f64, s_lo: f64, s_hi: f64, s_i: f64, lo: f64, hi: f64, lambda: f64) -> f64 {
    let f = |s: f64| {
        let r = s.exp();
        r * r * cell_kernel(rho_i, r, lo, hi, lambda)
    };
    2.0 * PI * adaptive_gk(f, s_lo, s_hi, &[s_i], 0.0, 1e-9, 200)
}

impl FractionalIntegral {
    /// Builds the weight table. Costs `O(n_ρ² n_t)` kernel cell integrals.
    pub fn new(grid: Arc<CylGrid>, lambda: f64) -> Result<Self> {
        require_heisenberg_1(&grid)?;
        check_lambda(lambda, grid.q_dim())?;
        let nr = grid.n_rho();
        let nt = grid.n_t();
        let width = 2 * nt - 1;
        let h = grid.ht();
        let ds = grid.ds();
        let rho = grid.rho();

        // Symmetric core C_{ik}(m) = cell_kernel(ρ_i, ρ_k, m) for i ≤ k, m ≥ 0.
        let pairs: Vec<(usize, usize)> = (0..nr).flat_map(|i| (i..nr).map(move |k| (i, k))).collect();
        let core: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(i, k)| {
                (0..nt)
                    .map(|m| {
                        let c = m as f64 * h;
                        cell_kernel(rho[i], rho[k], c - 0.5 * h, c + 0.5 * h, lambda)
                    })
                    .collect()
            })
            .collect();
        let mut table = vec![0.0; nr * nr * width];
        for (&(i, k), row) in pairs.iter().zip(&core) {
            for (a, b) in [(i, k), (k, i)] {
                let scale = 2.0 * PI * rho[b] * rho[b] * ds;
                let base = (a * nr + b) * width + nt - 1;
                for (m, &c) in row.iter().enumerate() {
                    table[base + m] = scale * c;
                    table[base - m] = scale * c;
                }
            }
        }

        // Cells touching the singular locus.
        let near: Vec<(usize, usize, isize, f64)> = (0..nr)
            .flat_map(|i| {
                let lo_k = i.saturating_sub(1);
                let hi_k = (i + 1).min(nr - 1);
                (lo_k..=hi_k).flat_map(move |k| (-1isize..=1).map(move |m| (i, k, m)))
            })
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(i, k, m)| {
                let s_k = rho[k].ln();
                let c = m as f64 * h;
                let w = near_entry(
                    rho[i],
                    s_k - 0.5 * ds,
                    s_k + 0.5 * ds,
                    rho[i].ln(),
                    c - 0.5 * h,
                    c + 0.5 * h,
                    lambda,
                );
                (i, k, m, w)
            })
            .collect();
        for (i, k, m, w) in near {
            let idx = ((i * nr + k) * width) as isize + nt as isize - 1 + m;
            table[idx as usize] = w;
        }
        Ok(Self { grid, lambda, table })
    }

    /// Shared instance for `(grid, λ)`; tables are built once per process.
    pub fn cached(grid: &Arc<CylGrid>, lambda: f64) -> Result<Arc<Self>> {
        type Key = (usize, [u64; 3], [usize; 2], u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<FractionalIntegral>>>> = OnceLock::new();
        let spec: &GridSpec = grid.spec();
        let key = (
            grid.n(),
            [spec.rho_min.to_bits(), spec.rho_max.to_bits(), spec.t_max.to_bits()],
            [spec.n_rho, spec.n_t],
            lambda.to_bits(),
        );
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(op) = cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(op));
        }
        // Built outside the lock; a racing duplicate build is harmless.
        let op = Arc::new(Self::new(Arc::clone(grid), lambda)?);
        cache.lock().unwrap().entry(key).or_insert_with(|| Arc::clone(&op));
        Ok(op)
    }

    pub fn grid(&self) -> &Arc<CylGrid> {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `W_{ik}(m)` for `|m| < n_t`.
    pub fn weight(&self, i: usize, k: usize, m: isize) -> f64 {
        let nr = self.grid.n_rho();
        let nt = self.grid.n_t() as isize;
        assert!(m.abs() < nt);
        self.table[((i * nr + k) * (2 * nt as usize - 1)) + (m + nt - 1) as usize]
    }

    fn check(&self, f: &CylGridFunction) -> Result<()> {
        if !Arc::ptr_eq(f.grid(), &self.grid) && **f.grid() != *self.grid {
            return Err(HlsError::GridMismatch("function and operator grids differ".into()));
        }
        Ok(())
    }

    /// `I_λ f` at every grid node.
    pub fn apply(&self, f: &CylGridFunction) -> Result<CylGridFunction> {
        self.check(f)?;
        let nr = self.grid.n_rho();
        let nt = self.grid.n_t();
        let width = 2 * nt - 1;
        let fv = f.values();
        let mut out = vec![0.0; nr * nt];
        out.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            for k in 0..nr {
                let fk = &fv[k * nt..(k + 1) * nt];
                if fk.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let w = &self.table[(i * nr + k) * width..(i * nr + k + 1) * width];
                for (j, o) in row.iter_mut().enumerate() {
                    let wj = &w[nt - 1 - j..2 * nt - 1 - j];
                    *o += dot(wj, fk);
                }
            }
        });
        CylGridFunction::new(Arc::clone(&self.grid), out)
    }

    /// Adjoint of [`apply`](Self::apply) for the weighted inner product
    /// `⟨f, g⟩ = Σ w_{kl} f_{kl} g_{kl}`.
    pub fn apply_adjoint(&self, g: &CylGridFunction) -> Result<CylGridFunction> {
        self.check(g)?;
        let grid = &self.grid;
        let nr = grid.n_rho();
        let nt = grid.n_t();
        let width = 2 * nt - 1;
        let reversed: Vec<Vec<f64>> = g
            .values()
            .chunks(nt)
            .map(|row| row.iter().rev().copied().collect())
            .collect();
        let mut out = vec![0.0; nr * nt];
        out.par_chunks_mut(nt).enumerate().for_each(|(k, row)| {
            let wk = grid.rho_weight(k);
            for (i, gr) in reversed.iter().enumerate() {
                if gr.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let c = grid.rho_weight(i) / wk;
                let w = &self.table[(i * nr + k) * width..(i * nr + k + 1) * width];
                for (l, o) in row.iter_mut().enumerate() {
                    *o += c * dot(&w[l..l + nt], gr);
                }
            }
        });
        CylGridFunction::new(Arc::clone(grid), out)
    }

    /// `½(⟨f, I g⟩ + ⟨g, I f⟩)`.
    pub fn energy(&self, f: &CylGridFunction, g: &CylGridFunction) -> Result<f64> {
        f.check_same_grid(g)?;
        let ig = self.apply(g)?;
        let fig = inner(f, &ig);
        if std::ptr::eq(f, g) || f.values() == g.values() {
            return Ok(fig);
        }
        let if_ = self.apply(f)?;
        Ok(0.5 * (fig + inner(g, &if_)))
    }

    /// `‖I_λ f‖_q / ‖f‖_p`.
    pub fn quotient(&self, f: &CylGridFunction, p: f64, q: f64) -> Result<f64> {
        let norm = f.lp_norm(p);
        if !(norm > 0.0) {
            return Err(HlsError::ZeroFunction);
        }
        Ok(self.apply(f)?.lp_norm(q) / norm)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators: lets the compiler vectorise without reassociating.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for r in 0..4 {
            acc[r] += a[4 * c + r] * b[4 * c + r];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..a.len() {
        s += a[j] * b[j];
    }
    s
}

/// Weighted inner product `Σ w f g`.
pub fn inner(f: &CylGridFunction, g: &CylGridFunction) -> f64 {
    let grid = f.grid();
    let nt = grid.n_t();
    let ht = grid.ht();
    f.values()
        .chunks(nt)
        .zip(g.values().chunks(nt))
        .enumerate()
        .map(|(k, (a, b))| grid.rho_weight(k) * ht * dot(a, b))
        .sum()
}

/// `∬ f(u) g(v) |u⁻¹v|^{-λ} du dv`.
pub fn bilinear_energy(f: &CylGridFunction, g: &CylGridFunction, lambda: f64) -> Result<f64> {
    f.check_same_grid(g)?;
    FractionalIntegral::cached(f.grid(), lambda)?.energy(f, g)
}

/// `‖I_λ f‖_q / ‖f‖_p` with `I_λ f` evaluated on the grid of `f`.
pub fn hls_quotient(f: &CylGridFunction, params: &HlsParams) -> Result<f64> {
    if f.grid().n() != params.n {
        return Err(HlsError::DimensionMismatch {
            left: f.grid().n(),
            right: params.n,
        });
    }
    if f.is_zero() {
        return Err(HlsError::ZeroFunction);
    }
    FractionalIntegral::cached(f.grid(), params.lambda)?.quotient(f, params.p, params.q)
}

/// `I_λ f(u)` at an arbitrary point, with the same cell rule as
/// [`FractionalIntegral`]; at grid nodes the two agree.
pub fn fractional_integral(f: &CylGridFunction, lambda: f64, u: &GroupPoint) -> Result<f64> {
    let grid = f.grid();
    require_heisenberg_1(grid)?;
    check_lambda(lambda, grid.q_dim())?;
    if u.n() != 1 {
        return Err(HlsError::DimensionMismatch { left: u.n(), right: 1 });
    }
    let rho_u = u.z_abs();
    let t_u = u.t();
    let h = grid.ht();
    let ds = grid.ds();
    let nt = grid.n_t();
    let s_u = if rho_u > 0.0 { rho_u.ln() } else { f64::NEG_INFINITY };
    let total: f64 = (0..grid.n_rho())
        .into_par_iter()
        .map(|k| {
            let rho_k = grid.rho()[k];
            let s_k = rho_k.ln();
            let (s_lo, s_hi) = (s_k - 0.5 * ds, s_k + 0.5 * ds);
            let near = (s_u - s_k).abs() < 1.5 * ds;
            let mut acc = 0.0;
            for l in 0..nt {
                let v = f.at(k, l);
                if v == 0.0 {
                    continue;
                }
                let c = grid.t()[l] - t_u;
                let (lo, hi) = (c - 0.5 * h, c + 0.5 * h);
                let w = if near && lo < h && hi > -h {
                    near_entry(rho_u, s_lo, s_hi, s_u, lo, hi, lambda)
                } else {
                    2.0 * PI * rho_k * rho_k * ds * cell_kernel(rho_u, rho_k, lo, hi, lambda)
                };
                acc += w * v;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Arc<CylGrid> {
        CylGrid::new(
            1,
            GridSpec {
                n_rho: 12,
                rho_min: 0.05,
                rho_max: 6.0,
                n_t: 16,
                t_max: 8.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn adjoint_identity() {
        let grid = small_grid();
        let op = FractionalIntegral::new(Arc::clone(&grid), 2.0).unwrap();
        let f = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r * r) - 0.3 * (t - 1.0).powi(2)).exp());
        let g = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| 1.0 / (1.0 + r.powi(4) + t * t));
        let lhs = inner(&g, &op.apply(&f).unwrap());
        let rhs = inner(&op.apply_adjoint(&g).unwrap(), &f);
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_matches_pointwise_evaluation() {
        let grid = small_grid();
        let op = FractionalIntegral::new(Arc::clone(&grid), 1.5).unwrap();
        let f = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r * r) - t * t).exp());
        let img = op.apply(&f).unwrap();
        for &(k, l) in &[(0usize, 7usize), (5, 3), (9, 12)] {
            let u = GroupPoint::new(&[grid.rho()[k]], &[0.0], grid.t()[l]).unwrap();
            let point = fractional_integral(&f, 1.5, &u).unwrap();
            assert!(
                (img.at(k, l) / point - 1.0).abs() < 1e-12,
                "({k},{l}): {} vs {point}",
                img.at(k, l)
            );
        }
    }

    #[test]
    fn energy_is_symmetric_and_linear() {
        let grid = small_grid();
        let f = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r * r) - t * t).exp());
        let g = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r - 1.0).powi(2) - 0.5 * t * t).exp());
        let efg = bilinear_energy(&f, &g, 2.0).unwrap();
        let egf = bilinear_energy(&g, &f, 2.0).unwrap();
        assert!((efg - egf).abs() < 1e-14 * efg);
        let e2 = bilinear_energy(&f.scaled(2.5), &g, 2.0).unwrap();
        assert!((e2 / efg - 2.5).abs() < 1e-12);
        assert_eq!(
            bilinear_energy(&CylGridFunction::zeros(Arc::clone(&grid)), &g, 2.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = small_grid();
        assert!(matches!(
            FractionalIntegral::new(Arc::clone(&grid), 4.0),
            Err(HlsError::LambdaOutOfRange { .. })
        ));
        let g2 = CylGrid::new(2, GridSpec::default()).unwrap();
        assert!(FractionalIntegral::new(g2, 2.0).is_err());
        let params = HlsParams::diagonal(1, 2.0).unwrap();
        assert_eq!(
            hls_quotient(&CylGridFunction::zeros(grid), &params),
            Err(HlsError::ZeroFunction)
        );
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let grid = small_grid();
        let params = HlsParams::diagonal(1, 2.0).unwrap();
        let f = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r * r) - t * t).exp());
        let a = hls_quotient(&f, &params).unwrap();
        let b = hls_quotient(&f.scaled(7.0), &params).unwrap();
        assert!((a / b - 1.0).abs() < 1e-13);
    }
}
