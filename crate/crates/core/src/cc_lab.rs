//! Concentration-compactness diagnostics.
//!
//! A [`DiscreteMeasure`] is either a weighted point cloud on ℍⁿ or a
//! nonnegative cylindrical grid density. For grid densities every ball is
//! centred on the vertical axis, and a node contributes the part of its
//! t-cell that falls inside the ball.
//!
//! Balls are closed: `B_R(c) = {v : |c⁻¹v| ≤ R}`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HlsError, Result};
use crate::grid::{CylGrid, CylGridFunction};
use crate::group::{self, GroupPoint};
use crate::montecarlo::{sample_unit_ball, Geometry};
use crate::quadrature::gl_integrate;

/// Relative tolerance for "total mass equals one".
pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_RADII: [f64; 4] = [0.125, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Atoms { points: Vec<GroupPoint>, masses: Vec<f64> },
    Grid(CylGridFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    n: usize,
    repr: Repr,
    total_mass: f64,
}

impl DiscreteMeasure {
    pub fn from_atoms(n: usize, points: Vec<GroupPoint>, masses: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(HlsError::invalid("n must be positive"));
        }
        if points.len() != masses.len() {
            return Err(HlsError::invalid("need one mass per atom"));
        }
        if let Some(p) = points.iter().find(|p| p.n() != n) {
            return Err(HlsError::DimensionMismatch { left: p.n(), right: n });
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(HlsError::invalid("atom masses must be finite and nonnegative"));
        }
        let total_mass = masses.iter().sum();
        Ok(Self {
            n,
            repr: Repr::Atoms { points, masses },
            total_mass,
        })
    }

    /// Measure with density `values` against the grid weights.
    pub fn from_density(density: CylGridFunction) -> Result<Self> {
        if density.values().iter().any(|&v| v < 0.0) {
            return Err(HlsError::NegativeProfile);
        }
        let total_mass = density.integrate_with(|v| v);
        Ok(Self {
            n: density.grid().n(),
            repr: Repr::Grid(density),
            total_mass,
        })
    }

    /// The measure `|f|^p du`.
    pub fn from_profile(f: &CylGridFunction, p: f64) -> Result<Self> {
        Self::from_density(f.map(|v| v.abs().powf(p)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        if !(self.total_mass > 0.0) {
            return Err(HlsError::ZeroFunction);
        }
        let c = 1.0 / self.total_mass;
        let repr = match &self.repr {
            Repr::Atoms { points, masses } => Repr::Atoms {
                points: points.clone(),
                masses: masses.iter().map(|m| m * c).collect(),
            },
            Repr::Grid(d) => Repr::Grid(d.scaled(c)),
        };
        let mut out = Self {
            n: self.n,
            repr,
            total_mass: 0.0,
        };
        out.total_mass = out.recount();
        Ok(out)
    }

    fn recount(&self) -> f64 {
        match &self.repr {
            Repr::Atoms { masses, .. } => masses.iter().sum(),
            Repr::Grid(d) => d.integrate_with(|v| v),
        }
    }

    pub fn atoms(&self) -> Option<(&[GroupPoint], &[f64])> {
        match &self.repr {
            Repr::Atoms { points, masses } => Some((points, masses)),
            Repr::Grid(_) => None,
        }
    }

    pub fn density(&self) -> Option<&CylGridFunction> {
        match &self.repr {
            Repr::Grid(d) => Some(d),
            Repr::Atoms { .. } => None,
        }
    }

    /// Left translation `v ↦ g·v` of a point cloud.
    pub fn translated(&self, g: &GroupPoint) -> Result<Self> {
        match &self.repr {
            Repr::Atoms { points, masses } => {
                let moved = points.iter().map(|p| g.multiply(p)).collect::<Result<Vec<_>>>()?;
                Self::from_atoms(self.n, moved, masses.clone())
            }
            Repr::Grid(_) => Err(HlsError::invalid("grid measures cannot be translated")),
        }
    }

    /// Probe centres used when none are given: the atoms, or the axis
    /// points at the grid's t-nodes and t-cell edges (so that `t = 0` is a
    /// probe for either parity of `n_t`), listed by increasing `|t|`.
    pub fn default_probes(&self) -> Vec<GroupPoint> {
        match &self.repr {
            Repr::Atoms { points, .. } => points.clone(),
            Repr::Grid(d) => {
                let g = d.grid();
                let t_max = g.spec().t_max;
                let half = 0.5 * g.ht();
                let mut ts: Vec<f64> = (0..2 * g.n_t() - 1)
                    .map(|i| {
                        let t = -t_max + i as f64 * half;
                        if t.abs() < 1e-9 * half {
                            0.0
                        } else {
                            t
                        }
                    })
                    .collect();
                ts.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
                ts.into_iter().map(|t| GroupPoint::vertical(self.n, t)).collect()
            }
        }
    }

    /// `μ(B_R(center))`.
    pub fn mass_in_ball(&self, center: &GroupPoint, radius: f64) -> Result<f64> {
        check_radius(radius)?;
        if center.n() != self.n {
            return Err(HlsError::DimensionMismatch {
                left: center.n(),
                right: self.n,
            });
        }
        match &self.repr {
            Repr::Atoms { points, masses } => Ok(points
                .iter()
                .zip(masses)
                .filter(|(p, _)| group::distance(self.n, center.coords(), p.coords()) <= radius)
                .map(|(_, m)| m)
                .sum()),
            Repr::Grid(d) => {
                let c = axis_height(center)?;
                Ok(GridMass::new(d).ball(c, radius))
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(HlsError::invalid("radius must be positive and finite"));
    }
    Ok(())
}

/// `t` of a centre on the vertical axis.
fn axis_height(center: &GroupPoint) -> Result<f64> {
    if center.z_abs() != 0.0 {
        return Err(HlsError::invalid(
            "balls around grid measures must be centred on the axis z = 0",
        ));
    }
    Ok(center.t())
}

/// Row prefix sums of a grid density for fast on-axis ball masses.
struct GridMass<'a> {
    density: &'a CylGridFunction,
    grid: &'a Arc<CylGrid>,
    prefix: Vec<Vec<f64>>,
}

impl<'a> GridMass<'a> {
    fn new(density: &'a CylGridFunction) -> Self {
        let grid = density.grid();
        let prefix = density
            .values()
            .chunks(grid.n_t())
            .map(|row| {
                let mut acc = 0.0;
                let mut p = Vec::with_capacity(row.len() + 1);
                p.push(0.0);
                for v in row {
                    acc += v;
                    p.push(acc);
                }
                p
            })
            .collect();
        Self { density, grid, prefix }
    }

    /// `Σ_l d_{kl} |cell_l ∩ [a, b]|` for row `k`.
    fn row_interval(&self, k: usize, a: f64, b: f64) -> f64 {
        let nt = self.grid.n_t();
        let h = self.grid.ht();
        let left = self.grid.t()[0] - 0.5 * h;
        let xa = ((a - left) / h).clamp(0.0, nt as f64);
        let xb = ((b - left) / h).clamp(0.0, nt as f64);
        if xb <= xa {
            return 0.0;
        }
        let la = (xa.floor() as usize).min(nt - 1);
        let lb = xb.floor() as usize;
        let row = |l: usize| self.density.at(k, l);
        if lb == la {
            return row(la) * (xb - xa) * h;
        }
        let mut s = row(la) * (la as f64 + 1.0 - xa) + (self.prefix[k][lb] - self.prefix[k][la + 1]);
        if lb < nt {
            s += row(lb) * (xb - lb as f64);
        }
        s * h
    }

    /// On-axis ball mass. The row whose `s`-cell straddles `ln R` is
    /// integrated over the part of the cell inside the ball.
    fn ball(&self, c: f64, radius: f64) -> f64 {
        let r4 = radius.powi(4);
        let ds = self.grid.ds();
        let s_edge = radius.ln();
        let two_n = 2.0 * self.grid.n() as f64;
        let mut total = 0.0;
        for (k, &rho) in self.grid.rho().iter().enumerate() {
            let s = rho.ln();
            if s - 0.5 * ds >= s_edge {
                break;
            }
            let row = |x: f64| {
                let half = (r4 - (4.0 * x).exp()).max(0.0).sqrt();
                self.row_interval(k, c - half, c + half)
            };
            let m = if s + 0.5 * ds <= s_edge {
                row(s)
            } else {
                gl_integrate(8, s - 0.5 * ds, s_edge, |x| (two_n * (x - s)).exp() * row(x)) / ds
            };
            total += self.grid.rho_weight(k) * m;
        }
        total
    }
}

/// Sup over `probes` of `μ(B_R(probe))`, together with the first maximising
/// probe in the given order.
pub fn concentration_center(
    mu: &DiscreteMeasure,
    radius: f64,
    probes: Option<&[GroupPoint]>,
) -> Result<(f64, GroupPoint)> {
    let (m, c, _) = best_probe(mu, radius, None, probes)?;
    Ok((m, c))
}

/// Lexicographic argmax of `(μ(B_r(c)), μ(B_tie(c)))` over the probes; the
/// result does not depend on where the measure sits in the group.
fn best_probe(
    mu: &DiscreteMeasure,
    radius: f64,
    tie_radius: Option<f64>,
    probes: Option<&[GroupPoint]>,
) -> Result<(f64, GroupPoint, f64)> {
    check_radius(radius)?;
    if let Some(r) = tie_radius {
        check_radius(r)?;
    }
    let owned;
    let probes = match probes {
        Some(p) => p,
        None => {
            owned = mu.default_probes();
            &owned
        }
    };
    if probes.is_empty() {
        return Err(HlsError::invalid("probe set is empty"));
    }
    let grid_mass = mu.density().map(GridMass::new);
    let mass = |c: &GroupPoint, r: f64| match &grid_mass {
        Some(gm) => Ok(gm.ball(axis_height(c)?, r)),
        None => mu.mass_in_ball(c, r),
    };
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for (idx, c) in probes.iter().enumerate() {
        let m = mass(c, radius)?;
        if m < best.0 {
            continue;
        }
        let tie = match tie_radius {
            Some(r) => mass(c, r)?,
            None => 0.0,
        };
        if m > best.0 || tie > best.1 {
            best = (m, tie, idx);
        }
    }
    Ok((best.0, probes[best.2].clone(), best.1))
}

/// Levy concentration `Q(R) = sup_c μ(B_R(c))` over the probe set.
pub fn levy_concentration(mu: &DiscreteMeasure, radius: f64, probes: Option<&[GroupPoint]>) -> Result<f64> {
    Ok(concentration_center(mu, radius, probes)?.0)
}

/// `Q(R)` at each radius.
pub fn levy_profile(mu: &DiscreteMeasure, radii: &[f64], probes: Option<&[GroupPoint]>) -> Result<Vec<f64>> {
    radii.iter().map(|&r| levy_concentration(mu, r, probes)).collect()
}

/// Restriction of `mu` to `B_R(center)` and to its complement. Grid nodes
/// are assigned whole to one side.
pub fn dichotomy_split(
    mu: &DiscreteMeasure,
    center: &GroupPoint,
    radius: f64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    check_radius(radius)?;
    if center.n() != mu.n {
        return Err(HlsError::DimensionMismatch {
            left: center.n(),
            right: mu.n,
        });
    }
    match &mu.repr {
        Repr::Atoms { points, masses } => {
            let mut inside = (Vec::new(), Vec::new());
            let mut outside = (Vec::new(), Vec::new());
            for (p, &m) in points.iter().zip(masses) {
                let side = if group::distance(mu.n, center.coords(), p.coords()) <= radius {
                    &mut inside
                } else {
                    &mut outside
                };
                side.0.push(p.clone());
                side.1.push(m);
            }
            Ok((
                DiscreteMeasure::from_atoms(mu.n, inside.0, inside.1)?,
                DiscreteMeasure::from_atoms(mu.n, outside.0, outside.1)?,
            ))
        }
        Repr::Grid(d) => {
            let c = axis_height(center)?;
            let grid = Arc::clone(d.grid());
            let r4 = radius.powi(4);
            let mask = CylGridFunction::from_fn(Arc::clone(&grid), |rho, t| {
                if rho.powi(4) + (t - c).powi(2) <= r4 {
                    1.0
                } else {
                    0.0
                }
            });
            let (a, b): (Vec<f64>, Vec<f64>) = d
                .values()
                .iter()
                .zip(mask.values())
                .map(|(&v, &m)| if m == 1.0 { (v, 0.0) } else { (0.0, v) })
                .unzip();
            Ok((
                DiscreteMeasure::from_density(CylGridFunction::new(Arc::clone(&grid), a)?)?,
                DiscreteMeasure::from_density(CylGridFunction::new(grid, b)?)?,
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Vanishing,
    Compactness,
    Dichotomy,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrichotomyVerdict {
    pub kind: VerdictKind,
    /// Mass within `R_max` of the tracked centre, averaged over the last
    /// third of the sequence.
    pub k_hat: f64,
    /// `k_hat` when the verdict is a dichotomy.
    pub k: Option<f64>,
    pub eps: f64,
    pub radii: Vec<f64>,
    /// Levy profile `Q(R)` averaged over the last third of the sequence.
    pub profile: Vec<f64>,
    /// Tracked centre of every measure (empty for vanishing).
    pub centers: Vec<GroupPoint>,
    pub tracked_mass: Vec<f64>,
    /// Masses of the split of the last measure (dichotomy only).
    pub split_masses: Option<[f64; 2]>,
    #[serde(skip)]
    pub split: Option<(DiscreteMeasure, DiscreteMeasure)>,
}

/// Classifies a sequence of probability measures as vanishing, compact or
/// splitting.
///
/// Each measure is tracked through its densest point: the probe maximising
/// the mass at the smallest radius, ties going to the larger mass at the
/// largest radius. `k̂` is the mass within the largest
/// radius of that centre, averaged over the last third of the sequence;
/// `k̂ < ε` is vanishing, `k̂ > 1 − ε` compactness, anything else a
/// dichotomy with `k = k̂`. In a dichotomy the reported `k` is therefore the
/// mass of the most concentrated piece, which need not be the heavier one.
pub fn classify_trichotomy(seq: &[DiscreteMeasure], eps: f64, radii: &[f64]) -> Result<TrichotomyVerdict> {
    if seq.len() < 3 {
        return Err(HlsError::invalid("need a sequence of at least 3 measures"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(HlsError::invalid("eps must lie in (0, 1/2)"));
    }
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HlsError::invalid("radii must be positive and strictly increasing"));
    }
    let n = seq[0].n;
    for mu in seq {
        if mu.n != n {
            return Err(HlsError::DimensionMismatch { left: mu.n, right: n });
        }
        if !mu.is_normalized() {
            return Err(HlsError::Unnormalized(mu.total_mass));
        }
    }
    let r_min = radii[0];
    let r_max = *radii.last().unwrap();
    let mut centers = Vec::with_capacity(seq.len());
    let mut tracked_mass = Vec::with_capacity(seq.len());
    for mu in seq {
        let (_, c, m) = best_probe(mu, r_min, Some(r_max), None)?;
        tracked_mass.push(m);
        centers.push(c);
    }
    let start = seq.len() - seq.len().div_ceil(3);
    let tail = seq.len() - start;
    let k_hat = tracked_mass[start..].iter().sum::<f64>() / tail as f64;
    let mut profile = vec![0.0; radii.len()];
    for mu in &seq[start..] {
        for (acc, q) in profile.iter_mut().zip(levy_profile(mu, radii, None)?) {
            *acc += q / tail as f64;
        }
    }
    let kind = if k_hat < eps {
        VerdictKind::Vanishing
    } else if k_hat > 1.0 - eps {
        VerdictKind::Compactness
    } else {
        VerdictKind::Dichotomy
    };
    let (k, split, split_masses) = if kind == VerdictKind::Dichotomy {
        let (a, b) = dichotomy_split(seq.last().unwrap(), centers.last().unwrap(), r_max)?;
        let masses = [a.total_mass, b.total_mass];
        (Some(k_hat), Some((a, b)), Some(masses))
    } else {
        (None, None, None)
    };
    if kind == VerdictKind::Vanishing {
        centers.clear();
    }
    Ok(TrichotomyVerdict {
        kind,
        k_hat,
        k,
        eps,
        radii: radii.to_vec(),
        profile,
        centers,
        tracked_mass,
        split_masses,
        split,
    })
}

/// `∫ | |f_j|^p − |f − f_j|^p − |f|^p |`.
pub fn brezis_lieb_defect(fj: &CylGridFunction, f: &CylGridFunction, p: f64) -> Result<f64> {
    fj.check_same_grid(f)?;
    if !(p > 0.0) {
        return Err(HlsError::invalid("p must be positive"));
    }
    let diff: Vec<f64> = fj
        .values()
        .iter()
        .zip(f.values())
        .map(|(&a, &b)| (a.abs().powf(p) - (b - a).abs().powf(p) - b.abs().powf(p)).abs())
        .collect();
    Ok(CylGridFunction::new(Arc::clone(fj.grid()), diff)?.integrate_with(|v| v))
}

/// `1 − k^{q/p} − (1 − k)^{q/p}`.
pub fn strict_subadditivity_gap(k: f64, p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(HlsError::invalid("k must lie in [0, 1]"));
    }
    if !(p > 0.0 && q > p) {
        return Err(HlsError::invalid("need q > p > 0"));
    }
    let e = q / p;
    Ok(1.0 - k.powf(e) - (1.0 - k).powf(e))
}

/// Synthetic sequence families with known verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    /// A point cloud in `B_{1/2}` dilated by `j`: vanishing.
    Spread,
    /// A peaked cloud left-translated to a random point of norm `3j`:
    /// compactness, with the translations as centres.
    Translate,
    /// A tight cluster of mass `k` and a diffuse cloud of mass `1 − k`
    /// moving apart at distance `3j`: dichotomy with the cluster tracked.
    Split { k: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Spread => "spread",
            Generator::Translate => "translate",
            Generator::Split { .. } => "split",
        }
    }
}

fn cloud(n: usize, count: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let geom = Geometry::Heisenberg { n };
    (0..count)
        .map(|_| {
            let mut x = vec![0.0; 2 * n + 1];
            sample_unit_ball(geom, rng, &mut x);
            group::dilate_in_place(n, radius, &mut x);
            x
        })
        .collect()
}

fn left_translate(n: usize, g: &[f64], pts: &[Vec<f64>]) -> Result<Vec<GroupPoint>> {
    pts.iter()
        .map(|x| {
            let mut out = vec![0.0; 2 * n + 1];
            group::compose(n, g, x, &mut out);
            GroupPoint::from_coords(n, out)
        })
        .collect()
}

/// A point of norm `r` in a uniformly random direction.
fn random_point(n: usize, r: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; 2 * n + 1];
    let r1 = sample_unit_ball(Geometry::Heisenberg { n }, rng, &mut x);
    group::dilate_in_place(n, r / r1, &mut x);
    x
}

/// Translations used by [`Generator::Translate`] for `(n, len, seed)`.
pub fn translate_centers(n: usize, len: usize, seed: u64) -> Vec<GroupPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cloud(n, 200, 0.4, &mut rng);
    (1..=len)
        .map(|j| GroupPoint::from_coords(n, random_point(n, 3.0 * j as f64, &mut rng)).expect("finite"))
        .collect()
}

/// `len` normalized measures of the given family.
pub fn generate(generator: Generator, n: usize, len: usize, seed: u64) -> Result<Vec<DiscreteMeasure>> {
    if n == 0 || len == 0 {
        return Err(HlsError::invalid("n and the sequence length must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq = Vec::with_capacity(len);
    match generator {
        Generator::Spread => {
            let base = cloud(n, 200, 0.5, &mut rng);
            let masses = vec![1.0 / 200.0; 200];
            for j in 1..=len {
                let pts = base
                    .iter()
                    .map(|x| {
                        let mut y = x.clone();
                        group::dilate_in_place(n, j as f64, &mut y);
                        GroupPoint::from_coords(n, y)
                    })
                    .collect::<Result<Vec<_>>>()?;
                seq.push(DiscreteMeasure::from_atoms(n, pts, masses.clone())?);
            }
        }
        Generator::Translate => {
            let mut base = vec![vec![0.0; 2 * n + 1]];
            base.extend(cloud(n, 200, 0.4, &mut rng));
            let mut masses = vec![0.2];
            masses.extend(std::iter::repeat_n(0.8 / 200.0, 200));
            for j in 1..=len {
                let u = random_point(n, 3.0 * j as f64, &mut rng);
                seq.push(DiscreteMeasure::from_atoms(
                    n,
                    left_translate(n, &u, &base)?,
                    masses.clone(),
                )?);
            }
        }
        Generator::Split { k } => {
            if !(k > 0.0 && k < 1.0) {
                return Err(HlsError::invalid("split mass k must lie in (0, 1)"));
            }
            let mut tight = vec![vec![0.0; 2 * n + 1]];
            tight.extend(cloud(n, 20, 0.03, &mut rng));
            let diffuse = cloud(n, 200, 0.4, &mut rng);
            let shift = random_point(n, 2.0, &mut rng);
            let mut masses = vec![0.5 * k];
            masses.extend(std::iter::repeat_n(0.5 * k / 20.0, 20));
            masses.extend(std::iter::repeat_n((1.0 - k) / 200.0, 200));
            for j in 1..=len {
                let mut a = vec![0.0; 2 * n + 1];
                let mut b = vec![0.0; 2 * n + 1];
                a[0] = -1.5 * j as f64;
                b[0] = 1.5 * j as f64;
                let mut pts = left_translate(n, &a, &tight)?;
                pts.extend(left_translate(n, &b, &diffuse)?);
                let g = GroupPoint::from_coords(n, shift.clone())?;
                let mu = DiscreteMeasure::from_atoms(n, pts, masses.clone())?.translated(&g)?;
                seq.push(mu);
            }
        }
    }
    seq.into_iter().map(|mu| mu.normalized()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use proptest::prelude::*;

    fn pt(x: f64, t: f64) -> GroupPoint {
        GroupPoint::new(&[x], &[0.0], t).unwrap()
    }

    #[test]
    fn unit_atom() {
        let mu = DiscreteMeasure::from_atoms(1, vec![GroupPoint::identity(1)], vec![1.0]).unwrap();
        for r in [1e-6, 0.5, 3.0] {
            assert_eq!(levy_concentration(&mu, r, None).unwrap(), 1.0);
        }
    }

    #[test]
    fn two_atoms_at_distance_ten() {
        let mu = DiscreteMeasure::from_atoms(1, vec![pt(0.0, 0.0), pt(10.0, 0.0)], vec![0.5, 0.5]).unwrap();
        assert_eq!(levy_concentration(&mu, 4.9, None).unwrap(), 0.5);
        assert_eq!(levy_concentration(&mu, 9.99, None).unwrap(), 0.5);
        assert_eq!(levy_concentration(&mu, 10.0, None).unwrap(), 1.0);
    }

    #[test]
    fn grid_ball_mass_matches_indicator_volume() {
        let grid = CylGrid::new(1, GridSpec::default()).unwrap();
        let ones = CylGridFunction::from_fn(Arc::clone(&grid), |_, _| 1.0);
        let mu = DiscreteMeasure::from_density(ones).unwrap();
        let m = mu.mass_in_ball(&GroupPoint::identity(1), 2.0).unwrap();
        let exact = group::ball_volume(1).unwrap() * 16.0;
        assert!((m / exact - 1.0).abs() < 5e-3, "{m} vs {exact}");
        let shifted = mu.mass_in_ball(&GroupPoint::vertical(1, 3.3), 2.0).unwrap();
        assert!((shifted / m - 1.0).abs() < 1e-12);
        assert!(mu.mass_in_ball(&pt(0.1, 0.0), 1.0).is_err());
    }

    #[test]
    fn grid_split_partitions_exactly() {
        let grid = CylGrid::new(1, GridSpec::default()).unwrap();
        let f = CylGridFunction::from_fn(grid, |r, t| (-(r * r) - (t - 1.0).powi(2)).exp());
        let mu = DiscreteMeasure::from_profile(&f, 1.5).unwrap();
        let c = GroupPoint::vertical(1, 1.0);
        let (a, b) = dichotomy_split(&mu, &c, 1.2).unwrap();
        assert!((a.total_mass() + b.total_mass() - mu.total_mass()).abs() < 1e-12 * mu.total_mass());
        let da = a.density().unwrap();
        let g = da.grid();
        for k in 0..g.n_rho() {
            for l in 0..g.n_t() {
                if da.at(k, l) > 0.0 {
                    assert!(g.rho()[k].powi(4) + (g.t()[l] - 1.0).powi(2) <= 1.2f64.powi(4));
                }
            }
        }
    }

    #[test]
    fn atom_split_clauses() {
        let seq = generate(Generator::Split { k: 0.3 }, 1, 4, 9).unwrap();
        let mu = &seq[3];
        let (_, c) = concentration_center(mu, 0.125, None).unwrap();
        let (a, b) = dichotomy_split(mu, &c, 1.0).unwrap();
        assert!((a.total_mass() + b.total_mass() - 1.0).abs() < 1e-12);
        for p in a.atoms().unwrap().0 {
            assert!(c.distance(p).unwrap() <= 1.0);
        }
        for p in b.atoms().unwrap().0 {
            assert!(c.distance(p).unwrap() > 1.0);
        }
        let (all, none) = dichotomy_split(mu, &c, 1e3).unwrap();
        assert_eq!(all.total_mass(), mu.total_mass());
        assert_eq!(none.total_mass(), 0.0);
    }

    #[test]
    fn classifier_rejections() {
        let seq = generate(Generator::Spread, 1, 5, 1).unwrap();
        assert!(classify_trichotomy(&seq[..2], 0.05, &DEFAULT_RADII).is_err());
        let mut bad = seq.clone();
        bad[1] = DiscreteMeasure::from_atoms(1, vec![GroupPoint::identity(1)], vec![2.0]).unwrap();
        assert!(matches!(
            classify_trichotomy(&bad, 0.05, &DEFAULT_RADII),
            Err(HlsError::Unnormalized(_))
        ));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(strict_subadditivity_gap(0.0, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(strict_subadditivity_gap(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((strict_subadditivity_gap(0.5, 1.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(strict_subadditivity_gap(0.5, 2.0, 2.0).is_err());
        assert!(strict_subadditivity_gap(1.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn defect_zero_cases() {
        let grid = CylGrid::new(1, GridSpec::default()).unwrap();
        let f = CylGridFunction::from_fn(Arc::clone(&grid), |r, t| (-(r * r) - t * t).exp());
        assert_eq!(brezis_lieb_defect(&f, &f, 4.0 / 3.0).unwrap(), 0.0);
        // p = 1, 0 ≤ f ≤ f_j
        let fj = f.map(|v| 1.5 * v);
        assert!(brezis_lieb_defect(&fj, &f, 1.0).unwrap() < 1e-15);
    }

    proptest! {
        #[test]
        fn concentration_monotone_and_bounded(seed in 0u64..200, r in 0.05..3.0f64, dr in 0.0..2.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = cloud(1, 30, 2.0, &mut rng)
                .into_iter()
                .map(|x| GroupPoint::from_coords(1, x).unwrap())
                .collect();
            let masses: Vec<f64> = (0..30).map(|i| ((i * 7 + seed as usize) % 5) as f64 + 0.5).collect();
            let mu = DiscreteMeasure::from_atoms(1, pts, masses).unwrap();
            let a = levy_concentration(&mu, r, None).unwrap();
            let b = levy_concentration(&mu, r + dr, None).unwrap();
            prop_assert!(a <= b);
            prop_assert!(b <= mu.total_mass() * (1.0 + 1e-12));
        }

        #[test]
        fn gap_positive_inside(k in 1e-6..(1.0 - 1e-6f64), ratio in 1.01..5.0f64) {
            prop_assert!(strict_subadditivity_gap(k, 1.0, ratio).unwrap() > 0.0);
        }
    }
}
