//! Importance-sampled Monte Carlo estimates for any `n`, with a flat
//! Euclidean mode sharing the same sampler.
//!
//! Points are plain coordinate slices (`2n + 1` reals on ℍⁿ, `N` reals in
//! ℝᴺ). The bilinear energy is written as
//! `∬ f(u) g(u·w) |w|^{-λ} du dw` and `u`, `w` are drawn independently:
//!
//! * `w` from a half/half mixture of a near component with radial density
//!   `∝ r^{Q−1−λ}` on `(0, r₀]`, which cancels the kernel singularity, and a
//!   Pareto tail `∝ r^{-2}` beyond `r₀`;
//! * `u` from a half/half mixture of the uniform ball of radius `s` and the
//!   same Pareto tail beyond `s`.
//!
//! Directions come from rejection sampling of the unit ball followed by a
//! dilation onto the requested norm, so a point of norm `r` has density
//! `p_R(r) / (Q |B₁| r^{Q−1})`.
//!
//! Worker `w` draws its share of the samples from ChaCha8 stream `w` and
//! the partial moments are merged in worker order, so results depend only
//! on `(seed, workers, samples)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{lieb_diagonal_constant, sphere_area, LiebVariant};
use crate::error::{HlsError, Result};
use crate::group::{self, homogeneous_dimension};
use crate::special::log_gamma;

pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Geometry {
    Heisenberg { n: usize },
    Euclidean { dim: usize },
}

impl Geometry {
    fn validate(self) -> Result<()> {
        match self {
            Geometry::Heisenberg { n: 0 } | Geometry::Euclidean { dim: 0 } => {
                Err(HlsError::invalid("dimension must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Number of real coordinates.
    pub fn coords(self) -> usize {
        match self {
            Geometry::Heisenberg { n } => 2 * n + 1,
            Geometry::Euclidean { dim } => dim,
        }
    }

    /// Scaling dimension of the measure.
    pub fn q_dim(self) -> f64 {
        match self {
            Geometry::Heisenberg { n } => homogeneous_dimension(n),
            Geometry::Euclidean { dim } => dim as f64,
        }
    }

    pub fn unit_ball_volume(self) -> Result<f64> {
        match self {
            Geometry::Heisenberg { n } => group::ball_volume(n),
            Geometry::Euclidean { dim } => Ok(sphere_area(dim)? / dim as f64),
        }
    }

    pub fn compose(self, u: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            Geometry::Heisenberg { n } => group::compose(n, u, v, out),
            Geometry::Euclidean { .. } => {
                for ((o, a), b) in out.iter_mut().zip(u).zip(v) {
                    *o = a + b;
                }
            }
        }
    }

    pub fn norm(self, u: &[f64]) -> f64 {
        match self {
            Geometry::Heisenberg { n } => group::norm(n, u),
            Geometry::Euclidean { .. } => u.iter().map(|c| c * c).sum::<f64>().sqrt(),
        }
    }

    pub fn distance(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Geometry::Heisenberg { n } => group::distance(n, u, v),
            Geometry::Euclidean { .. } => u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        }
    }

    pub fn dilate(self, d: f64, u: &mut [f64]) {
        match self {
            Geometry::Heisenberg { n } => group::dilate_in_place(n, d, u),
            Geometry::Euclidean { .. } => u.iter_mut().for_each(|c| *c *= d),
        }
    }
}

/// Mean and standard error of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `|estimate − x|` in units of the standard error.
    pub fn z_score(&self, x: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.estimate == x {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - x).abs() / self.stderr
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    /// Number of independent random streams (not threads).
    pub workers: usize,
    /// Edge `r₀` of the near-diagonal component of the `w` proposal.
    pub near_radius: f64,
    /// Radius `s` of the uniform component of the `u` proposal.
    pub spread: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
            workers: 1,
            near_radius: 1.0,
            spread: 1.0,
        }
    }
}

impl McOptions {
    pub fn with(samples: u64, seed: u64, workers: usize) -> Self {
        Self {
            samples,
            seed,
            workers,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(HlsError::invalid(format!("need at least {MIN_SAMPLES} samples")));
        }
        if self.workers == 0 {
            return Err(HlsError::invalid("workers must be positive"));
        }
        if !(self.near_radius > 0.0 && self.spread > 0.0) {
            return Err(HlsError::invalid("proposal radii must be positive"));
        }
        Ok(())
    }
}

/// Running mean / sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Self {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }

    fn estimate(self) -> McEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            estimate: self.mean,
            stderr: (var / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

fn run_streams<F>(opts: &McOptions, sample: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let workers = opts.workers as u64;
    let base = opts.samples / workers;
    let extra = opts.samples % workers;
    let parts: Vec<Moments> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(w);
            let count = base + u64::from(w < extra);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(sample(&mut rng));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge).estimate()
}

/// Two-component radial law: `a r^{a−1}/r₀^a` on `(0, r₀]` and
/// `γ r₀^γ r^{−γ−1}` beyond, each with weight ½.
#[derive(Clone, Copy)]
struct RadialMixture {
    r0: f64,
    a: f64,
    gamma: f64,
}

impl RadialMixture {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        if rng.gen::<bool>() {
            self.r0 * u.powf(1.0 / self.a)
        } else {
            self.r0 * u.powf(-1.0 / self.gamma)
        }
    }

    fn density(&self, r: f64) -> f64 {
        if r <= self.r0 {
            0.5 * self.a * (r / self.r0).powf(self.a - 1.0) / self.r0
        } else {
            0.5 * self.gamma * (self.r0 / r).powf(self.gamma + 1.0) / self.r0
        }
    }
}

/// Sampler for points with a prescribed radial law.
struct PointSampler {
    geom: Geometry,
    radial: RadialMixture,
    /// `Q |B₁|`.
    sphere: f64,
}

impl PointSampler {
    fn new(geom: Geometry, radial: RadialMixture) -> Result<Self> {
        Ok(Self {
            geom,
            radial,
            sphere: geom.q_dim() * geom.unit_ball_volume()?,
        })
    }

    /// Fills `out` and returns `(norm, density)`.
    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) -> (f64, f64) {
        let r = self.radial.sample(rng);
        let r1 = sample_unit_ball(self.geom, rng, out);
        self.geom.dilate(r / r1, out);
        let q = self.geom.q_dim();
        (r, self.radial.density(r) / (self.sphere * r.powf(q - 1.0)))
    }
}

/// Uniform point of the open unit ball (rejection from the cube
/// `[−1, 1]^d`, which contains it in both geometries); returns its norm.
pub fn sample_unit_ball(geom: Geometry, rng: &mut impl Rng, out: &mut [f64]) -> f64 {
    loop {
        for c in out.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let r = geom.norm(out);
        if r < 1.0 && r > 0.0 {
            return r;
        }
    }
}

fn check_lambda(geom: Geometry, lambda: f64) -> Result<()> {
    let q = geom.q_dim();
    if !(lambda > 0.0 && lambda < q) || !lambda.is_finite() {
        return Err(HlsError::LambdaOutOfRange { lambda, q });
    }
    Ok(())
}

fn kernel_sampler(geom: Geometry, lambda: f64, opts: &McOptions) -> Result<PointSampler> {
    PointSampler::new(
        geom,
        RadialMixture {
            r0: opts.near_radius,
            a: geom.q_dim() - lambda,
            gamma: 1.0,
        },
    )
}

/// `∬ f(u) g(v) |u⁻¹v|^{-λ} du dv`.
pub fn mc_bilinear_energy<F, G>(f: F, g: G, lambda: f64, geom: Geometry, opts: &McOptions) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    geom.validate()?;
    check_lambda(geom, lambda)?;
    opts.validate()?;
    let w_sampler = kernel_sampler(geom, lambda, opts)?;
    let u_sampler = PointSampler::new(
        geom,
        RadialMixture {
            r0: opts.spread,
            a: geom.q_dim(),
            gamma: 1.0,
        },
    )?;
    let d = geom.coords();
    Ok(run_streams(opts, |rng| {
        let mut u = vec![0.0; d];
        let mut w = vec![0.0; d];
        let mut v = vec![0.0; d];
        let (_, pu) = u_sampler.sample(rng, &mut u);
        let (rw, pw) = w_sampler.sample(rng, &mut w);
        let fu = f(&u);
        if fu == 0.0 {
            return 0.0;
        }
        geom.compose(&u, &w, &mut v);
        fu * g(&v) * rw.powf(-lambda) / (pu * pw)
    }))
}

/// `I_λ f(u₀) = ∫ f(u₀·w) |w|^{-λ} dw`.
pub fn mc_fractional_integral<F>(f: F, lambda: f64, u0: &[f64], geom: Geometry, opts: &McOptions) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    geom.validate()?;
    check_lambda(geom, lambda)?;
    opts.validate()?;
    if u0.len() != geom.coords() {
        return Err(HlsError::DimensionMismatch {
            left: u0.len(),
            right: geom.coords(),
        });
    }
    let sampler = kernel_sampler(geom, lambda, opts)?;
    let d = geom.coords();
    Ok(run_streams(opts, |rng| {
        let mut w = vec![0.0; d];
        let mut v = vec![0.0; d];
        let (rw, pw) = sampler.sample(rng, &mut w);
        geom.compose(u0, &w, &mut v);
        f(&v) * rw.powf(-lambda) / pw
    }))
}

/// Volume of the ball `{v : |c⁻¹v| ≤ R}` by hit-or-miss sampling of a box
/// containing it.
pub fn mc_ball_volume(geom: Geometry, radius: f64, center: &[f64], opts: &McOptions) -> Result<McEstimate> {
    geom.validate()?;
    opts.validate()?;
    if !(radius > 0.0) {
        return Err(HlsError::invalid("radius must be positive"));
    }
    if center.len() != geom.coords() {
        return Err(HlsError::DimensionMismatch {
            left: center.len(),
            right: geom.coords(),
        });
    }
    let mut half = vec![radius; geom.coords()];
    if let Geometry::Heisenberg { n } = geom {
        let zc = center[..2 * n].iter().map(|c| c * c).sum::<f64>().sqrt();
        half[2 * n] = radius * radius + 2.0 * zc * radius;
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let est = run_streams(opts, |rng| {
        let v: Vec<f64> = center
            .iter()
            .zip(&half)
            .map(|(c, h)| c + rng.gen_range(-1.0..1.0) * h)
            .collect();
        if geom.distance(center, &v) < radius {
            box_volume
        } else {
            0.0
        }
    });
    Ok(est)
}

/// Outcome of the Euclidean extremal experiment that decides which power of
/// π belongs in the diagonal sharp constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiebVariantCheck {
    pub dim: usize,
    pub lambda: f64,
    pub quotient: McEstimate,
    pub dimension_scaled: f64,
    pub standard: f64,
    pub selected: LiebVariant,
}

/// Estimates `E[f, f] / ‖f‖_r²` for `f = (1 + |x|²)^{-(2N−λ)/2}` in ℝᴺ,
/// `r = 2N/(2N−λ)`, and picks the constant variant it is closer to.
pub fn resolve_lieb_variant(dim: usize, lambda: f64, opts: &McOptions) -> Result<LiebVariantCheck> {
    let geom = Geometry::Euclidean { dim };
    geom.validate()?;
    let nf = dim as f64;
    let dimension_scaled = lieb_diagonal_constant(dim, lambda, LiebVariant::DimensionScaled)?;
    let standard = lieb_diagonal_constant(dim, lambda, LiebVariant::Standard)?;
    let expo = -(2.0 * nf - lambda) / 2.0;
    let f = |x: &[f64]| (1.0 + x.iter().map(|c| c * c).sum::<f64>()).powf(expo);
    let energy = mc_bilinear_energy(f, f, lambda, geom, opts)?;
    // ‖f‖_r^r = ∫ (1 + |x|²)^{-N} dx = π^{N/2} Γ(N/2) / Γ(N)
    let r = 2.0 * nf / (2.0 * nf - lambda);
    let ln_norm_r = 0.5 * nf * std::f64::consts::PI.ln() + log_gamma(nf / 2.0)? - log_gamma(nf)?;
    let norm_sq = (2.0 / r * ln_norm_r).exp();
    let quotient = McEstimate {
        estimate: energy.estimate / norm_sq,
        stderr: energy.stderr / norm_sq,
        samples: energy.samples,
    };
    let selected = if quotient.z_score(standard) <= quotient.z_score(dimension_scaled) {
        LiebVariant::Standard
    } else {
        LiebVariant::DimensionScaled
    };
    Ok(LiebVariantCheck {
        dim,
        lambda,
        quotient,
        dimension_scaled,
        standard,
        selected,
    })
}
