use hls_core::extremal::{extremal_h, gaussian_profile, perturbed_h};
use hls_core::group::ball_volume;
use hls_core::montecarlo::{mc_bilinear_energy, Geometry, McOptions};
use hls_core::operator::{bilinear_energy, hls_quotient};
use hls_core::{CylGrid, CylGridFunction, GridSpec, HlsParams};

fn h_point(u: &[f64]) -> f64 {
    let z2 = u[0] * u[0] + u[1] * u[1];
    ((1.0 + z2).powi(2) + u[2] * u[2]).powf(-1.5)
}

#[test]
fn truncating_the_domain_stays_within_tail_bound() {
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let full = CylGrid::new(1, GridSpec::default()).unwrap();
    // Nested sub-grid: same nodes, fewer of them.
    let k_max = 59;
    let n_t = 64;
    let t_max = (n_t - 1) as f64 * full.ht() / 2.0;
    let inner = CylGrid::new(
        1,
        GridSpec {
            n_rho: k_max + 1,
            rho_min: full.rho()[0],
            rho_max: full.rho()[k_max],
            n_t,
            t_max,
        },
    )
    .unwrap();
    let off = (full.n_t() - n_t) / 2;
    assert!((inner.t()[0] - full.t()[off]).abs() < 1e-9);

    let h_full = extremal_h(full.clone(), 2.0).unwrap();
    let h_inner = extremal_h(inner.clone(), 2.0).unwrap();
    let e_full = bilinear_energy(&h_full, &h_full, 2.0).unwrap();
    let e_inner = bilinear_energy(&h_inner, &h_inner, 2.0).unwrap();

    // H ≤ |u|^{-6}, so ∫_{|u|>T} H^p ≤ |B₁| T^{-4}; the cut region lies
    // outside |u| = min(ρ_max, √t_max).
    let cut = inner.rho().last().unwrap().min(t_max.sqrt());
    let tail = (ball_volume(1).unwrap() * cut.powi(-4)).powf(1.0 / params.p);
    let norm = h_full.lp_norm(params.p);
    let bound = 4.0 * (2.0 * norm * tail + tail * tail);
    let diff = e_full - e_inner;
    assert!(diff >= 0.0, "positive kernel: removing mass lowers the energy");
    assert!(diff <= bound, "diff {diff} > bound {bound}");
}

#[test]
fn quotient_family_stays_below_sharp_constant() {
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let grid = CylGrid::new(1, GridSpec::default()).unwrap();
    let mut family = vec![
        gaussian_profile(grid.clone()),
        extremal_h(grid.clone(), 2.0).unwrap(),
        perturbed_h(grid.clone(), 2.0, 0.3).unwrap(),
        perturbed_h(grid.clone(), 2.0, 0.8).unwrap(),
    ];
    for alpha in [1.2, 2.0, 3.0] {
        family.push(CylGridFunction::from_fn(grid.clone(), move |rho, t| {
            ((1.0 + rho * rho).powi(2) + t * t).powf(-alpha)
        }));
    }
    for width in [0.3, 3.0] {
        family.push(CylGridFunction::from_fn(grid.clone(), move |rho, t| {
            (-(rho * rho + t.abs()) / width).exp()
        }));
    }
    for f in &family {
        let q = hls_quotient(f, &params).unwrap();
        assert!(q > 0.0 && q <= 4.0 * 1.02, "quotient {q}");
    }
}

#[test]
fn grid_energy_agrees_with_monte_carlo() {
    let grid = CylGrid::new(1, GridSpec::default()).unwrap();
    let h = extremal_h(grid, 2.0).unwrap();
    let det = bilinear_energy(&h, &h, 2.0).unwrap();
    let mc = mc_bilinear_energy(
        h_point,
        h_point,
        2.0,
        Geometry::Heisenberg { n: 1 },
        &McOptions::with(1_000_000, 9, 4),
    )
    .unwrap();
    // Allow the known grid bias (below 1%) on top of the sampling error.
    assert!(
        (mc.estimate - det).abs() <= 3.0 * mc.stderr + 0.01 * det,
        "grid {det}, MC {} ± {}",
        mc.estimate,
        mc.stderr
    );
}
