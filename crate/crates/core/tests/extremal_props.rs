use hls_core::cc_lab::{levy_profile, DiscreteMeasure};
use hls_core::extremal::{
    align, euler_lagrange_step, extremal_h, gaussian_profile, maximize, perturbed_h, renormalize_concentration,
    MaximizeOptions,
};
use hls_core::operator::hls_quotient;
use hls_core::HlsError;
use hls_core::{CylGrid, CylGridFunction, GridSpec, HlsParams};

fn lp_distance(f: &CylGridFunction, g: &CylGridFunction, p: f64) -> f64 {
    let diff = CylGridFunction::new(
        f.grid().clone(),
        f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect(),
    )
    .unwrap();
    diff.lp_norm(p)
}

#[test]
fn fixed_point_residual_shrinks_under_refinement() {
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let mut spec = GridSpec {
        n_rho: 16,
        rho_min: 1e-3,
        rho_max: 50.0,
        n_t: 32,
        t_max: 50.0,
    };
    let mut residuals = Vec::new();
    for _ in 0..3 {
        let grid = CylGrid::new(1, spec).unwrap();
        let h = extremal_h(grid, 2.0).unwrap().normalized(params.p).unwrap();
        let next = euler_lagrange_step(&h, &params).unwrap();
        residuals.push(lp_distance(&next, &h, params.p));
        spec = spec.refined();
    }
    eprintln!("residuals {residuals:?}");
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn iterates_keep_mass_and_respect_sharp_constant() {
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let grid = CylGrid::new(1, GridSpec::default()).unwrap();
    let radii = [1.0, 2.0, 4.0, 8.0];
    let mut f = gaussian_profile(grid).normalized(params.p).unwrap();
    let mut eps = vec![0.0f64; radii.len()];
    for _ in 0..8 {
        f = renormalize_concentration(&euler_lagrange_step(&f, &params).unwrap(), &params)
            .unwrap()
            .f;
        let q = hls_quotient(&f, &params).unwrap();
        assert!(q <= 4.0 * 1.02, "quotient {q}");
        let mu = DiscreteMeasure::from_profile(&f, params.p).unwrap();
        let profile = levy_profile(&mu, &radii, None).unwrap();
        for (e, qr) in eps.iter_mut().zip(&profile) {
            *e = e.max(1.0 - qr);
        }
    }
    eprintln!("eps(R) {eps:?}");
    assert!(eps.windows(2).all(|w| w[1] <= w[0]), "{eps:?}");
    assert!(eps[3] < 0.05, "{eps:?}");
}

#[test]
fn dilated_start_reaches_the_same_profile() {
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let grid = CylGrid::new(1, GridSpec::default()).unwrap();
    let init = perturbed_h(grid, 2.0, 0.3).unwrap();
    let opts = MaximizeOptions::default();
    let a = maximize(&params, &init, &opts).unwrap();
    let b = maximize(&params, &init.transformed(0.6, 0.0, params.p), &opts).unwrap();
    assert!((a.quotient - b.quotient).abs() <= 1e-3);
    let al = align(&a.f_star, &b.f_star, params.p).unwrap();
    eprintln!("quotients {} {}, align {al:?}", a.quotient, b.quotient);
    assert!(al.rel_error < 1e-2, "{al:?}");
    for run in [&a, &b] {
        assert!(run.converged);
        assert!(run.trace.is_nondecreasing());
        let last = run.trace.records.last().unwrap();
        assert!((last.q1_concentration - 0.5).abs() <= 1e-3);
        assert!(run
            .trace
            .records
            .iter()
            .all(|r| r.quotient.is_finite() && r.dilation > 0.0));
    }
}

#[test]
fn coarse_t_spacing_cannot_renormalize() {
    // t-spacing near 1.8 leaves no dilation with half the mass in the unit ball.
    let params = HlsParams::diagonal(1, 2.0).unwrap();
    let spec = GridSpec {
        n_rho: 28,
        n_t: 56,
        ..GridSpec::default()
    };
    let h = extremal_h(CylGrid::new(1, spec).unwrap(), 2.0)
        .unwrap()
        .normalized(params.p)
        .unwrap();
    let err = renormalize_concentration(&h, &params).unwrap_err();
    assert!(matches!(err, HlsError::Vanishing(_)), "{err:?}");
}
