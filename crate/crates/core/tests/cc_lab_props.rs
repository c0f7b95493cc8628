use hls_core::cc_lab::{
    brezis_lieb_defect, classify_trichotomy, dichotomy_split, generate, DiscreteMeasure, Generator, DEFAULT_EPS,
    DEFAULT_RADII,
};
use hls_core::{CylGrid, CylGridFunction, GridSpec, GroupPoint};
use proptest::prelude::*;

fn arb_point() -> impl Strategy<Value = GroupPoint> {
    prop::collection::vec(-3.0..3.0f64, 3).prop_map(|c| GroupPoint::from_coords(1, c).unwrap())
}

fn small_grid() -> std::sync::Arc<CylGrid> {
    CylGrid::new(
        1,
        GridSpec {
            n_rho: 12,
            rho_min: 0.01,
            rho_max: 5.0,
            n_t: 10,
            t_max: 5.0,
        },
    )
    .unwrap()
}

fn integral_pow(f: &CylGridFunction, p: f64) -> f64 {
    f.integrate_with(|v| v.abs().powf(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verdicts_survive_left_translation(seed in 0u64..1000, g in arb_point(), family in 0usize..3) {
        let gen = [Generator::Spread, Generator::Translate, Generator::Split { k: 0.3 }][family];
        let seq = generate(gen, 1, 6, seed).unwrap();
        let moved: Vec<DiscreteMeasure> = seq.iter().map(|m| m.translated(&g).unwrap()).collect();
        let a = classify_trichotomy(&seq, DEFAULT_EPS, &DEFAULT_RADII).unwrap();
        let b = classify_trichotomy(&moved, DEFAULT_EPS, &DEFAULT_RADII).unwrap();
        prop_assert_eq!(a.kind, b.kind);
        prop_assert!((a.k_hat - b.k_hat).abs() <= 1e-9);
        for (pa, pb) in a.profile.iter().zip(&b.profile) {
            prop_assert!((pa - pb).abs() <= 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn split_parts_partition_the_measure(
        pts in prop::collection::vec(arb_point(), 1..40),
        center in arb_point(),
        radius in 0.1..4.0f64,
    ) {
        let masses: Vec<f64> = (0..pts.len()).map(|i| 1.0 + (i % 3) as f64).collect();
        let mu = DiscreteMeasure::from_atoms(1, pts, masses).unwrap();
        let (inside, outside) = dichotomy_split(&mu, &center, radius).unwrap();
        prop_assert!((inside.total_mass() + outside.total_mass() - mu.total_mass()).abs() <= 1e-12 * mu.total_mass());
        let (ip, _) = inside.atoms().unwrap();
        let (op, _) = outside.atoms().unwrap();
        prop_assert_eq!(ip.len() + op.len(), mu.atoms().unwrap().0.len());
        prop_assert!(ip.iter().all(|v| center.distance(v).unwrap() <= radius));
        prop_assert!(op.iter().all(|v| center.distance(v).unwrap() > radius));
    }

    #[test]
    fn defect_bounded_by_norms_for_nonnegative_inputs(
        a in prop::collection::vec(0.0..1.0f64, 120),
        b in prop::collection::vec(0.0..1.0f64, 120),
        p in 0.5..4.0f64,
    ) {
        let grid = small_grid();
        let fj = CylGridFunction::new(grid.clone(), a).unwrap();
        let f = CylGridFunction::new(grid, b).unwrap();
        let d = brezis_lieb_defect(&fj, &f, p).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(d <= integral_pow(&fj, p) + 2.0 * integral_pow(&f, p) + 1e-12);
    }

    #[test]
    fn defect_bounded_by_norms_for_signed_inputs(
        a in prop::collection::vec(-1.0..1.0f64, 120),
        b in prop::collection::vec(-1.0..1.0f64, 120),
        p in 0.5..4.0f64,
    ) {
        let grid = small_grid();
        let fj = CylGridFunction::new(grid.clone(), a).unwrap();
        let f = CylGridFunction::new(grid, b).unwrap();
        let d = brezis_lieb_defect(&fj, &f, p).unwrap();
        // |f − f_j|^p ≤ max(1, 2^{p−1}) (|f|^p + |f_j|^p)
        let c = 2f64.powf(p - 1.0).max(1.0);
        let (nj, nf) = (integral_pow(&fj, p), integral_pow(&f, p));
        prop_assert!(d <= c * (nj + nf) + nf + 1e-12);
    }

    #[test]
    fn defect_vanishes_for_p_one_and_ordered_inputs(
        a in prop::collection::vec(0.0..1.0f64, 120),
        extra in prop::collection::vec(0.0..1.0f64, 120),
    ) {
        let grid = small_grid();
        let fj_vals: Vec<f64> = a.iter().zip(&extra).map(|(x, e)| x + e).collect();
        let f = CylGridFunction::new(grid.clone(), a).unwrap();
        let fj = CylGridFunction::new(grid, fj_vals).unwrap();
        let d = brezis_lieb_defect(&fj, &f, 1.0).unwrap();
        prop_assert!(d <= 1e-12 * (1.0 + integral_pow(&fj, 1.0)));
    }
}

#[test]
fn grid_bump_is_compact_and_its_dilations_vanish() {
    // A fixed bump well inside B_1 is compact; its dilations spread out.
    let grid = CylGrid::new(1, GridSpec::default()).unwrap();
    let bump = CylGridFunction::from_fn(grid.clone(), |rho, t| (-rho * rho / 0.05 - t * t / 0.1).exp());
    let fixed: Vec<_> = (0..4)
        .map(|_| {
            DiscreteMeasure::from_density(bump.clone())
                .unwrap()
                .normalized()
                .unwrap()
        })
        .collect();
    let v = classify_trichotomy(&fixed, DEFAULT_EPS, &DEFAULT_RADII).unwrap();
    assert_eq!(v.kind, hls_core::cc_lab::VerdictKind::Compactness);

    let spread: Vec<_> = (1..=5)
        .map(|j| {
            let d = 4f64.powi(j);
            let f = CylGridFunction::from_fn(grid.clone(), move |rho, t| (-(rho * rho + t.abs()) / (d * d)).exp());
            DiscreteMeasure::from_density(f).unwrap().normalized().unwrap()
        })
        .collect();
    let v = classify_trichotomy(&spread, DEFAULT_EPS, &DEFAULT_RADII).unwrap();
    assert_eq!(v.kind, hls_core::cc_lab::VerdictKind::Vanishing, "k̂ = {}", v.k_hat);
}
