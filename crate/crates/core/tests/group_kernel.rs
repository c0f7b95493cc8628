use hls_core::group::{compose, dilate_in_place, distance, norm};
use hls_core::kernel::{angular_average_kernel, cell_kernel, riesz_kernel};
use hls_core::montecarlo::{mc_ball_volume, Geometry, McOptions};
use hls_core::GroupPoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_point(n: usize) -> impl Strategy<Value = GroupPoint> {
    prop::collection::vec(-4.0..4.0f64, 2 * n + 1).prop_map(move |c| GroupPoint::from_coords(n, c).unwrap())
}

#[test]
fn triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let d = 2 * n + 1;
        for _ in 0..10_000 {
            let mut pts = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            for p in pts.iter_mut() {
                for c in p.iter_mut() {
                    *c = scale * rng.gen_range(-1.0..1.0);
                }
            }
            let [u, v, w] = &pts;
            let direct = distance(n, u, w);
            let via = distance(n, u, v) + distance(n, v, w);
            assert!(direct <= via * (1.0 + 1e-12), "n={n}: {direct} > {via}");
        }
    }
}

#[test]
fn translated_ball_has_same_volume() {
    let geom = Geometry::Heisenberg { n: 1 };
    let base = mc_ball_volume(geom, 1.0, &[0.0; 3], &McOptions::with(1_000_000, 5, 4)).unwrap();
    let moved = mc_ball_volume(geom, 1.0, &[1.5, -2.0, 3.0], &McOptions::with(1_000_000, 6, 4)).unwrap();
    let sigma = base.stderr.hypot(moved.stderr);
    assert!(
        (base.estimate - moved.estimate).abs() <= 3.0 * sigma,
        "{base:?} vs {moved:?}"
    );
}

#[test]
fn ball_volume_scales_with_homogeneous_dimension() {
    for n in 1..=2 {
        let geom = Geometry::Heisenberg { n };
        let c = vec![0.0; 2 * n + 1];
        let unit = mc_ball_volume(geom, 1.0, &c, &McOptions::with(400_000, 1, 2)).unwrap();
        let big = mc_ball_volume(geom, 2.0, &c, &McOptions::with(400_000, 2, 2)).unwrap();
        let scale = 2f64.powi(2 * n as i32 + 2);
        let sigma = (scale * unit.stderr).hypot(big.stderr);
        assert!((big.estimate - scale * unit.estimate).abs() <= 3.0 * sigma);
    }
}

proptest! {
    #[test]
    fn left_translation_preserves_distance(u in arb_point(2), v in arb_point(2), g in arb_point(2)) {
        let mut gu = vec![0.0; 5];
        let mut gv = vec![0.0; 5];
        compose(2, g.coords(), u.coords(), &mut gu);
        compose(2, g.coords(), v.coords(), &mut gv);
        let a = distance(2, u.coords(), v.coords());
        let b = distance(2, &gu, &gv);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn dilation_scales_distance(u in arb_point(1), v in arb_point(1), d in 0.05..20.0f64) {
        let (mut du, mut dv) = (u.coords().to_vec(), v.coords().to_vec());
        dilate_in_place(1, d, &mut du);
        dilate_in_place(1, d, &mut dv);
        let a = distance(1, u.coords(), v.coords());
        prop_assert!((distance(1, &du, &dv) - d * a).abs() <= 1e-10 * (1.0 + d * a));
        prop_assert!((norm(1, &du) - d * u.norm()).abs() <= 1e-10 * (1.0 + d * u.norm()));
    }

    #[test]
    fn riesz_kernel_symmetric_and_homogeneous(
        u in arb_point(1),
        v in arb_point(1),
        d in 0.1..10.0f64,
        lambda in 0.1..3.9f64,
    ) {
        prop_assume!(u.distance(&v).unwrap() > 1e-3);
        let k = riesz_kernel(&u, &v, lambda).unwrap();
        prop_assert!((riesz_kernel(&v, &u, lambda).unwrap() - k).abs() <= 1e-12 * k);
        let kd = riesz_kernel(&u.dilate(d).unwrap(), &v.dilate(d).unwrap(), lambda).unwrap();
        prop_assert!((kd - d.powf(-lambda) * k).abs() <= 1e-10 * kd);
    }

    #[test]
    fn angular_average_reflection_and_swap(
        rho in 0.05..5.0f64,
        rho2 in 0.05..5.0f64,
        tau in 0.01..5.0f64,
        lambda in 0.2..3.8f64,
    ) {
        let k = angular_average_kernel(rho, rho2, tau, lambda, 64).unwrap();
        let k_neg = angular_average_kernel(rho, rho2, -tau, lambda, 64).unwrap();
        let k_swap = angular_average_kernel(rho2, rho, tau, lambda, 64).unwrap();
        prop_assert!((k - k_neg).abs() <= 1e-8 * k);
        prop_assert!((k - k_swap).abs() <= 1e-8 * k);
    }

    #[test]
    fn cell_kernel_reflection_and_additivity(
        rho in 0.05..5.0f64,
        rho2 in 0.05..5.0f64,
        lo in -4.0..4.0f64,
        w1 in 0.01..2.0f64,
        w2 in 0.01..2.0f64,
        lambda in 0.2..3.8f64,
    ) {
        let (mid, hi) = (lo + w1, lo + w1 + w2);
        let whole = cell_kernel(rho, rho2, lo, hi, lambda);
        let parts = cell_kernel(rho, rho2, lo, mid, lambda) + cell_kernel(rho, rho2, mid, hi, lambda);
        let mirrored = cell_kernel(rho, rho2, -hi, -lo, lambda);
        prop_assert!((whole - parts).abs() <= 1e-8 * whole);
        prop_assert!((whole - mirrored).abs() <= 1e-8 * whole);
    }
}
