use actconv::analysis::{grid_modulus, log_log_slope};
use actconv::function::{constant, sin};
use actconv::{
    apply, central_moment_bound, estimate_modulus, iterated_bound, jackson_bound, mixed_iterated_bound, sup_error,
    KernelParams, KindTag, MeasurementGrid, OperatorKind, OperatorSpec, QuadratureConfig,
};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = KernelParams> {
    (0.2f64..5.0, 0.2f64..4.0).prop_map(|(q, b)| KernelParams::new(q, b).unwrap())
}

fn kind() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Basic),
        Just(OperatorKind::Kantorovich),
        (1usize..6).prop_map(|r| OperatorKind::uniform_quadrature(r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_even_and_positive(p in params(), x in -40.0f64..40.0) {
        let a = p.psi_value(x);
        prop_assert!(a > 0.0);
        prop_assert!((a - p.psi_value(-x)).abs() <= 1e-15);
    }

    #[test]
    fn g_is_bounded_by_its_maximum(p in params(), x in -40.0f64..40.0) {
        prop_assert!(p.g_value(x) <= p.g_max_value() * (1.0 + 1e-12));
    }

    #[test]
    fn tail_bound_decreases_in_n(p in params(), n in 9u32..400) {
        let a = p.tail_mass_bound(n, 0.5).unwrap();
        let b = p.tail_mass_bound(n + 1, 0.5).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn operators_reproduce_constants(p in params(), k in kind(), n in 1u32..64, c in -5.0f64..5.0, x in -3.0f64..3.0) {
        let spec = OperatorSpec::new(k, n, p, 0.5).unwrap();
        let y = apply(&constant(c), &spec, x, &QuadratureConfig::default()).unwrap();
        prop_assert!((y - c).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn operators_stay_within_sup_norm(p in params(), k in kind(), n in 1u32..64, x in -3.0f64..3.0) {
        let spec = OperatorSpec::new(k, n, p, 0.5).unwrap();
        let y = apply(&sin(), &spec, x, &QuadratureConfig::default()).unwrap();
        prop_assert!(y.abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn jackson_bound_is_monotone_in_omega(p in params(), n in 9u32..200, w in 0.0f64..2.0, dw in 0.0f64..1.0) {
        for tag in [KindTag::Basic, KindTag::Kantorovich, KindTag::Quadrature] {
            let a = jackson_bound(tag, w, &p, n, 0.5, 1.0).unwrap().value;
            let b = jackson_bound(tag, w + dw, &p, n, 0.5, 1.0).unwrap().value;
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn iterated_bound_scales_linearly(p in params(), n in 9u32..200, r in 1usize..10) {
        let single = jackson_bound(KindTag::Basic, 0.1, &p, n, 0.5, 1.0).unwrap();
        let many = iterated_bound(&single, r).unwrap();
        assert_relative_eq!(many.value, r as f64 * single.value, max_relative = 1e-15);
    }

    #[test]
    fn mixed_chain_bound_is_below_coarser(p in params(), mut ns in proptest::collection::vec(9u32..200, 1..5)) {
        ns.sort_unstable();
        let steps: Vec<_> = ns
            .iter()
            .map(|&n| jackson_bound(KindTag::Basic, 1.0 / (n as f64).sqrt(), &p, n, 0.5, 1.0).unwrap())
            .collect();
        let report = mixed_iterated_bound(&steps).unwrap();
        prop_assert!(report.value <= report.coarser.unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn central_moment_bound_shrinks_with_n(p in params(), k in 1u32..6, n in 2u32..200) {
        for tag in [KindTag::Basic, KindTag::Kantorovich, KindTag::Quadrature] {
            let a = central_moment_bound(tag, k, &p, n).unwrap();
            let b = central_moment_bound(tag, k, &p, n + 1).unwrap();
            prop_assert!(b < a);
        }
    }

    #[test]
    fn grid_modulus_is_monotone_and_subadditive(t1 in 0.02f64..1.0, t2 in 0.02f64..1.0) {
        let grid = MeasurementGrid::uniform(-3.0, 3.0, 601).unwrap();
        let values: Vec<f64> = grid.points().iter().map(|x| (2.0 * x).sin() + 0.3 * x.abs()).collect();
        let w1 = grid_modulus(grid.points(), &values, t1);
        let w2 = grid_modulus(grid.points(), &values, t2);
        let w12 = grid_modulus(grid.points(), &values, t1 + t2);
        prop_assert!(w12 >= w1.max(w2));
        let step = grid_modulus(grid.points(), &values, grid.spacing());
        prop_assert!(w12 <= w1 + w2 + step);
    }

    #[test]
    fn slope_recovers_power_laws(c in 0.1f64..10.0, rate in 0.2f64..2.0) {
        let points: Vec<(f64, f64)> = [9.0, 16.0, 25.0, 36.0, 49.0].iter().map(|&n: &f64| (n, c * n.powf(-rate))).collect();
        assert_relative_eq!(log_log_slope(&points).unwrap(), -rate, epsilon = 1e-12);
    }
}

#[test]
fn sin_modulus_matches_closed_form() {
    let grid = MeasurementGrid::uniform(-3.0, 3.0, 2001).unwrap();
    let w = estimate_modulus(&sin(), 0.1, &grid).unwrap();
    assert!(w <= 0.1);
    assert!(w >= 2.0 * 0.05f64.sin() - 1e-9);
}

#[test]
fn sup_error_of_self_is_zero() {
    let grid = MeasurementGrid::uniform(-3.0, 3.0, 2001).unwrap();
    let f = sin();
    assert_eq!(sup_error(&f, |x| f.value(x), &grid), 0.0);
    assert_relative_eq!(sup_error(&f, |x| f.value(x) + 0.01, &grid), 0.01, epsilon = 1e-15);
}

#[test]
fn coarse_grid_is_rejected() {
    let grid = MeasurementGrid::uniform(-3.0, 3.0, 11).unwrap();
    assert!(estimate_modulus(&sin(), 0.1, &grid).is_err());
}
