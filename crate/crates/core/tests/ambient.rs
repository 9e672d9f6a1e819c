use proptest::prelude::*;
use wsdlab_core::ambient::*;

fn point() -> impl Strategy<Value = AmbientPoint<f64>> {
    (1usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..1.0, n + 1),
            prop::collection::vec(0.05f64..4.0, n + 1),
            prop::collection::vec(0.0f64..1.0, n + 1),
        )
            .prop_map(|(t, r, e)| AmbientPoint::from_slices(&t, &r, &e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adapted_frame_and_unit_leaf_volume(p in point()) {
        prop_assert!((leaf_volume(&p) - 1.0).abs() < 1e-10);
        let rep = verify_ambient_frame(&p, 1e-10).unwrap();
        prop_assert_eq!(rep.degenerate_dim, 0);
    }

    #[test]
    fn forms_are_closed(p in point()) {
        for f in [FormId::Omega1, FormId::Omega2, FormId::OmegaD] {
            prop_assert!(exterior_derivative_residual(f, &p, 1e-5).unwrap().residual < 1e-6);
        }
    }

    #[test]
    fn moment_differentials_match_finite_differences(p in point()) {
        let (d1, d2) = moment_map_differentials(&p);
        let n = p.n();
        let h = 1e-6;
        for i in 0..=n {
            let shift = |s: f64| {
                let mut r = p.r.clone();
                r[i] += s;
                moment_map(&AmbientPoint::new(p.theta.clone(), r, p.eta.clone()).unwrap())
            };
            let (a, b) = (shift(h), shift(-h));
            let k = r_index(n, i);
            prop_assert!(((a.0 - b.0) / (2.0 * h) - d1[k]).abs() < 1e-6 * (1.0 + d1[k].abs()));
            prop_assert!(((a.1 - b.1) / (2.0 * h) - d2[k]).abs() < 1e-6 * (1.0 + d2[k].abs()));
        }
    }

    #[test]
    fn auxiliary_norms_and_cauchy_schwarz(p in point()) {
        let aux = auxiliary_vectors(&p);
        prop_assert!(aux.identity_residual(p.r.as_slice()) < 1e-12);
        let k = (p.n() + 1) as f64;
        prop_assert!(aux.product >= k * k * (1.0 - 1e-12));
    }

    #[test]
    fn parameter_charts_are_inverse(n in 1usize..6, rho1 in 0.1f64..100.0, rho2 in 0.0f64..3.0) {
        let (k1, k2) = levels_from_rho(n, rho1, rho2).unwrap();
        let (a, b) = convert_parameters(n, k1, k2).unwrap();
        prop_assert!((a - rho1).abs() < 1e-12 * rho1);
        prop_assert!((b - rho2).abs() < 1e-9);
    }
}
