use csvortex_core::diagnostics::energy_and_charge;
use csvortex_core::fft::{DirichletSolver, Laplacian, PeriodicSolver};
use csvortex_core::model::*;
use csvortex_core::plane::background_u0_plane;
use csvortex_core::radial::{classify, positive_threshold, ClassTag, ShootingOptions};
use proptest::prelude::*;

proptest! {
    #[test]
    fn f_is_bounded_on_the_negative_axis(u in -60.0f64..=0.0) {
        let f = nonlinearity_f(u);
        prop_assert!(f <= 0.0 && f >= F_MIN - 1e-15);
        prop_assert!(nonlinearity_f_prime(u).abs() <= 5.0);
        prop_assert!(nonlinearity_f_prime(u) <= sharp_k_factor() + 1e-15);
        prop_assert_eq!(truncated_g(u), -f);
    }

    #[test]
    fn f_vanishes_only_at_zero(u in -30.0f64..-1e-6) {
        prop_assert!(nonlinearity_f(u) < 0.0);
    }

    #[test]
    fn antiderivative_by_central_difference(u in -10.0f64..-1e-3) {
        let h = 1e-5 * (1.0 + u.abs());
        let fd = (antiderivative_f(u + h) - antiderivative_f(u - h)) / (2.0 * h);
        let f = nonlinearity_f(u);
        prop_assert!((fd - f).abs() <= 1e-5 * f.abs().max(1e-12), "u={} fd={} f={}", u, fd, f);
    }

    #[test]
    fn derivative_by_central_difference(u in -10.0f64..0.0) {
        let h = 1e-6;
        let fd = (nonlinearity_f(u + h) - nonlinearity_f(u - h)) / (2.0 * h);
        prop_assert!((fd - nonlinearity_f_prime(u)).abs() < 1e-8);
    }

    #[test]
    fn coupling_round_trip(kappa in 1e-3f64..1e3) {
        let c = Coupling::from_kappa(kappa).unwrap();
        let back = Coupling::from_lambda(c.lambda()).unwrap();
        prop_assert!((back.kappa() - kappa).abs() <= 1e-14 * kappa);
        prop_assert!((c.lambda() * kappa * kappa - 12.0).abs() < 1e-12);
    }

    #[test]
    fn charge_is_kappa_times_flux(phi in 0.0f64..100.0, kappa in 0.01f64..100.0) {
        let (e, q) = energy_and_charge(phi, kappa);
        prop_assert_eq!(e, phi);
        prop_assert!((q - kappa * phi).abs() <= 1e-12 * (kappa * phi).max(1e-300));
    }

    #[test]
    fn background_far_field_bound(x in -50.0f64..50.0, y in -50.0f64..50.0, n in 1u32..4) {
        // −n r⁻² ≤ −n ln(1 + r⁻²) < 0
        let vs = VortexSet::single(0.0, 0.0, n).unwrap();
        let r2 = x * x + y * y;
        prop_assume!(r2 > 1e-6);
        let u0 = background_u0_plane(&[(x, y)], &vs, 0.0)[0];
        prop_assert!(u0 < 0.0);
        prop_assert!(u0 >= -(n as f64) / r2 * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_solve_inverts_apply(seed in 0u64..1000, k in 0.1f64..10.0, spectral in any::<bool>()) {
        let lap = if spectral { Laplacian::Spectral } else { Laplacian::FiniteDifference };
        let s = PeriodicSolver::new(16, 20, 3.0, 4.0, lap);
        let v: Vec<f64> = (0..320).map(|p| ((p as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        let lv = s.apply(&v);
        let rhs: Vec<f64> = lv.iter().zip(&v).map(|(a, b)| a - k * b).collect();
        let back = s.solve(&rhs, k);
        let err = back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "{}", err);
    }

    #[test]
    fn dirichlet_solve_inverts_apply(seed in 0u64..1000, k in 0.0f64..10.0, n in 3usize..40) {
        let s = DirichletSolver::new(n, 0.37);
        let v: Vec<f64> = (0..n * n).map(|p| ((p as u64 * 40503 + seed) % 997) as f64 / 498.5 - 1.0).collect();
        let lv = s.apply(&v, |_, _| 0.0);
        let rhs: Vec<f64> = lv.iter().zip(&v).map(|(a, b)| a - k * b).collect();
        let back = s.solve(&rhs, k);
        let err = back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "{}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn above_threshold_blows_up(frac in 1e-3f64..1.0, lambda in 0.5f64..20.0) {
        let lo = positive_threshold(lambda);
        let a = lo + frac * (10.0 - lo);
        let c = classify(1, lambda, a, &ShootingOptions::default()).unwrap();
        prop_assert_eq!(c.tag, ClassTag::Positive);
    }
}
