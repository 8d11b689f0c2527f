use std::f64::consts::PI;

use proptest::prelude::*;
use qmoment::qcore::{moment_sequence, q_factorial, q_number, Mode, QParams, SequenceKind};
use qmoment::quad::{admissible_direction, integrate_circle, CircleSpec, Tolerance};
use qmoment::repr::{moment_integral_m1, moment_integral_m2};
use qmoment::series::{corpus, moment_derivative, TruncatedPowerSeries};
use qmoment::special::{
    exp_q_entire, exp_q_reciprocal, nearest_zero_distance, theta_q_scaled, LogPolarPoint, Scaled, ZeroKind,
};
use qmoment::Complex64;

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_number_is_a_geometric_sum(n in 0u32..40, q in 1.05f64..5.0) {
        let direct: f64 = (0..n).map(|j| q.powi(j as i32)).sum();
        let v = q_number(n, q).unwrap();
        prop_assert!((v - direct).abs() <= 1e-13 * direct.max(1.0));
    }

    #[test]
    fn q_factorial_log_and_linear_modes_agree(n in 0u32..60, q in 1.05f64..4.0) {
        let log = q_factorial(n, q, Mode::Log).unwrap();
        match q_factorial(n, q, Mode::Linear) {
            Ok(lin) => prop_assert!((lin.ln() - log).abs() <= 1e-12 * log.abs().max(1.0)),
            // linear mode refuses only values beyond the f64 range
            Err(_) => prop_assert!(log > 700.0),
        }
    }

    #[test]
    fn theta_inversion(q in 1.2f64..4.0, lr in -3.0f64..3.0, a in -3.0f64..3.0) {
        // Θ(q/w) = Θ(w/q²)
        let lq = q.ln();
        let w = LogPolarPoint::new(lr, a);
        let left = theta_q_scaled(LogPolarPoint::new(lq - lr, -a), q, 1e-16).unwrap();
        let right = theta_q_scaled(w.scale(-2.0 * lq), q, 1e-16).unwrap();
        let z = w.to_complex();
        prop_assume!(nearest_zero_distance(ZeroKind::Theta, z / (q * q), q).unwrap() > 0.05 * z.norm() / (q * q));
        let ratio = (left.value * right.value.recip()).to_complex();
        prop_assert!((ratio - 1.0).norm() < 1e-11, "{ratio}");
    }

    #[test]
    fn reciprocal_times_exp_q_is_one(q in 1.2f64..4.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = Complex64::new(re, im);
        prop_assume!(nearest_zero_distance(ZeroKind::ExpQ, t * q, q).unwrap() > 0.05);
        let a = exp_q_entire(t * q, q, 1e-16).unwrap().value;
        let b = exp_q_reciprocal(t, q, 1e-16).unwrap();
        prop_assert!((a * b - 1.0).norm() < 1e-10);
    }

    #[test]
    fn scaled_multiplication_is_exact_in_form(
        a in -5.0f64..5.0, b in -5.0f64..5.0, x in -3.0f64..3.0, y in -3.0f64..3.0,
    ) {
        let u = Scaled::from_log_polar(a, x);
        let v = Scaled::from_log_polar(b, y);
        let want = u.to_complex() * v.to_complex();
        prop_assert!(((u * v).to_complex() - want).norm() <= 1e-13 * want.norm());
        prop_assert!(((u * v).log_abs() - (a + b)).abs() < 1e-12);
    }

    #[test]
    fn tolerance_target_is_the_larger_bound(abs in 0.0f64..1e-3, rel in 0.0f64..1e-3, m in 0.0f64..1e6) {
        let t = Tolerance::mixed(abs, rel).target(m);
        prop_assert!(t >= abs && t >= rel * m);
        prop_assert!(t == abs || t == rel * m);
    }

    #[test]
    fn admissible_direction_respects_margin_and_arcs(
        w in -3.1f64..3.1, c in -3.1f64..3.1, hw in 0.05f64..0.6, margin in 0.05f64..0.8,
    ) {
        if let Ok(theta) = admissible_direction(w, &[(c, hw)], margin) {
            prop_assert!(wrap(w + theta).abs() <= PI - margin + 1e-9);
            prop_assert!(wrap(theta - c).abs() >= hw - 1e-9);
        }
    }

    #[test]
    fn moment_derivatives_compose(k1 in 0usize..3, k2 in 0usize..3, q in 1.2f64..3.0, which in 0usize..3) {
        let kind = [SequenceKind::M1, SequenceKind::M2, SequenceKind::M1][which];
        let m = moment_sequence(kind, &QParams::single(q).unwrap()).unwrap();
        let coeffs: Vec<Complex64> = (0..10).map(|j| Complex64::new(1.0 / (j + 1) as f64, 0.5 - j as f64 * 0.1)).collect();
        let f = TruncatedPowerSeries::polynomial(coeffs).unwrap();
        let once = moment_derivative(&moment_derivative(&f, &m, k1).unwrap(), &m, k2).unwrap();
        let both = moment_derivative(&f, &m, k1 + k2).unwrap();
        prop_assert_eq!(once.order(), both.order());
        for (a, b) in once.coeffs().iter().zip(both.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn corpus_series_matches_closed_form(which in 0usize..8, re in -0.3f64..0.3, im in -0.3f64..0.3) {
        let fs = corpus(2.0);
        let f = &fs[which % fs.len()];
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() < 0.5 * f.radius());
        let (v, err) = f.series(60).eval(z).unwrap();
        let want = f.eval(z).unwrap();
        prop_assert!((v - want).norm() <= 1e-12 * want.norm().max(1.0) + 10.0 * err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn moment_integrals_do_not_depend_on_direction(n in 0usize..6, q in 1.3f64..2.5, theta in -0.6f64..0.6) {
        let tol = Tolerance::mixed(1e-15, 1e-11);
        let a = moment_integral_m1(n, q, theta, tol).unwrap();
        let want = (0.5 * (n * n.saturating_sub(1)) as f64 * q.ln()).exp();
        prop_assert!((a.value.re - want).abs() < 1e-8 * want);
        let b = moment_integral_m2(n, q, theta, tol).unwrap();
        let want = q_factorial(n as u32, q, Mode::Linear).unwrap();
        prop_assert!((b.value - want).norm() < 1e-8 * want);
    }

    #[test]
    fn circle_rule_recovers_taylor_coefficients(k in 0usize..6, eps in 0.2f64..2.0) {
        // (1/2πi) ∮ e^w w^{-k-1} dw = 1/k!
        let h = |w: Complex64| -> qmoment::Result<Complex64> { Ok(w.exp() * w.powi(-(k as i32) - 1)) };
        let r = integrate_circle(&h, CircleSpec::new(eps, true), Tolerance::rel(1e-13)).unwrap();
        let want = 1.0 / (1..=k).map(|j| j as f64).product::<f64>();
        prop_assert!((r.value - want).norm() < 1e-11 * want);
    }
}
