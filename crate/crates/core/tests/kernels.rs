use proptest::prelude::*;
use qmoment::kernels::{
    convolution_kernel, kernel_e1, kernel_e2, kernel_gaussian_centre, laplace_like_t, pq_moment_via_kernel, KernelParams,
    MomentPath, SectorFunction,
};
use qmoment::qcore::{moment_sequence, pq_factorial, Mode, QParams, SequenceKind};
use qmoment::quad::Tolerance;
use qmoment::special::LogPolarPoint;
use qmoment::{Complex64, Error};

/// `log Θ_q(e^lx)` from the bilateral sum, by log-sum-exp.
fn log_theta_oracle(lx: f64, q: f64) -> f64 {
    let lq = q.ln();
    let terms: Vec<f64> = (-400..=400).map(|n| n as f64 * lx - 0.5 * (n * (n - 1)) as f64 * lq).collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `log exp_q(y)` for `y > 0` from the product.
fn log_expq_oracle(y: f64, q: f64) -> f64 {
    (0..4000).map(|j| ((q - 1.0) * y / q.powi(j + 1)).ln_1p()).sum()
}

/// `ẽ(t)` for real `t > 0` by the trapezoid rule in `s = log w`.
fn e_tilde_oracle(t: f64, p: f64, q: f64) -> f64 {
    let r = p / q;
    let c = (r - 1.0) / r.ln() * q / q.ln();
    let h = 0.01;
    let mut sum = 0.0;
    for i in -8000..=8000 {
        let s = i as f64 * h;
        let l = -log_expq_oracle(r * t * s.exp(), r) - log_theta_oracle(s - 2.0 * q.ln(), q);
        sum += l.exp();
    }
    t * c * sum * h
}

// Frozen from `e_tilde_oracle`.
const E_TILDE_3_2_AT_1: f64 = 2.372_030_880_649_847_7e-1;
const E_TILDE_3_2_AT_E: f64 = 1.195_995_237_992_752_4e-1;

#[test]
#[ignore = "regenerates the frozen kernel values"]
fn print_e_tilde_oracle() {
    println!("{:.17e}", e_tilde_oracle(1.0, 3.0, 2.0));
    println!("{:.17e}", e_tilde_oracle(1f64.exp(), 3.0, 2.0));
}

#[test]
fn e_tilde_matches_frozen_values() {
    let kp = KernelParams::new(3.0, 2.0).unwrap();
    for (lt, want) in [(0.0, E_TILDE_3_2_AT_1), (1.0, E_TILDE_3_2_AT_E)] {
        let v = convolution_kernel(LogPolarPoint::new(lt, 0.0), &kp).unwrap();
        assert!((v.value.re - want).abs() < 1e-9 * want, "log t = {lt}: {} vs {want}", v.value.re);
        assert!(v.value.im.abs() < 1e-12);
    }
}

#[test]
fn oracle_agrees_with_frozen_value() {
    let v = e_tilde_oracle(1.0, 3.0, 2.0);
    assert!((v - E_TILDE_3_2_AT_1).abs() < 1e-12 * E_TILDE_3_2_AT_1);
}

#[test]
fn e1_at_zero_is_its_normalisation() {
    let kp = KernelParams::new(3.0, 2.0).unwrap();
    let r: f64 = 1.5;
    let v = kernel_e1(Complex64::new(0.0, 0.0), &kp).unwrap();
    assert!((v.re - (r - 1.0) / r.ln()).abs() < 1e-15);
}

#[test]
fn e2_rejects_the_origin() {
    assert!(matches!(
        kernel_e2(Complex64::new(0.0, 0.0), 2.0, Tolerance::rel(1e-12)),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn kernel_params_reject_p_not_above_q() {
    assert!(KernelParams::new(2.0, 2.0).is_err());
    assert!(KernelParams::new(1.5, 2.0).is_err());
    assert!(KernelParams::new(3.0, 1.0).is_err());
}

#[test]
fn smallness_violation_is_reported() {
    let kp = KernelParams::new(3.0, 2.0).unwrap();
    let m = moment_sequence(SequenceKind::Mpq, &QParams::kernel(3.0, 2.0).unwrap()).unwrap();
    let f = SectorFunction::monomial_in_class(1, 0.0, 2.0, &m, 1.5);
    let z = LogPolarPoint::new((2.0 * kp.smallness).ln(), 0.0);
    assert!(matches!(laplace_like_t(&f, z, &kp), Err(Error::ConstraintViolated(_))));
}

#[test]
fn t_of_zero_vanishes() {
    let kp = KernelParams::new(3.0, 2.0).unwrap();
    let z = LogPolarPoint::new((0.5 * kp.smallness).ln(), 0.0);
    let f = SectorFunction::zero(0.0, 2.0);
    let f = match moment_sequence(SequenceKind::Mpq, &QParams::kernel(3.0, 2.0).unwrap()) {
        Ok(m) => f.with_witness(m, 1.5, 1.0),
        Err(e) => panic!("{e}"),
    };
    let v = laplace_like_t(&f, z, &kp).unwrap();
    assert_eq!(v.value, Complex64::new(0.0, 0.0));
}

#[test]
fn t_of_monomials_at_a_small_point() {
    let (p, q) = (3.0, 2.0);
    let kp = KernelParams::new(p, q).unwrap();
    let m = moment_sequence(SequenceKind::Mpq, &QParams::kernel(p, q).unwrap()).unwrap();
    let z = LogPolarPoint::new((0.5 * kp.smallness).ln(), 0.2);
    for n in 1..=2u32 {
        let f = SectorFunction::monomial_in_class(n, 0.0, 2.0, &m, 1.5);
        let v = laplace_like_t(&f, z, &kp.with_theta(0.2)).unwrap();
        let want = pq_factorial(n, p, q, Mode::Linear).unwrap() * z.to_complex().powu(n);
        assert!((v.value - want).norm() < 1e-3 * want.norm(), "n = {n}");
    }
}

#[test]
fn kernel_moments_both_paths_second_pair() {
    let kp = KernelParams::new(2.0, 1.5).unwrap();
    for n in [1usize, 3] {
        let want = pq_factorial(n as u32, 2.0, 1.5, Mode::Linear).unwrap();
        let f = pq_moment_via_kernel(n, &kp, MomentPath::Factorized).unwrap();
        assert!((f.value.re - want).abs() < 1e-8 * want);
        let c = pq_moment_via_kernel(n, &kp, MomentPath::Convolved).unwrap();
        assert!((c.value.re - want).abs() < 1e-3 * want);
    }
}

#[test]
fn gaussian_centre_describes_the_tail() {
    let (p, q) = (3.0f64, 2.0f64);
    let kp = KernelParams::new(p, q).unwrap();
    let b = kernel_gaussian_centre(p, q);
    let at = |u: f64| convolution_kernel(LogPolarPoint::new(u, 0.0), &kp).unwrap().value.re.ln();
    // the quadratic coefficient of log ẽ in u = log t
    let (u, h) = (20.0, 2.0);
    let second = (at(u + h) - 2.0 * at(u) + at(u - h)) / (h * h);
    assert!((second + 1.0 / p.ln()).abs() < 0.05 / p.ln(), "{second}");
    let gap = at(u) + (u - b).powi(2) / (2.0 * p.ln());
    assert!(gap.abs() < 0.2 * u, "{gap}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn e_tilde_is_positive_on_the_axis(u in -3.0f64..4.0) {
        let kp = KernelParams::new(3.0, 2.0).unwrap();
        let v = convolution_kernel(LogPolarPoint::new(u, 0.0), &kp).unwrap();
        prop_assert!(v.value.re > 0.0);
        prop_assert!(v.value.im.abs() <= v.abs_error_estimate.max(1e-14 * v.value.re));
    }

    #[test]
    fn e_tilde_does_not_depend_on_phi(u in -2.0f64..2.0, phi in -0.4f64..0.4) {
        let kp = KernelParams::new(3.0, 2.0).unwrap();
        let t = LogPolarPoint::new(u, 0.0);
        let a = convolution_kernel(t, &kp).unwrap();
        let b = convolution_kernel(t, &kp.with_phi(phi)).unwrap();
        prop_assert!((a.value - b.value).norm() <= 1e-8 * a.value.norm());
    }

    #[test]
    fn builders_keep_parameters_valid(m in 0.05f64..0.5, s in 0.1f64..1.0) {
        let kp = KernelParams::new(3.0, 2.0).unwrap();
        let sm = kp.smallness * s;
        let k = kp.with_margin(m).with_smallness(sm);
        prop_assert!(k.validate().is_ok());
        prop_assert_eq!(k.smallness, sm);
    }
}
