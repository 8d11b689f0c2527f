use proptest::prelude::*;
use qmoment::bounds::{
    check_class_membership, default_alpha_directions, default_alpha_radii, estimate_alpha_Eq, estimate_cq_limit,
    validate_expq_bounds_seeded, validate_theta_lower_bound_seeded, DEFAULT_SEED,
};
use qmoment::kernels::SectorFunction;
use qmoment::qcore::{moment_sequence, QParams, SequenceKind};
use qmoment::special::{LogPolarPoint, Scaled};
use qmoment::Error;

/// `∏_{j>=1} (1 - x^j)` by the pentagonal number theorem.
fn euler_function(x: f64) -> f64 {
    let mut s = 1.0;
    for k in 1..200i64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let a = (k * (3 * k - 1) / 2) as f64;
        let b = (k * (3 * k + 1) / 2) as f64;
        s += sign * (x.powf(a) + x.powf(b));
    }
    s
}

#[test]
fn cq_matches_the_pentagonal_series() {
    for q in [1.5, 2.0, 3.0, 7.0] {
        let r = estimate_cq_limit(q, 100).unwrap();
        let want = euler_function(1.0 / q);
        let c = r.get("c_q").unwrap();
        assert!((c - want).abs() < 1e-13, "q = {q}: {c} vs {want}");
        assert!(r.get("increment_N").unwrap() < 1e-12);
        assert!(r.pass());
    }
}

#[test]
fn cq_rejects_short_sequences() {
    assert!(matches!(estimate_cq_limit(2.0, 49), Err(Error::InvalidParameter(_))));
    assert!(estimate_cq_limit(1.0, 100).is_err());
}

#[test]
fn theta_lower_bound_is_positive_and_stable() {
    for q in [1.5, 2.0, 3.0] {
        let mut d = Vec::new();
        for delta in [0.05, 0.1, 0.2] {
            let r = validate_theta_lower_bound_seeded(q, delta, 1000, DEFAULT_SEED).unwrap();
            assert!(r.pass, "q = {q}, δ = {delta}");
            d.push(r.param_f64("Delta_hat").unwrap());
        }
        assert!(d.iter().all(|&x| x > 0.0));
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 2.0, "q = {q}: {d:?}");
    }
}

#[test]
fn reseeding_moves_delta_hat_little() {
    let a = validate_theta_lower_bound_seeded(2.0, 0.1, 1000, DEFAULT_SEED).unwrap();
    let b = validate_theta_lower_bound_seeded(2.0, 0.1, 1000, DEFAULT_SEED + 1).unwrap();
    let (x, y) = (a.param_f64("Delta_hat").unwrap(), b.param_f64("Delta_hat").unwrap());
    assert!((x - y).abs() <= 0.2 * x.max(y), "{x} vs {y}");
}

#[test]
fn seeded_certificates_are_reproducible() {
    let a = validate_expq_bounds_seeded(2.0, 0.1, 500, 3).unwrap();
    let b = validate_expq_bounds_seeded(2.0, 0.1, 500, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn expq_bounds_hold_on_held_out_points() {
    for q in [1.5, 3.0] {
        for eps in [0.05, 0.2] {
            let r = validate_expq_bounds_seeded(q, eps, 1000, DEFAULT_SEED).unwrap();
            assert!(r.pass, "q = {q}, eps = {eps}");
            for k in ["violations_upper", "violations_small_disk", "violations_lower"] {
                assert_eq!(r.param_f64(k), Some(0.0), "{k}");
            }
            assert!(r.param_f64("C0").unwrap() > 0.0);
        }
    }
}

#[test]
fn expq_rejects_eps_out_of_range() {
    assert!(validate_expq_bounds_seeded(2.0, 0.0, 100, 1).is_err());
    assert!(validate_expq_bounds_seeded(2.0, 0.5, 100, 1).is_err());
}

#[test]
fn eq_growth_exponent_is_stable() {
    let a = estimate_alpha_Eq(2.0, &default_alpha_radii(25), &default_alpha_directions()).unwrap();
    assert_eq!(a.violations, 0);
    assert_eq!(a.held_out, 1000);
    let shifted: Vec<f64> = default_alpha_radii(24).iter().map(|r| r * 1.3).collect();
    let b = estimate_alpha_Eq(2.0, &shifted, &default_alpha_directions()).unwrap();
    assert!((a.get("alpha").unwrap() - b.get("alpha").unwrap()).abs() < 0.1);
}

#[test]
fn eq_growth_needs_four_decades() {
    let narrow = [1.0, 10.0, 100.0];
    assert!(estimate_alpha_Eq(2.0, &narrow, &default_alpha_directions()).is_err());
}

#[test]
fn class_membership_accepts_monomials_and_rejects_fast_growth() {
    let m1 = moment_sequence(SequenceKind::M1, &QParams::single(2.0).unwrap()).unwrap();
    for n in [0, 2, 5] {
        let r = check_class_membership(&SectorFunction::monomial(n, 0.0, 1.0), &m1, 1.5, 256).unwrap();
        assert!(r.pass());
        assert!(r.get("c").unwrap().is_finite());
    }
    let lq = 2f64.ln();
    let fast = SectorFunction::new(
        "fast",
        move |p: LogPolarPoint| Ok(Scaled::from_log_polar(p.log_r * p.log_r / lq, 0.0)),
        0.0,
        1.0,
    );
    assert!(matches!(check_class_membership(&fast, &m1, 1.01, 256), Err(Error::WitnessFailed(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cq_limit_decreases_in_one_over_q(q in 1.3f64..8.0) {
        let a = estimate_cq_limit(q, 60).unwrap().get("c_q").unwrap();
        let b = estimate_cq_limit(q * 1.1, 60).unwrap().get("c_q").unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(b > a);
    }
}
