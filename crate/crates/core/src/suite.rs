//! Batch verification: named suites of identity checks and sampled
//! certificates, each producing [`CheckReport`]s in a fixed order.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_class_membership, default_alpha_directions, default_alpha_radii, estimate_alpha_Eq, estimate_cq_limit,
    validate_expq_bounds_seeded, validate_theta_lower_bound_seeded,
};
use crate::kernels::{
    convolution_kernel, kernel_e1, kernel_e2, laplace_like_t, pq_moment_via_kernel, KernelParams, MomentPath,
    SectorFunction,
};
use crate::qcore::{
    check_weight_submultiplicativity_for, moment_sequence, pq_factorial, q_factorial, Mode, QParams, SequenceKind,
};
use crate::quad::{QuadResult, Tolerance};
use crate::report::{CheckReport, Params};
use crate::repr::{
    cauchy_kernel_expq, cauchy_kernel_theta, moment_integral_m1, moment_integral_m2, pq_deriv_repr, qderiv_repr_m1,
    qderiv_repr_m2, ReprParams, DEFAULT_ALPHA, DEFAULT_K_CAP,
};
use crate::sampling::log_polar_points;
use crate::series::{corpus, jackson_dq, pq_derivative, tilde_dq, FunctionSpec};
use crate::special::{
    e_q_entire, exp_q_entire, exp_q_entire_scaled, exp_q_reciprocal, nearest_zero_distance, theta_q_scaled,
    LogPolarPoint, ZeroKind,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaPolicy {
    /// Fitted growth exponent of `E_q` plus a margin of 0.25.
    Estimate,
    Fixed(f64),
}

/// Which suites `all` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSelection {
    pub special: bool,
    pub moments: bool,
    pub cauchy: bool,
    pub theorems: bool,
    pub kernel: bool,
    pub bounds: bool,
}

impl Default for SuiteSelection {
    fn default() -> Self {
        SuiteSelection { special: true, moments: true, cauchy: true, theorems: true, kernel: true, bounds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q: f64,
    pub p: f64,
    pub tol_series: f64,
    pub tol_quad: f64,
    pub eps_contour: f64,
    pub margin: f64,
    pub alpha_policy: AlphaPolicy,
    pub k_max: usize,
    pub seed: u64,
    pub suites: SuiteSelection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 2.0,
            p: 3.0,
            tol_series: 1e-12,
            tol_quad: 1e-8,
            eps_contour: 0.5,
            margin: 0.3,
            alpha_policy: AlphaPolicy::Fixed(DEFAULT_ALPHA),
            k_max: 3,
            seed: crate::bounds::DEFAULT_SEED,
            suites: SuiteSelection::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if QParams::single(self.q).is_err() || !(self.q > 1.0) {
            return cfg(format!("q must exceed 1, got {}", self.q));
        }
        if let Err(e) = QParams::pair(self.p, self.q) {
            return cfg(e.to_string());
        }
        if !(self.tol_series > 0.0 && self.tol_series < 1e-3) {
            return cfg(format!("tol_series must lie in (0, 1e-3), got {}", self.tol_series));
        }
        if !(self.tol_quad > 0.0 && self.tol_quad < 1e-3) {
            return cfg(format!("tol_quad must lie in (0, 1e-3), got {}", self.tol_quad));
        }
        if !(self.eps_contour > 0.0 && self.eps_contour < 1.0) {
            return cfg(format!("eps_contour must lie in (0, 1), got {}", self.eps_contour));
        }
        if !(self.margin > 0.0 && self.margin < PI / 2.0) {
            return cfg(format!("margin must lie in (0, π/2), got {}", self.margin));
        }
        if self.k_max > DEFAULT_K_CAP {
            return cfg(format!("k_max must not exceed {DEFAULT_K_CAP}, got {}", self.k_max));
        }
        if let AlphaPolicy::Fixed(a) = self.alpha_policy {
            if !(a > 0.5 && a < 2.0) {
                return cfg(format!("fixed alpha must lie in (0.5, 2), got {a}"));
            }
        }
        Ok(())
    }

    /// Resolves the growth exponent used by the Θ-form representation.
    pub fn alpha(&self, q: f64) -> Result<f64> {
        match self.alpha_policy {
            AlphaPolicy::Fixed(a) => Ok(a),
            AlphaPolicy::Estimate => {
                let fit = estimate_alpha_Eq(q, &default_alpha_radii(25), &default_alpha_directions())?;
                Ok(fit.get("alpha").unwrap_or(DEFAULT_ALPHA) + 0.25)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Special,
    Moments,
    Cauchy,
    Theorems,
    Kernel,
    Bounds,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["special", "moments", "cauchy", "theorems", "kernel", "bounds", "all"];

    pub fn parse(s: &str) -> Result<Suite> {
        Ok(match s {
            "special" => Suite::Special,
            "moments" => Suite::Moments,
            "cauchy" => Suite::Cauchy,
            "theorems" => Suite::Theorems,
            "kernel" => Suite::Kernel,
            "bounds" => Suite::Bounds,
            "all" => Suite::All,
            _ => return Err(Error::Config(format!("unknown suite {s:?}; expected one of {:?}", Suite::NAMES))),
        })
    }
}

/// Pass thresholds of the individual checks.
pub mod thresholds {
    pub const FUNCTIONAL_EQUATION: f64 = 1e-11;
    pub const RECIPROCAL: f64 = 1e-10;
    pub const MOMENTS: f64 = 1e-8;
    /// Direction spread relative to the summed error estimates.
    pub const DIRECTION_SPREAD: f64 = 3.0;
    pub const CAUCHY: f64 = 1e-7;
    pub const THEOREM: f64 = 1e-6;
    pub const THEOREM_K2: f64 = 1e-5;
    pub const BRANCH: f64 = 1e-7;
    pub const FACTORIZED: f64 = 1e-8;
    pub const CONVOLVED: f64 = 1e-3;
    pub const OPERATOR_T: f64 = 1e-3;
    pub const CQ_INCREMENT: f64 = 1e-12;
    pub const DELTA_SPREAD: f64 = 2.0;
    pub const ALPHA_STABILITY: f64 = 0.1;
}

/// Runs `suite`; the result is sorted by `check_id`.
pub fn run_suite(config: &RunConfig, suite: Suite) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let s = config.suites;
    let mut out = Vec::new();
    let want = |flag: bool, this: Suite| suite == this || (suite == Suite::All && flag);
    if want(s.special, Suite::Special) {
        out.extend(special_suite(config));
    }
    if want(s.moments, Suite::Moments) {
        out.extend(moments_suite(config));
    }
    if want(s.cauchy, Suite::Cauchy) {
        out.extend(cauchy_suite(config));
    }
    if want(s.theorems, Suite::Theorems) {
        out.extend(theorems_suite(config));
    }
    if want(s.kernel, Suite::Kernel) {
        out.extend(kernel_suite(config));
    }
    if want(s.bounds, Suite::Bounds) {
        out.extend(bounds_suite(config));
    }
    out.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(out)
}

/// Sorted union of a fixed grid and the configured `q`.
fn q_grid(base: &[f64], q: f64) -> Vec<f64> {
    let mut v: Vec<f64> = base.to_vec();
    if !v.iter().any(|x| (x - q).abs() < 1e-12) {
        v.push(q);
    }
    v.sort_by(f64::total_cmp);
    v
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The sample with the largest relative error stands for the whole batch.
#[derive(Debug, Clone, Copy)]
struct Worst {
    expected: Complex64,
    computed: Complex64,
    rel: f64,
    est: f64,
}

impl Worst {
    fn new() -> Self {
        Worst { expected: real(1.0), computed: real(1.0), rel: -1.0, est: 0.0 }
    }

    fn offer(&mut self, expected: Complex64, computed: Complex64, est_abs: f64) {
        let scale = expected.norm();
        let unit = if scale > 0.0 { scale } else { 1.0 };
        let rel = (computed - expected).norm() / unit;
        let est = self.est.max(est_abs / unit);
        if !(rel <= self.rel) {
            *self = Worst { expected, computed, rel, est };
        } else {
            self.est = est;
        }
    }

    fn report(self, id: String, params: Params, tol: f64) -> CheckReport {
        CheckReport::identity(id, params, self.expected, self.computed, self.est, tol)
    }
}

fn record<F>(id: String, params: Params, f: F) -> CheckReport
where
    F: FnOnce(Params) -> Result<CheckReport>,
{
    match f(params.clone()) {
        Ok(r) => r,
        Err(e) => CheckReport::failure(id, params, &e),
    }
}

fn special_suite(config: &RunConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let tol = config.tol_series.min(1e-15);
    for q in q_grid(&[1.5, 2.0, 3.0], config.q) {
        for m in -3i32..=3 {
            let id = format!("special.theta_functional_equation q={q} m={m}");
            let params = Params::new().num("q", q).int("m", m as i64).int("samples", 50);
            out.push(record(id.clone(), params, |params| {
                let zs = log_polar_points(200, (0.1f64).ln(), 10f64.ln(), -PI, PI, config.seed ^ 0x5eed_0001);
                let mut w = Worst::new();
                let mut used = 0;
                for z in zs {
                    if used == 50 {
                        break;
                    }
                    if nearest_zero_distance(ZeroKind::Theta, z, q)? < 0.05 {
                        continue;
                    }
                    used += 1;
                    let zp = LogPolarPoint::from_complex(z)?;
                    let lhs = theta_q_scaled(zp.scale(m as f64 * q.ln()), q, tol)?;
                    let base = theta_q_scaled(zp, q, tol)?;
                    let factor = crate::special::Scaled::from_log_polar(
                        0.5 * (m * (m + 1)) as f64 * q.ln() + m as f64 * zp.log_r,
                        m as f64 * zp.arg,
                    );
                    let rhs = base.value * factor;
                    // compare mantissas at a common scale
                    let ratio = (lhs.value * rhs.recip()).to_complex();
                    w.offer(real(1.0), ratio, lhs.rel_tail() + base.rel_tail());
                }
                Ok(w.report(id, params, thresholds::FUNCTIONAL_EQUATION))
            }));
        }
        let id = format!("special.reciprocal_identity q={q}");
        let params = Params::new().num("q", q).int("samples", 100);
        out.push(record(id.clone(), params, |params| {
            let ts = log_polar_points(400, (1e-3f64).ln(), 20f64.ln(), -PI, PI, config.seed ^ 0x5eed_0002);
            let mut w = Worst::new();
            let mut used = 0;
            for t in ts {
                if used == 100 {
                    break;
                }
                if nearest_zero_distance(ZeroKind::ExpQ, t * q, q)? < 0.05 {
                    continue;
                }
                used += 1;
                let a = exp_q_entire_scaled(t * q, q, tol)?;
                let b = exp_q_reciprocal(t, q, tol)?;
                let prod = a.value.times(b).to_complex();
                w.offer(real(1.0), prod, a.rel_tail());
            }
            Ok(w.report(id, params, thresholds::RECIPROCAL))
        }));
    }
    out
}

/// Relative tolerance for single ray integrals.
fn ray_tol(config: &RunConfig) -> Tolerance {
    Tolerance::mixed(1e-15, config.tol_quad * 1e-3)
}

const MOMENT_DIRECTIONS: [f64; 3] = [-0.5, 0.0, 0.5];

fn moments_suite(config: &RunConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let tol = ray_tol(config);
    for q in q_grid(&[1.5, 2.0], config.q) {
        for n in 0..=10usize {
            for (kind, name) in [(0, "m1"), (1, "m2")] {
                let id = format!("moments.{name} q={q} n={n:02}");
                let params = Params::new().num("q", q).int("n", n as i64);
                let expected = if kind == 0 {
                    (0.5 * (n * n.saturating_sub(1)) as f64 * q.ln()).exp()
                } else {
                    q_factorial(n as u32, q, Mode::Linear).unwrap_or(f64::NAN)
                };
                let run = |theta: f64| {
                    if kind == 0 {
                        moment_integral_m1(n, q, theta, tol)
                    } else {
                        moment_integral_m2(n, q, theta, tol)
                    }
                };
                let results: Result<Vec<QuadResult>> = MOMENT_DIRECTIONS.iter().map(|&t| run(t)).collect();
                match results {
                    Ok(rs) => {
                        let mut w = Worst::new();
                        for r in &rs {
                            w.offer(real(expected), r.value, r.abs_error_estimate);
                        }
                        out.push(w.report(id.clone(), params.clone().text("directions", "-0.5,0,0.5"), thresholds::MOMENTS));
                        let mut spread = 0.0f64;
                        let mut violations = 0;
                        for i in 0..rs.len() {
                            for j in i + 1..rs.len() {
                                let d = (rs[i].value - rs[j].value).norm();
                                let e = rs[i].abs_error_estimate + rs[j].abs_error_estimate;
                                spread = spread.max(d / e);
                                if d > thresholds::DIRECTION_SPREAD * e {
                                    violations += 1;
                                }
                            }
                        }
                        out.push(CheckReport::certificate(
                            format!("moments.{name}_direction q={q} n={n:02}"),
                            params.num("spread_over_estimates", spread),
                            violations,
                        ));
                    }
                    Err(e) => out.push(CheckReport::failure(id, params, &e)),
                }
            }
        }
    }
    out
}

const CAUCHY_TRIPLES: usize = 30;

fn cauchy_suite(config: &RunConfig) -> Vec<CheckReport> {
    let tol = Tolerance::rel(config.tol_quad * 0.1);
    let zs = log_polar_points(CAUCHY_TRIPLES, -1.0, 1.0, -3.0, 3.0, config.seed ^ 0x5eed_0003);
    let ratios = log_polar_points(CAUCHY_TRIPLES, 0.6, 2.0, -3.0, 3.0, config.seed ^ 0x5eed_0004);
    let mut out = Vec::new();
    for (which, name) in [(0, "theta"), (1, "expq")] {
        let mut w = Worst::new();
        let mut failure = None;
        for (i, (z, r)) in zs.iter().zip(&ratios).enumerate() {
            let q = [1.5, 2.0, 3.0][i % 3];
            let (z, omega) = (*z, *r * *z);
            let d = -(omega / z).arg();
            let res = if which == 0 {
                config.alpha(q).and_then(|a| cauchy_kernel_theta(omega, z, q, d, a, tol))
            } else {
                cauchy_kernel_expq(omega, z, q, d, tol)
            };
            match res {
                Ok(v) => w.offer(z / (omega - z), v.value, v.abs_error_estimate),
                Err(e) => {
                    failure.get_or_insert((i, e));
                }
            }
        }
        let id = format!("cauchy.{name}");
        let params = Params::new().int("triples", CAUCHY_TRIPLES as i64).text("q", "1.5,2,3");
        out.push(match failure {
            Some((i, e)) => CheckReport::failure(id, params.int("triple", i as i64), &e),
            None => w.report(id, params, thresholds::CAUCHY),
        });
    }
    out
}

const THEOREM_Z: usize = 3;

fn theorem_points(q: f64, k: usize, eps: f64, alpha: f64, seed: u64) -> Vec<Complex64> {
    let bound = q.powi(-(k as i32)) * eps * q.powf(0.5 - alpha).min(1.0);
    log_polar_points(THEOREM_Z, (0.2 * bound).ln(), (0.8 * bound).ln(), -3.1, 3.1, seed ^ (0x5eed_0010 + k as u64))
}

/// Points per case at which the p = 0 and p = 1 branches are recomputed.
const BRANCH_POINTS: usize = THEOREM_Z;

fn theorem_tol(k: usize) -> f64 {
    if k >= 2 {
        thresholds::THEOREM_K2
    } else {
        thresholds::THEOREM
    }
}

fn theorems_suite(config: &RunConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let quad = Tolerance::mixed(1e-17, config.tol_quad * 0.1);
    for q in q_grid(&[1.5, 2.0], config.q) {
        let alpha = match config.alpha(q) {
            Ok(a) => a,
            Err(e) => {
                out.push(CheckReport::failure(format!("theorems.alpha q={q}"), Params::new().num("q", q), &e));
                continue;
            }
        };
        let funcs: Vec<FunctionSpec> = corpus(q).into_iter().filter(|f| f.radius() > config.eps_contour).collect();
        for f in &funcs {
            for k in 0..=config.k_max.min(2) {
                let params = ReprParams::new(q, k)
                    .with_eps(config.eps_contour)
                    .with_alpha(alpha)
                    .with_margin(config.margin)
                    .with_tol(quad);
                let zs = theorem_points(q, k, config.eps_contour, alpha, config.seed);
                let base = Params::new().num("q", q).int("k", k as i64).text("f", f.name()).num("alpha", alpha);
                out.extend(theorem_case(f, q, k, &zs, &params, base, config.seed));
            }
        }
    }
    out
}

fn theorem_case(
    f: &FunctionSpec,
    q: f64,
    k: usize,
    zs: &[Complex64],
    params: &ReprParams,
    base: Params,
    seed: u64,
) -> Vec<CheckReport> {
    let tol = theorem_tol(k);
    let tag = format!("q={q} k={k} f={}", f.name());
    let mut out = Vec::new();
    // the pointwise oracles return rounding noise where the derivative is exactly zero
    let zero = f.annihilated_by(k);
    let oracle = |v: Complex64| if zero { real(0.0) } else { v };
    let mut m1_values = Vec::new();
    let mut m2_values = Vec::new();
    // tilde-q form against the pointwise oracle
    let id = format!("theorems.tilde_q {tag}");
    out.push(record(id.clone(), base.clone(), |p| {
        let mut w = Worst::new();
        for &z in zs {
            let r = qderiv_repr_m1(f, z, params)?;
            w.offer(oracle(tilde_dq(f, z, q, k)?), r.value, r.abs_error_estimate);
            m1_values.push(r);
        }
        Ok(w.report(id, p, tol))
    }));
    let id = format!("theorems.jackson {tag}");
    out.push(record(id.clone(), base.clone(), |p| {
        let mut w = Worst::new();
        for &z in zs {
            let r = qderiv_repr_m2(f, z, params)?;
            w.offer(oracle(jackson_dq(f, z, q, k)?), r.value, r.abs_error_estimate);
            m2_values.push(r);
        }
        Ok(w.report(id, p, tol))
    }));
    // general (p, q) with q/p = 2 against the pointwise oracle
    let p_gen = q / 2.0;
    let id = format!("theorems.pq {tag} p={p_gen}");
    out.push(record(id.clone(), base.clone().num("p", p_gen), |p| {
        let zs3 = pq_points(q, k, params.eps, seed);
        let mut w = Worst::new();
        for &z in &zs3 {
            let r = pq_deriv_repr(f, z, p_gen, q, params)?;
            w.offer(oracle(pq_derivative(f, z, p_gen, q, k)?), r.value, r.abs_error_estimate);
        }
        Ok(w.report(id, p, tol))
    }));
    // the p = 0 and p = 1 branches reproduce the two theorem paths
    let id = format!("theorems.pq_branch_p0 {tag}");
    out.push(record(id.clone(), base.clone().num("p", 0.0).int("points", BRANCH_POINTS as i64), |p| {
        let mut w = Worst::new();
        for (&z, m1) in zs.iter().zip(&m1_values).take(BRANCH_POINTS) {
            let r = pq_deriv_repr(f, z, 0.0, q, params)?;
            w.offer(m1.value, r.value, 0.0);
        }
        if m1_values.len() != zs.len() {
            return Err(Error::ConstraintViolated("tilde-q path failed".into()));
        }
        Ok(w.report(id, p, thresholds::BRANCH))
    }));
    let id = format!("theorems.pq_branch_p1 {tag}");
    out.push(record(id.clone(), base.num("p", 1.0).int("points", BRANCH_POINTS as i64), |p| {
        let mut w = Worst::new();
        for (&z, m2) in zs.iter().zip(&m2_values).take(BRANCH_POINTS) {
            let r = pq_deriv_repr(f, z, 1.0, q, params)?;
            w.offer(m2.value, r.value, 0.0);
        }
        if m2_values.len() != zs.len() {
            return Err(Error::ConstraintViolated("Jackson path failed".into()));
        }
        Ok(w.report(id, p, thresholds::BRANCH))
    }));
    out
}

/// Points for `D_{p,q}` with `p = q/2`: the exp_2 form needs `|z| < q^{-k} eps`.
fn pq_points(q: f64, k: usize, eps: f64, seed: u64) -> Vec<Complex64> {
    let bound = q.powi(-(k as i32)) * eps;
    log_polar_points(THEOREM_Z, (0.2 * bound).ln(), (0.8 * bound).ln(), -3.1, 3.1, seed ^ (0x5eed_0020 + k as u64))
}

const KERNEL_PAIRS: [(f64, f64); 2] = [(3.0, 2.0), (2.0, 1.5)];

fn kernel_suite(config: &RunConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let mut pairs = KERNEL_PAIRS.to_vec();
    if config.p > config.q && !pairs.iter().any(|&(p, q)| p == config.p && q == config.q) {
        pairs.push((config.p, config.q));
    }
    for (p, q) in pairs {
        let kp = match KernelParams::new(p, q) {
            Ok(k) => k.with_margin(config.margin).with_tol(Tolerance::mixed(1e-15, config.tol_quad * 1e-2)),
            Err(e) => {
                out.push(CheckReport::failure(format!("kernel.params p={p} q={q}"), Params::new(), &e));
                continue;
            }
        };
        let tag = format!("p={p} q={q}");
        let base = Params::new().num("p", p).num("q", q);
        for n in 1..=6usize {
            let expected = pq_factorial(n as u32, p, q, Mode::Linear).unwrap_or(f64::NAN);
            let params = base.clone().int("n", n as i64);
            let fac = pq_moment_via_kernel(n, &kp, MomentPath::Factorized);
            let conv = pq_moment_via_kernel(n, &kp, MomentPath::Convolved);
            let id = format!("kernel.moment_factorized {tag} n={n}");
            out.push(match &fac {
                Ok(r) => CheckReport::identity(id, params.clone(), expected, r.value, r.abs_error_estimate / expected, thresholds::FACTORIZED),
                Err(e) => CheckReport::failure(id, params.clone(), e),
            });
            let id = format!("kernel.moment_convolved {tag} n={n}");
            out.push(match &conv {
                Ok(r) => CheckReport::identity(id, params.clone(), expected, r.value, r.abs_error_estimate / expected, thresholds::CONVOLVED),
                Err(e) => CheckReport::failure(id, params.clone(), e),
            });
            let id = format!("kernel.moment_paths_agree {tag} n={n}");
            out.push(match (&fac, &conv) {
                (Ok(a), Ok(b)) => {
                    let d = (a.value - b.value).norm();
                    let e = a.abs_error_estimate + b.abs_error_estimate;
                    CheckReport::certificate(id, params.num("difference", d).num("combined_estimate", e), usize::from(!(d <= e)))
                }
                (Err(e), _) | (_, Err(e)) => CheckReport::failure(id, params, e),
            });
        }
        let m = match QParams::kernel(p, q).and_then(|qp| moment_sequence(SequenceKind::Mpq, &qp)) {
            Ok(m) => m,
            Err(e) => {
                out.push(CheckReport::failure(format!("kernel.operator_t {tag}"), base.clone(), &e));
                continue;
            }
        };
        for n in 0..=4u32 {
            for (i, &(r, a)) in [(0.6, 0.0), (0.35, 0.25), (0.8, -0.4)].iter().enumerate() {
                let z = LogPolarPoint::new((r * kp.smallness).ln(), a);
                let id = format!("kernel.operator_t {tag} n={n} z={i}");
                let params = base.clone().int("n", n as i64).complex("z", z.to_complex());
                out.push(record(id.clone(), params, |params| {
                    let f = SectorFunction::monomial_in_class(n, 0.0, 2.0, &m, 1.5);
                    let v = laplace_like_t(&f, z, &kp.with_theta(a))?;
                    let expected = pq_factorial(n, p, q, Mode::Linear)? * z.to_complex().powu(n);
                    Ok(CheckReport::identity(id, params, expected, v.value, v.abs_error_estimate / expected.norm(), thresholds::OPERATOR_T))
                }));
            }
        }
        for (i, &u) in [-2.0, -0.5, 0.0, 1.0, 2.5].iter().enumerate() {
            let id = format!("kernel.direction_independence {tag} t={i}");
            let t = LogPolarPoint::new(u, 0.0);
            out.push(record(id.clone(), base.clone().num("log_t", u), |params| {
                let vals: Vec<QuadResult> =
                    [-0.3, 0.0, 0.3].iter().map(|&phi| convolution_kernel(t, &kp.with_phi(phi))).collect::<Result<_>>()?;
                let mut violations = 0;
                for v in &vals[1..] {
                    let e = v.abs_error_estimate + vals[0].abs_error_estimate;
                    if (v.value - vals[0].value).norm() > 10.0 * e.max(1e-13 * vals[0].value.norm()) {
                        violations += 1;
                    }
                }
                Ok(CheckReport::certificate(id, params, violations))
            }));
        }
        let id = format!("kernel.positivity {tag}");
        out.push(record(id.clone(), base.clone().int("points", 10), |params| {
            let mut violations = 0;
            for i in 0..10 {
                let t = LogPolarPoint::new(-4.0 + 0.9 * i as f64, 0.0);
                let v = convolution_kernel(t, &kp)?;
                let slack = v.abs_error_estimate.max(1e-14 * v.value.norm());
                if !(v.value.re > 0.0 && v.value.im.abs() <= slack) {
                    violations += 1;
                }
            }
            Ok(CheckReport::certificate(id, params, violations))
        }));
        let id = format!("kernel.e1_moment {tag} n=2");
        out.push(record(id.clone(), base.clone(), |params| {
            let r = moment_integral_m2(2, p / q, 0.0, ray_tol(config))?;
            let at_zero = kernel_e1(real(0.0), &kp)?;
            let expected = q_factorial(2, p / q, Mode::Linear)?;
            let rep = CheckReport::identity(id, params.num("e1_at_zero", at_zero.re), expected, r.value, r.abs_error_estimate / expected, thresholds::MOMENTS);
            Ok(rep)
        }));
        let id = format!("kernel.e2_moment {tag} n=3");
        out.push(record(id.clone(), base.clone(), |params| {
            let r = moment_integral_m1(3, q, 0.0, ray_tol(config))?;
            let v = kernel_e2(real(1.0), q, ray_tol(config))?;
            let expected = (3.0 * q.ln()).exp();
            Ok(CheckReport::identity(id, params.num("e2_at_one", v.re), expected, r.value, r.abs_error_estimate / expected, thresholds::MOMENTS))
        }));
    }
    out
}

const THETA_DELTAS: [f64; 3] = [0.05, 0.1, 0.2];
const EXPQ_EPS: [f64; 3] = [0.05, 0.1, 0.2];
const BOUND_SAMPLES: usize = 1000;

fn bounds_suite(config: &RunConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let seed = config.seed;
    for q in q_grid(&[1.5, 2.0, 3.0], config.q) {
        let base = Params::new().num("q", q);
        let mut deltas = Vec::new();
        for d in THETA_DELTAS {
            match validate_theta_lower_bound_seeded(q, d, BOUND_SAMPLES, seed) {
                Ok(mut r) => {
                    deltas.push(r.param_f64("Delta_hat").unwrap_or(0.0));
                    r.check_id = format!("bounds.theta_lower q={q} delta={d}");
                    out.push(r);
                }
                Err(e) => out.push(CheckReport::failure(format!("bounds.theta_lower q={q} delta={d}"), base.clone(), &e)),
            }
        }
        if deltas.len() == THETA_DELTAS.len() {
            let (lo, hi) = deltas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            let spread = hi / lo;
            out.push(CheckReport::certificate(
                format!("bounds.theta_delta_independence q={q}"),
                base.clone().num("spread", spread),
                usize::from(!(spread <= thresholds::DELTA_SPREAD)),
            ));
        }
        for e in EXPQ_EPS {
            let id = format!("bounds.expq q={q} eps={e}");
            match validate_expq_bounds_seeded(q, e, BOUND_SAMPLES, seed) {
                Ok(mut r) => {
                    r.check_id = id;
                    out.push(r);
                }
                Err(err) => out.push(CheckReport::failure(id, base.clone(), &err)),
            }
        }
        let id = format!("bounds.eq_growth q={q}");
        out.push(record(id.clone(), base.clone(), |params| {
            let a = estimate_alpha_Eq(q, &default_alpha_radii(25), &default_alpha_directions())?;
            let shifted: Vec<f64> = default_alpha_radii(24).iter().map(|r| r * 1.3).collect();
            let b = estimate_alpha_Eq(q, &shifted, &default_alpha_directions())?;
            let (aa, ab) = (a.get("alpha").unwrap_or(f64::NAN), b.get("alpha").unwrap_or(f64::NAN));
            let unstable = usize::from(!((aa - ab).abs() <= thresholds::ALPHA_STABILITY));
            let params = params
                .num("alpha", aa)
                .num("K", a.get("K").unwrap_or(f64::NAN))
                .num("alpha_second_grid", ab)
                .int("held_out", a.held_out as i64);
            Ok(CheckReport::certificate(id, params, a.violations + b.violations + unstable))
        }));
        let id = format!("bounds.cq_limit q={q}");
        out.push(record(id.clone(), base.clone().int("N", 100), |params| {
            let r = estimate_cq_limit(q, 100)?;
            let inc = r.get("increment_N").unwrap_or(f64::INFINITY);
            let params = params.num("c_q", r.get("c_q").unwrap_or(f64::NAN)).num("increment_N", inc);
            Ok(CheckReport::certificate(id, params, usize::from(!(inc < thresholds::CQ_INCREMENT))))
        }));
    }
    let (p, q) = if config.p > config.q { (config.p, config.q) } else { (3.0, 2.0) };
    let id = format!("bounds.weight_product p={p} q={q}");
    out.push(record(id.clone(), Params::new().num("p", p).num("q", q), |params| {
        let mpq = moment_sequence(SequenceKind::Mpq, &QParams::kernel(p, q)?)?;
        let m_ratio = moment_sequence(SequenceKind::M2, &QParams::single(p / q)?)?;
        let m1 = moment_sequence(SequenceKind::M1, &QParams::single(q)?)?;
        let grid = [0.5, 3.0, 40.0, 900.0];
        let sgrid = [0.7, 2.0, 15.0, 120.0];
        let mut r = check_weight_submultiplicativity_for(&mpq, &m_ratio, &m1, &grid, &sgrid);
        r.check_id = id;
        for (k, v) in params.into_map() {
            r.params.entry(k).or_insert(v);
        }
        Ok(r)
    }));
    let id = "bounds.class_membership".to_string();
    out.push(record(id.clone(), Params::new().num("q", config.q), |params| {
        let m1 = moment_sequence(SequenceKind::M1, &QParams::single(config.q)?)?;
        let mut violations = 0;
        for n in [0u32, 1, 3] {
            if check_class_membership(&SectorFunction::monomial(n, 0.0, PI), &m1, 1.5, 256).is_err() {
                violations += 1;
            }
        }
        let lq = config.q.ln();
        let fast = SectorFunction::new(
            "exp(log²|u|/log q)",
            move |p: LogPolarPoint| Ok(crate::special::Scaled::from_log_polar(p.log_r * p.log_r / lq, 0.0)),
            0.0,
            1.0,
        );
        if !matches!(check_class_membership(&fast, &m1, 1.01, 256), Err(Error::WitnessFailed(_))) {
            violations += 1;
        }
        Ok(CheckReport::certificate(id, params, violations))
    }));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalTarget {
    Theta,
    ExpQ,
    #[serde(rename = "E_q")]
    BigEq,
    E1,
    E2,
    ETilde,
}

impl EvalTarget {
    pub const NAMES: [&'static str; 6] = ["theta", "exp_q", "E_q", "e1", "e2", "e_tilde"];

    pub fn parse(s: &str) -> Result<EvalTarget> {
        Ok(match s {
            "theta" => EvalTarget::Theta,
            "exp_q" => EvalTarget::ExpQ,
            "E_q" => EvalTarget::BigEq,
            "e1" => EvalTarget::E1,
            "e2" => EvalTarget::E2,
            "e_tilde" => EvalTarget::ETilde,
            _ => return Err(Error::Config(format!("unknown target {s:?}; expected one of {:?}", EvalTarget::NAMES))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutput {
    pub target: String,
    pub z: Complex64,
    pub value: Complex64,
    /// Series terms or quadrature nodes.
    pub work: usize,
    pub error_bound: f64,
}

/// Evaluates one special function or kernel at `z`.
pub fn eval_point(config: &RunConfig, target: EvalTarget, z: Complex64) -> Result<EvalOutput> {
    config.validate()?;
    let q = config.q;
    let tol = config.tol_series;
    let name = EvalTarget::NAMES[target as usize].to_string();
    let out = |value: Complex64, work: usize, error_bound: f64| EvalOutput {
        target: name.clone(),
        z,
        value,
        work,
        error_bound,
    };
    match target {
        EvalTarget::Theta => {
            let r = crate::special::theta_q(LogPolarPoint::from_complex(z)?, q, tol)?;
            Ok(out(r.value, r.terms_used, r.tail_bound))
        }
        EvalTarget::ExpQ => {
            let r = exp_q_entire(z, q, tol)?;
            Ok(out(r.value, r.terms_used, r.tail_bound))
        }
        EvalTarget::BigEq => {
            let r = e_q_entire(z, q, tol)?;
            Ok(out(r.value, r.terms_used, r.tail_bound))
        }
        EvalTarget::E1 => {
            let kp = KernelParams::new(config.p, q)?;
            Ok(out(kernel_e1(z, &kp)?, 0, 0.0))
        }
        EvalTarget::E2 => Ok(out(kernel_e2(z, q, Tolerance::rel(tol))?, 0, 0.0)),
        EvalTarget::ETilde => {
            let kp = KernelParams::new(config.p, q)?.with_margin(config.margin);
            let r = convolution_kernel(LogPolarPoint::from_complex(z)?, &kp)?;
            Ok(out(r.value, r.nodes_used, r.abs_error_estimate))
        }
    }
}
