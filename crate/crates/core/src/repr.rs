//! Moment integrals, Cauchy-kernel identities and contour-integral
//! representations of the tilde-q-, Jackson q- and (p,q)-derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad::{
    admissible_direction, integrate_nested, integrate_ray, CircleSpec, DecayEnvelope, LogShape, QuadResult, RaySpec,
    Tolerance,
};
use crate::series::FunctionSpec;
use crate::special::{
    e_q_entire_scaled_at, exp_q_product_scaled_at, exp_q_recip_scaled_at, theta_recip_scaled, LogPolarPoint, Scaled,
};
use crate::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 0.3;
/// Growth exponent used for `E_q` when no fitted value is supplied: the
/// fitted value 0.5 plus a safety of 0.25.
pub const DEFAULT_ALPHA: f64 = 0.75;
pub const DEFAULT_K_CAP: usize = 4;
/// Required excess of `|ω/z|` over `q^{α-1/2}` in the Θ-kernel identity.
pub const THETA_KERNEL_SAFETY_LOG_Q: f64 = 0.1;
pub const EXPQ_KERNEL_SAFETY: f64 = 1.1;
const SPECIAL_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReprParams {
    pub q: f64,
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
    pub margin: f64,
    pub tol: Tolerance,
    pub k_cap: usize,
}

impl ReprParams {
    pub fn new(q: f64, k: usize) -> Self {
        ReprParams {
            q,
            k,
            eps: 0.5,
            alpha: DEFAULT_ALPHA,
            margin: DEFAULT_MARGIN,
            tol: Tolerance::mixed(1e-13, 1e-10),
            k_cap: DEFAULT_K_CAP,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    fn validate(&self, f: &FunctionSpec) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::InvalidParameter(format!("q must exceed 1, got {}", self.q)));
        }
        if self.k > self.k_cap {
            return Err(Error::ConstraintViolated(format!("k = {} exceeds the cap {}", self.k, self.k_cap)));
        }
        if !(self.eps > 0.0 && self.eps < f.radius()) {
            return Err(Error::ConstraintViolated(format!(
                "contour radius {} must lie in (0, {}) for {}",
                self.eps,
                f.radius(),
                f.name()
            )));
        }
        Ok(())
    }
}

/// One factor of a ray integrand, as a function of `ζ`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Factor {
    /// `E_q(c ζ)` with growth exponent `alpha`.
    Eq { q: f64, c: LogPolarPoint, alpha: f64 },
    /// `1 / Θ_q(c ζ)`.
    ThetaRecip { q: f64, c: LogPolarPoint },
    /// `exp_q(c ζ)`.
    Expq { q: f64, c: LogPolarPoint },
    /// `1 / exp_q(c ζ)`.
    ExpqRecip { q: f64, c: LogPolarPoint },
}

impl Factor {
    fn eval(&self, zeta: &LogPolarPoint) -> Result<Scaled> {
        match *self {
            Factor::Eq { q, c, .. } => Ok(e_q_entire_scaled_at(c.mul(zeta), q, SPECIAL_TOL)?.value),
            Factor::ThetaRecip { q, c } => theta_recip_scaled(c.mul(zeta), q, SPECIAL_TOL),
            Factor::Expq { q, c } => exp_q_product_scaled_at(c.mul(zeta), q),
            Factor::ExpqRecip { q, c } => exp_q_recip_scaled_at(c.mul(zeta), q),
        }
    }

    fn log_q(&self) -> f64 {
        match *self {
            Factor::Eq { q, .. } | Factor::ThetaRecip { q, .. } | Factor::Expq { q, .. } | Factor::ExpqRecip { q, .. } => {
                q.ln()
            }
        }
    }

    /// `(a2, a1)` with `log|factor| ≈ a2 u² + a1 u` as `u = log|ζ| → ±∞`.
    fn asymptote(&self, outer: bool) -> (f64, f64) {
        let l = self.log_q();
        match *self {
            Factor::Eq { c, alpha, .. } => {
                if outer {
                    (0.5 / l, c.log_r / l + alpha)
                } else {
                    (0.0, 0.0)
                }
            }
            Factor::ThetaRecip { c, .. } => (-0.5 / l, -(c.log_r / l + 0.5)),
            Factor::Expq { q, c } | Factor::ExpqRecip { q, c } => {
                let sign = if matches!(self, Factor::Expq { .. }) { 1.0 } else { -1.0 };
                if outer {
                    (sign * 0.5 / l, sign * ((c.log_r + (q - 1.0).ln()) / l - 0.5))
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// `log|ζ|` at which the factor's argument has modulus one.
    fn crossover(&self) -> f64 {
        match *self {
            Factor::Eq { c, .. } | Factor::ThetaRecip { c, .. } => -c.log_r,
            Factor::Expq { q, c } | Factor::ExpqRecip { q, c } => -c.log_r - (q - 1.0).ln(),
        }
    }
}

/// `ζ^power · ∏ factors`.
#[derive(Debug, Clone)]
pub(crate) struct RayProduct {
    pub(crate) power: f64,
    pub(crate) factors: Vec<Factor>,
}

impl RayProduct {
    pub(crate) fn eval(&self, zeta: LogPolarPoint) -> Result<Scaled> {
        let mut acc = Scaled::from_log_polar(self.power * zeta.log_r, self.power * zeta.arg);
        for f in &self.factors {
            acc = acc * f.eval(&zeta)?;
            if acc.is_zero() {
                return Ok(Scaled::ZERO);
            }
        }
        Ok(acc)
    }

    pub(crate) fn shapes(&self) -> (LogShape, LogShape, f64) {
        let side = |outer: bool| {
            let (mut a2, mut a1) = (0.0, self.power);
            for f in &self.factors {
                let (b2, b1) = f.asymptote(outer);
                a2 += b2;
                a1 += b1;
            }
            let beta = (-a2).max(0.0);
            // a Gaussian side absorbs a generous slack in the power
            let slack = if beta > 0.0 { 0.5 } else { 0.0 };
            (beta, if outer { a1 + slack } else { a1 - slack })
        };
        let crosses: Vec<f64> = self.factors.iter().map(Factor::crossover).collect();
        let hi = crosses.iter().copied().fold(0.0, f64::max) + 3.0;
        let lo = crosses.iter().copied().fold(0.0, f64::min) - 3.0;
        let (bo, mo) = side(true);
        let (bi, mi) = side(false);
        let period = self.factors.iter().map(Factor::log_q).fold(0.0, f64::max);
        (LogShape::new(bo, mo, hi), LogShape::new(bi, mi, lo), period)
    }

    /// Integrates along `L_θ` after dividing by the peak modulus on a coarse
    /// grid, so integrands far outside the normal range keep their envelopes.
    /// The absolute part of `tol` is taken relative to that peak.
    pub(crate) fn integrate(&self, theta: f64, tol: Tolerance) -> Result<QuadResult> {
        let (outer, inner, period) = self.shapes();
        let (lo, hi) = (inner.pivot - 8.0, outer.pivot + 8.0);
        let mut peak = f64::NEG_INFINITY;
        for i in 0..=64 {
            let u = lo + (hi - lo) * i as f64 / 64.0;
            peak = peak.max(self.eval(LogPolarPoint::new(u, theta))?.log_abs());
        }
        let shift = if peak.is_finite() { peak } else { 0.0 };
        let g = |p: LogPolarPoint| Ok(self.eval(p)?.scale_log(-shift));
        let env = DecayEnvelope::calibrate(&g, theta, outer, inner, period)?;
        let res = integrate_ray(&g, RaySpec::new(theta), &env, tol)?;
        Ok(rescale(res, shift))
    }
}

fn rescale(res: QuadResult, shift: f64) -> QuadResult {
    let s = Scaled::from_log_polar(shift, 0.0);
    QuadResult {
        value: s.times(res.value).to_complex(),
        abs_error_estimate: s.times(Complex64::new(res.abs_error_estimate, 0.0)).to_complex().re,
        nodes_used: res.nodes_used,
    }
}

pub(crate) fn wrap(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

pub(crate) fn require_direction(total_arg: f64, margin: f64, what: &str) -> Result<()> {
    if wrap(total_arg).abs() > PI - margin {
        return Err(Error::InadmissibleDirection(format!(
            "{what}: argument {total_arg} lies within {margin} of ±π"
        )));
    }
    Ok(())
}

fn lift(z: Complex64, what: &str) -> Result<LogPolarPoint> {
    LogPolarPoint::from_complex(z).map_err(|_| Error::InvalidParameter(format!("{what} must be nonzero")))
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must exceed 1, got {q}")))
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(q / log q) ∫_{L_θ} t^n / Θ_q(q t) dt`, equal to `q^{n(n-1)/2}`.
pub fn moment_integral_m1(n: usize, q: f64, theta: f64, tol: Tolerance) -> Result<QuadResult> {
    check_q(q)?;
    require_direction(theta, DEFAULT_MARGIN, "moment ray")?;
    let prod = RayProduct {
        power: n as f64,
        factors: vec![Factor::ThetaRecip { q, c: LogPolarPoint::new(q.ln(), 0.0) }],
    };
    Ok(prod.integrate(theta, tol)?.scale(real(q / q.ln())))
}

/// `((q - 1) / log q) ∫_{L_θ} t^n exp_{1/q}(-q t) dt`, equal to `[n]_q!`.
pub fn moment_integral_m2(n: usize, q: f64, theta: f64, tol: Tolerance) -> Result<QuadResult> {
    check_q(q)?;
    require_direction(theta, DEFAULT_MARGIN, "moment ray")?;
    let prod = RayProduct {
        power: n as f64,
        factors: vec![Factor::ExpqRecip { q, c: LogPolarPoint::new(q.ln(), 0.0) }],
    };
    Ok(prod.integrate(theta, tol)?.scale(real((q - 1.0) / q.ln())))
}

/// `(q / log q) ∫_{L_d} E_q(ξ) / Θ_q(q ω ξ / z) dξ = z / (ω - z)`.
pub fn cauchy_kernel_theta(omega: Complex64, z: Complex64, q: f64, d: f64, alpha: f64, tol: Tolerance) -> Result<QuadResult> {
    check_q(q)?;
    let ratio = kernel_ratio(omega, z)?;
    let need = (alpha - 0.5 + THETA_KERNEL_SAFETY_LOG_Q) * q.ln();
    if ratio.log_r <= need {
        return Err(Error::ConstraintViolated(format!(
            "|ω/z| = {} must exceed q^(α - 1/2 + {THETA_KERNEL_SAFETY_LOG_Q}) = {}",
            ratio.log_r.exp(),
            need.exp()
        )));
    }
    require_direction(ratio.arg + d, DEFAULT_MARGIN, "Θ-kernel ray")?;
    let prod = RayProduct {
        power: 0.0,
        factors: vec![
            Factor::Eq { q, c: LogPolarPoint::new(0.0, 0.0), alpha },
            Factor::ThetaRecip { q, c: ratio.scale(q.ln()) },
        ],
    };
    Ok(prod.integrate(d, tol)?.scale(real(q / q.ln())))
}

/// `((q - 1) / log q) ∫_{L_d} exp_q(ξ) / exp_q(q ω ξ / z) dξ = z / (ω - z)`,
/// requiring `|ω/z| >= 1.1`.
pub fn cauchy_kernel_expq(omega: Complex64, z: Complex64, q: f64, d: f64, tol: Tolerance) -> Result<QuadResult> {
    cauchy_kernel_expq_with_safety(omega, z, q, d, tol, EXPQ_KERNEL_SAFETY)
}

/// [`cauchy_kernel_expq`] with an explicit lower bound `safety >= 1` on
/// `|ω/z|`; ratios close to 1 decay slowly and need large node budgets.
pub fn cauchy_kernel_expq_with_safety(
    omega: Complex64,
    z: Complex64,
    q: f64,
    d: f64,
    tol: Tolerance,
    safety: f64,
) -> Result<QuadResult> {
    check_q(q)?;
    let ratio = kernel_ratio(omega, z)?;
    if !(safety >= 1.0) || ratio.log_r <= safety.ln() || ratio.log_r <= 0.0 {
        return Err(Error::ConstraintViolated(format!(
            "|ω/z| = {} must exceed {}",
            ratio.log_r.exp(),
            safety.max(1.0)
        )));
    }
    require_direction(ratio.arg + d, DEFAULT_MARGIN, "exp_q-kernel ray")?;
    let prod = RayProduct {
        power: 0.0,
        factors: vec![
            Factor::Expq { q, c: LogPolarPoint::new(0.0, 0.0) },
            Factor::ExpqRecip { q, c: ratio.scale(q.ln()) },
        ],
    };
    Ok(prod.integrate(d, tol)?.scale(real((q - 1.0) / q.ln())))
}

fn kernel_ratio(omega: Complex64, z: Complex64) -> Result<LogPolarPoint> {
    let z = lift(z, "z")?;
    let w = lift(omega, "ω")?;
    if omega == z.to_complex() || (w.log_r == z.log_r && wrap(w.arg - z.arg) == 0.0) {
        return Err(Error::InvalidParameter("kernel identity undefined at ω = z".into()));
    }
    Ok(LogPolarPoint::new(w.log_r - z.log_r, wrap(w.arg - z.arg)))
}

/// Shared outer circle for the three derivative representations.
fn contour<B>(f: &FunctionSpec, eps: f64, margin: f64, tol: Tolerance, build: B) -> Result<QuadResult>
where
    B: Fn(LogPolarPoint) -> RayProduct + Sync,
{
    let inner = |w: Complex64, t: Tolerance| -> Result<QuadResult> {
        let wp = lift(w, "contour node")?;
        let theta = admissible_direction(wp.arg, &[], margin)?;
        let r = build(wp).integrate(theta, t)?;
        Ok(r.scale(f.eval(w)?))
    };
    integrate_nested(inner, CircleSpec::new(eps, true), tol)
}

fn optional_lift(z: Complex64) -> Option<LogPolarPoint> {
    LogPolarPoint::from_complex(z).ok()
}

/// `D̃_q^k f(z)` as `(q/(2πi log q)) ∮ f(ω) ∫ ζ^k E_q(zζ)/Θ_q(qωζ) dζ dω`.
pub fn qderiv_repr_m1(f: &FunctionSpec, z: Complex64, params: &ReprParams) -> Result<QuadResult> {
    params.validate(f)?;
    let q = params.q;
    let bound = q.powi(-(params.k as i32)) * params.eps * q.powf(0.5 - params.alpha).min(1.0);
    if !(z.norm() < bound) {
        return Err(Error::ConstraintViolated(format!("|z| = {} must be below {bound}", z.norm())));
    }
    let zl = optional_lift(z);
    let (k, alpha) = (params.k as f64, params.alpha);
    let r = contour(f, params.eps, params.margin, params.tol, |w| {
        let mut factors = Vec::with_capacity(2);
        if let Some(c) = zl {
            factors.push(Factor::Eq { q, c, alpha });
        }
        factors.push(Factor::ThetaRecip { q, c: w.scale(q.ln()) });
        RayProduct { power: k, factors }
    })?;
    Ok(r.scale(real(q / q.ln())))
}

/// `D_q^k f(z)` as `((q-1)/(2πi log q)) ∮ f(ω) ∫ ζ^k exp_q(zζ)/exp_q(qωζ) dζ dω`.
pub fn qderiv_repr_m2(f: &FunctionSpec, z: Complex64, params: &ReprParams) -> Result<QuadResult> {
    params.validate(f)?;
    let q = params.q;
    expq_form(f, z, 1.0, q, params)
}

/// Shared `exp_Q` form with `Q = q/p`, prefactor `p^{k(k-1)/2}`.
fn expq_form(f: &FunctionSpec, z: Complex64, p: f64, q: f64, params: &ReprParams) -> Result<QuadResult> {
    let bound = q.powi(-(params.k as i32)) * params.eps;
    if !(z.norm() < bound) {
        return Err(Error::ConstraintViolated(format!("|z| = {} must be below {bound}", z.norm())));
    }
    let big_q = q / p;
    let kk = params.k as i32;
    let zl = optional_lift(z * p.powi(kk));
    let r = contour(f, params.eps, params.margin, params.tol, |w| {
        let mut factors = Vec::with_capacity(2);
        if let Some(c) = zl {
            factors.push(Factor::Expq { q: big_q, c });
        }
        factors.push(Factor::ExpqRecip { q: big_q, c: w.scale(big_q.ln()) });
        RayProduct { power: params.k as f64, factors }
    })?;
    let pre = p.powi(kk * (kk - 1) / 2) * (big_q - 1.0) / big_q.ln();
    Ok(r.scale(real(pre)))
}

/// `D_{p,q}^k f(z)`: the Θ form at `p = 0`, the `exp_{q/p}` form otherwise.
pub fn pq_deriv_repr(f: &FunctionSpec, z: Complex64, p: f64, q: f64, params: &ReprParams) -> Result<QuadResult> {
    if !(p >= 0.0 && p < q) {
        return Err(Error::InvalidParameter(format!("need 0 <= p < q, got p = {p}, q = {q}")));
    }
    let mut local = *params;
    if p == 0.0 {
        local.q = q;
        return qderiv_repr_m1(f, z, &local);
    }
    if !(q / p > 1.0) {
        return Err(Error::InvalidParameter(format!("q/p must exceed 1, got {}", q / p)));
    }
    local.q = q / p;
    local.validate(f)?;
    expq_form(f, z, p, q, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::corpus;

    fn spec(name: &str, q: f64) -> FunctionSpec {
        corpus(q).into_iter().find(|f| f.name() == name).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn moment_examples() {
        let tol = Tolerance::rel(1e-11);
        assert!(rel(moment_integral_m1(0, 2.0, 0.0, tol).unwrap().value, real(1.0)) < 1e-9);
        assert!(rel(moment_integral_m1(1, 1.7, 0.0, tol).unwrap().value, real(1.0)) < 1e-9);
        assert!(rel(moment_integral_m1(3, 2.0, 0.0, tol).unwrap().value, real(8.0)) < 1e-9);
        assert!(rel(moment_integral_m2(0, 2.0, 0.0, tol).unwrap().value, real(1.0)) < 1e-9);
        assert!(rel(moment_integral_m2(2, 2.0, 0.0, tol).unwrap().value, real(3.0)) < 1e-9);
        assert!(rel(moment_integral_m2(3, 1.5, 0.2, tol).unwrap().value, real(11.875)) < 1e-9);
        assert!(matches!(moment_integral_m1(2, 2.0, PI - 0.1, tol), Err(Error::InadmissibleDirection(_))));
    }

    #[test]
    fn kernel_examples() {
        let tol = Tolerance::rel(1e-10);
        let r = cauchy_kernel_theta(real(2.0), real(1.0), 2.0, 0.0, DEFAULT_ALPHA, tol).unwrap();
        assert!(rel(r.value, real(1.0)) < 1e-8, "{r:?}");
        let (w, z) = (Complex64::new(0.0, 2.0), real(0.5));
        let d = -(w / z).arg();
        let r = cauchy_kernel_theta(w, z, 1.5, d, DEFAULT_ALPHA, tol).unwrap();
        assert!(rel(r.value, z / (w - z)) < 1e-8, "{r:?}");
        assert!(cauchy_kernel_theta(real(1.0), real(1.0), 2.0, 0.0, DEFAULT_ALPHA, tol).is_err());
        let r = cauchy_kernel_expq(real(3.0), real(1.0), 2.0, 0.0, tol).unwrap();
        assert!(rel(r.value, real(0.5)) < 1e-8, "{r:?}");
        let r = cauchy_kernel_expq(Complex64::from_polar(1.2, 0.5), Complex64::from_polar(0.6, 0.5), 2.0, 0.0, tol).unwrap();
        assert!(rel(r.value, real(1.0)) < 1e-8, "{r:?}");
        assert!(cauchy_kernel_expq(real(1.05), real(1.0), 2.0, 0.0, tol).is_err());
    }

    #[test]
    fn theorem_examples() {
        let p = ReprParams::new(2.0, 1).with_tol(Tolerance::mixed(1e-12, 1e-9));
        let z = real(0.1);
        let r = qderiv_repr_m1(&spec("z^2", 2.0), z, &p).unwrap();
        assert!(rel(r.value, real(0.2)) < 1e-7, "{r:?}");
        let r = qderiv_repr_m2(&spec("geometric", 2.0), z, &p).unwrap();
        assert!(rel(r.value, real(1.0 / (0.8 * 0.9))) < 1e-7, "{r:?}");
        let r = qderiv_repr_m2(&spec("z^0", 2.0), z, &p).unwrap();
        assert!(r.value.norm() < 1e-8, "{r:?}");
        let p0 = ReprParams::new(2.0, 0).with_tol(Tolerance::mixed(1e-12, 1e-9));
        let g = spec("geometric", 2.0);
        let r = qderiv_repr_m1(&g, Complex64::new(0.1, 0.05), &p0).unwrap();
        assert!(rel(r.value, g.eval(Complex64::new(0.1, 0.05)).unwrap()) < 1e-7, "{r:?}");
    }

    #[test]
    fn corollary_prefactor() {
        let p = ReprParams::new(3.0, 1).with_tol(Tolerance::mixed(1e-12, 1e-9));
        let r = pq_deriv_repr(&spec("z^3", 3.0), real(0.05), 2.0, 3.0, &p).unwrap();
        assert!(rel(r.value, real(0.0475)) < 1e-7, "{r:?}");
        assert!(pq_deriv_repr(&spec("z^3", 3.0), real(0.05), 3.0, 3.0, &p).is_err());
    }

    #[test]
    fn constraint_violations() {
        let p = ReprParams::new(2.0, 1);
        assert!(matches!(
            qderiv_repr_m1(&spec("z^2", 2.0), real(0.3), &p),
            Err(Error::ConstraintViolated(_))
        ));
        assert!(matches!(
            qderiv_repr_m2(&spec("geometric", 2.0), real(0.1), &p.with_eps(1.5)),
            Err(Error::ConstraintViolated(_))
        ));
        let p5 = ReprParams::new(2.0, 5);
        assert!(matches!(
            qderiv_repr_m2(&spec("z^2", 2.0), real(0.001), &p5),
            Err(Error::ConstraintViolated(_))
        ));
    }
}
