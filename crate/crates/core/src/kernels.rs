//! Kernel functions e₁, e₂, the convolution kernel ẽ whose moments are the
//! (p,q)-factorials, and the Laplace-like operator T.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::bounds::check_class_membership;
use crate::qcore::MomentSequence;
use crate::quad::{integrate_ray, DecayEnvelope, LogShape, QuadResult, RaySpec, Tolerance};
use crate::repr::{check_q, moment_integral_m1, moment_integral_m2, require_direction, wrap, Factor, RayProduct};
use crate::special::{exp_q_recip_scaled, theta_recip_scaled, LogPolarPoint, Scaled};
use crate::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 0.3;
const SPECIAL_TOL: f64 = 1e-16;
const WITNESS_SAMPLES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub p: f64,
    pub q: f64,
    /// Direction of the inner ray of ẽ.
    pub phi: f64,
    /// Direction of the ray of T.
    pub theta: f64,
    /// Tolerance for kernel evaluations and single ray integrals.
    pub tol: Tolerance,
    /// Tolerance of outer integrals whose integrand is itself a quadrature.
    pub outer_tol: Tolerance,
    pub c0: f64,
    /// `|z|` bound for T.
    pub smallness: f64,
    pub margin: f64,
}

impl KernelParams {
    /// Defaults: `φ = θ = 0`, `c0` half its upper bound and the smallness
    /// threshold `0.5 min(p/q - 1, c0 p/q)`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_q(q)?;
        if !(p > q && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernels need p > q > 1, got p = {p}, q = {q}")));
        }
        let c0 = 0.5 * Self::c0_bound(p, q);
        let params = KernelParams {
            p,
            q,
            phi: 0.0,
            theta: 0.0,
            tol: Tolerance::mixed(1e-15, 1e-10),
            outer_tol: Tolerance::mixed(1e-12, 1e-6),
            c0,
            smallness: Self::default_smallness(p, q, c0),
            margin: DEFAULT_MARGIN,
        };
        params.validate()?;
        Ok(params)
    }

    /// Upper bound `(1 - q/p) q/p` on `c0`.
    pub fn c0_bound(p: f64, q: f64) -> f64 {
        (1.0 - q / p) * (q / p)
    }

    pub fn default_smallness(p: f64, q: f64, c0: f64) -> f64 {
        let r = p / q;
        0.5 * (r - 1.0).min(c0 * r)
    }

    pub fn ratio(&self) -> f64 {
        self.p / self.q
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_outer_tol(mut self, tol: Tolerance) -> Self {
        self.outer_tol = tol;
        self
    }

    /// Sets `c0` and resets the smallness threshold to its default.
    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self.smallness = Self::default_smallness(self.p, self.q, c0);
        self
    }

    pub fn with_smallness(mut self, s: f64) -> Self {
        self.smallness = s;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if !(self.p > self.q && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernels need p > q > 1, got p = {}, q = {}", self.p, self.q)));
        }
        let bound = Self::c0_bound(self.p, self.q);
        if !(self.c0 > 0.0 && self.c0 < bound) {
            return Err(Error::InvalidParameter(format!("c0 must lie in (0, {bound}), got {}", self.c0)));
        }
        if !(self.smallness > 0.0 && self.smallness.is_finite()) {
            return Err(Error::InvalidParameter(format!("smallness must be positive, got {}", self.smallness)));
        }
        if !(self.margin > 0.0 && self.margin < PI / 2.0) {
            return Err(Error::InvalidParameter(format!("margin must lie in (0, π/2), got {}", self.margin)));
        }
        require_direction(self.phi, self.margin, "convolution direction φ")
    }
}

/// Growth witness: `|f(z)| <= c e^{ω_M(|z|/k)}` on the sector.
#[derive(Debug, Clone)]
pub struct Witness {
    pub m: MomentSequence,
    pub k: f64,
    pub c: f64,
}

type Evaluator = Arc<dyn Fn(LogPolarPoint) -> Result<Scaled> + Send + Sync>;

/// A function on a sector `|arg z - bisector| < opening / 2` of the log surface.
#[derive(Clone)]
pub struct SectorFunction {
    name: String,
    eval: Evaluator,
    bisector: f64,
    opening: f64,
    witness: Option<Witness>,
    growth: Option<(f64, f64)>,
}

impl fmt::Debug for SectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectorFunction")
            .field("name", &self.name)
            .field("bisector", &self.bisector)
            .field("opening", &self.opening)
            .field("witness", &self.witness)
            .field("growth", &self.growth)
            .finish()
    }
}

impl SectorFunction {
    pub fn new<F>(name: impl Into<String>, eval: F, bisector: f64, opening: f64) -> Self
    where
        F: Fn(LogPolarPoint) -> Result<Scaled> + Send + Sync + 'static,
    {
        SectorFunction { name: name.into(), eval: Arc::new(eval), bisector, opening, witness: None, growth: None }
    }

    /// `u^n`, with growth hint `log|u^n| = n log|u|`.
    pub fn monomial(n: u32, bisector: f64, opening: f64) -> Self {
        let nf = n as f64;
        SectorFunction::new(
            format!("u^{n}"),
            move |p: LogPolarPoint| Ok(Scaled::from_log_polar(nf * p.log_r, nf * p.arg)),
            bisector,
            opening,
        )
        .with_growth(0.0, nf)
    }

    /// `u^n` with the witness `c = M_n k^n`, which follows from
    /// `ω_M(t) >= n log t - log M_n`.
    pub fn monomial_in_class(n: u32, bisector: f64, opening: f64, m: &MomentSequence, k: f64) -> Self {
        let c = (m.log_at(n as usize) + n as f64 * k.ln()).exp();
        Self::monomial(n, bisector, opening).with_witness(m.clone(), k, c)
    }

    pub fn zero(bisector: f64, opening: f64) -> Self {
        SectorFunction::new("0", |_| Ok(Scaled::ZERO), bisector, opening).with_growth(0.0, 0.0)
    }

    pub fn with_witness(mut self, m: MomentSequence, k: f64, c: f64) -> Self {
        self.witness = Some(Witness { m, k, c });
        self
    }

    /// Hint `log|f(z)| ≈ a2 log²|z| + a1 log|z|` for large `|z|`.
    pub fn with_growth(mut self, a2: f64, a1: f64) -> Self {
        self.growth = Some((a2, a1));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bisector(&self) -> f64 {
        self.bisector
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    pub fn growth(&self) -> Option<(f64, f64)> {
        self.growth
    }

    pub fn contains_direction(&self, arg: f64) -> bool {
        wrap(arg - self.bisector).abs() < 0.5 * self.opening
    }

    pub fn eval(&self, z: LogPolarPoint) -> Result<Scaled> {
        (self.eval)(z)
    }
}

/// `((p/q - 1) / log(p/q)) / exp_{p/q}(p z / q)`.
pub fn kernel_e1(z: Complex64, params: &KernelParams) -> Result<Complex64> {
    params.validate()?;
    let r = params.ratio();
    Ok(exp_q_recip_scaled(z * r, r)?.to_complex() * ((r - 1.0) / r.ln()))
}

/// `(q / log q) / Θ_q(q z)`.
pub fn kernel_e2(z: Complex64, q: f64, tol: Tolerance) -> Result<Complex64> {
    check_q(q)?;
    if !(tol.rel > 0.0 || tol.abs > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let w = LogPolarPoint::from_complex(z * q)
        .map_err(|_| Error::InvalidParameter("e₂ needs z ≠ 0".into()))?;
    Ok(theta_recip_scaled(w, q, SPECIAL_TOL)?.to_complex() * (q / q.ln()))
}

/// `ẽ(t) = t ∫_{L_φ} e₁(w t) e₂(1/w) dw/w`, using `Θ_q(q/w) = Θ_q(w/q²)`.
pub fn convolution_kernel(t: LogPolarPoint, params: &KernelParams) -> Result<QuadResult> {
    params.validate()?;
    require_direction(t.arg + params.phi, params.margin, "argument of t w")?;
    let (p, q) = (params.p, params.q);
    let r = p / q;
    let prod = RayProduct {
        power: -1.0,
        factors: vec![
            Factor::ExpqRecip { q: r, c: t.scale(r.ln()) },
            Factor::ThetaRecip { q, c: LogPolarPoint::new(-2.0 * q.ln(), 0.0) },
        ],
    };
    let c = (r - 1.0) / r.ln() * q / q.ln();
    let res = prod.integrate(params.phi, params.tol)?;
    Ok(res.scale(t.to_complex() * c))
}

/// `log ẽ(x) ≈ -(log x - b)² / (2 log p)` for large `x`.
pub fn kernel_gaussian_centre(p: f64, q: f64) -> f64 {
    -(0.5 * p.ln() + (p / q - 1.0).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentPath {
    Factorized,
    Convolved,
}

/// Positive floats order like their bit patterns.
struct AtomicMax(AtomicU64);

impl AtomicMax {
    fn new() -> Self {
        AtomicMax(AtomicU64::new(0))
    }

    fn update(&self, x: f64) {
        if x.is_finite() && x > 0.0 {
            self.0.fetch_max(x.to_bits(), Ordering::Relaxed);
        }
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

/// Outer ray integral of `g(ζ) ẽ(ζ / z)`-type integrands: the inner
/// relative error of every ẽ evaluation is tracked and added to the estimate.
fn nested_ray<G>(g: G, theta: f64, outer: LogShape, inner: LogShape, period: f64, tol: Tolerance) -> Result<QuadResult>
where
    G: Fn(LogPolarPoint, &AtomicMax) -> Result<Complex64> + Sync,
{
    let worst = AtomicMax::new();
    let h = |p: LogPolarPoint| g(p, &worst);
    let env = DecayEnvelope::calibrate(&h, theta, outer, inner, period)?;
    let mut res = integrate_ray(&h, RaySpec::new(theta), &env, tol)?;
    res.abs_error_estimate += worst.get() * res.value.norm();
    Ok(res)
}

fn inner_eval(t: LogPolarPoint, params: &KernelParams, worst: &AtomicMax) -> Result<Complex64> {
    let e = convolution_kernel(t, params)?;
    if e.value.norm() > 0.0 {
        worst.update(e.abs_error_estimate / e.value.norm());
    }
    Ok(e.value)
}

/// `∫_0^∞ x^{n-1} ẽ(x) dx`, equal to `[n]_{p,q}!`, either as the product of
/// the two single moments or by integrating ẽ itself.
pub fn pq_moment_via_kernel(n: usize, params: &KernelParams, path: MomentPath) -> Result<QuadResult> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("moment index must be at least 1".into()));
    }
    let (p, q) = (params.p, params.q);
    match path {
        MomentPath::Factorized => {
            let a = moment_integral_m2(n, p / q, 0.0, params.tol)?;
            let b = moment_integral_m1(n, q, 0.0, params.tol)?;
            Ok(QuadResult {
                value: a.value * b.value,
                abs_error_estimate: a.value.norm() * b.abs_error_estimate
                    + b.value.norm() * a.abs_error_estimate
                    + a.abs_error_estimate * b.abs_error_estimate,
                nodes_used: a.nodes_used + b.nodes_used,
            })
        }
        MomentPath::Convolved => {
            let lam = p.ln();
            let b = kernel_gaussian_centre(p, q);
            let nf = n as f64;
            let outer = LogShape::new(0.5 / lam, nf - 1.0 + b / lam + 0.5, b.max(0.0) + 3.0);
            let inner = LogShape::new(0.0, nf - 0.5, b.min(0.0) - 3.0);
            let g = |x: LogPolarPoint, worst: &AtomicMax| -> Result<Complex64> {
                let e = inner_eval(x, params, worst)?;
                Ok(e * Scaled::from_log_polar((nf - 1.0) * x.log_r, 0.0).to_complex())
            };
            nested_ray(g, 0.0, outer, inner, lam, params.outer_tol)
        }
    }
}

/// `T(f)(z) = ∫_{L_θ} f(u) ẽ(u/z) du/u`.
pub fn laplace_like_t(f: &SectorFunction, z: LogPolarPoint, params: &KernelParams) -> Result<QuadResult> {
    params.validate()?;
    let modulus = z.modulus();
    if !(modulus < params.smallness) {
        return Err(Error::ConstraintViolated(format!(
            "|z| = {modulus} is not below the smallness threshold {}",
            params.smallness
        )));
    }
    if !f.contains_direction(params.theta) {
        return Err(Error::InadmissibleDirection(format!(
            "θ = {} lies outside the sector of {}",
            params.theta,
            f.name()
        )));
    }
    let w = f.witness().ok_or_else(|| Error::WitnessFailed(format!("{} carries no growth witness", f.name())))?;
    if !(w.k > 1.0) {
        return Err(Error::WitnessFailed(format!("witness k = {} must exceed 1", w.k)));
    }
    let fit = check_class_membership(f, &w.m, w.k, WITNESS_SAMPLES)?;
    let c_fit = fit.get("c").unwrap_or(f64::INFINITY);
    if !(c_fit <= w.c * (1.0 + 1e-9)) {
        return Err(Error::WitnessFailed(format!(
            "{} exceeds its witness: fitted c = {c_fit}, declared c = {}",
            f.name(),
            w.c
        )));
    }
    let (a2, a1) = f.growth().ok_or_else(|| Error::WitnessFailed(format!("{} has no growth hint", f.name())))?;
    let lam = params.p.ln();
    if !(a2 < 0.5 / lam) {
        return Err(Error::NonIntegrable(format!("growth of {} beats the kernel decay", f.name())));
    }
    require_direction(params.theta - z.arg + params.phi, params.margin, "argument of u w / z")?;
    let b = kernel_gaussian_centre(params.p, params.q);
    let lz = z.log_r;
    let beta = 0.5 / lam - a2;
    // log|f ẽ(·/z) / u| in u = log|ζ|
    let mu = a1 + (lz + b) / lam - 1.0 + 0.5;
    let outer = LogShape::new(beta, mu, lz + b.max(0.0) + 3.0);
    let inner = LogShape::new(0.0, -0.5, lz + b.min(0.0) - 3.0);
    let zr = z.recip();
    let g = |u: LogPolarPoint, worst: &AtomicMax| -> Result<Complex64> {
        let fu = f.eval(u)?;
        if fu.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let e = inner_eval(u.mul(&zr), params, worst)?;
        Ok((fu * Scaled::from_log_polar(-u.log_r, -u.arg)).times(e).to_complex())
    };
    nested_ray(g, params.theta, outer, inner, lam, params.outer_tol)
}
