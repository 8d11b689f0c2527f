//! Ray and circle quadrature.
//!
//! Rays are integrated in `u = log r`, where the integrands of interest are
//! close to Gaussians. Truncation points come from a [`DecayEnvelope`]
//! bounding the integrand in each tail; panels use a fixed 7/15-point
//! Gauss–Kronrod pair and are refined round by round. Panel values are
//! computed in parallel but always reduced in panel order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::special::{CompensatedSum, LogPolarPoint, Scaled};
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values a ray integrand may return; [`Scaled`] keeps integrands whose
/// factors leave the binary64 range.
pub trait RayValue {
    fn into_scaled(self) -> Scaled;
}

impl RayValue for Complex64 {
    fn into_scaled(self) -> Scaled {
        Scaled::from_complex(self)
    }
}

impl RayValue for Scaled {
    fn into_scaled(self) -> Scaled {
        self
    }
}

/// Accuracy request: satisfied when `err <= max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn rel(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn mixed(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs.max(self.rel * magnitude)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance { abs: self.abs * factor, rel: self.rel * factor }
    }

    fn validate(&self) -> Result<()> {
        if self.abs >= 0.0 && self.rel >= 0.0 && (self.abs > 0.0 || self.rel > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("tolerance must be nonnegative and not both zero: {self:?}")))
        }
    }
}

/// Asymptotic shape `log|g(r e^{iθ})| ≈ -beta·log²r + mu·log r` of an
/// integrand in one tail, with the tail starting at `u = pivot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogShape {
    pub beta: f64,
    pub mu: f64,
    pub pivot: f64,
}

impl LogShape {
    pub fn new(beta: f64, mu: f64, pivot: f64) -> Self {
        LogShape { beta, mu, pivot }
    }
}

/// `|g(e^u e^{iθ})|·e^u <= c·exp(-beta·u² + (mu + 1)·u)` beyond `pivot`,
/// with `c = exp(log_c)` kept in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub log_c: f64,
    pub beta: f64,
    pub mu: f64,
    pub pivot: f64,
}

impl TailBound {
    pub fn c(&self) -> f64 {
        self.log_c.exp()
    }

    pub fn vanishes(&self) -> bool {
        self.log_c == f64::NEG_INFINITY
    }

    fn log_shape(&self, u: f64) -> f64 {
        -self.beta * u * u + (self.mu + 1.0) * u
    }

    pub fn bound(&self, u: f64) -> f64 {
        if self.vanishes() {
            0.0
        } else {
            (self.log_c + self.log_shape(u)).exp()
        }
    }

    /// `∫` of the bound beyond `u` in the direction `sign` (+1 outer, -1 inner).
    fn tail_mass(&self, u: f64, sign: f64) -> Option<f64> {
        if self.vanishes() {
            return Some(0.0);
        }
        // in v = sign·u the exponent is -beta v² + b v
        let b = sign * (self.mu + 1.0);
        let v = sign * u;
        let ln_head = self.log_c - self.beta * v * v + b * v;
        if self.beta > 0.0 {
            let d = 2.0 * self.beta * v - b;
            if d <= 0.0 {
                return None;
            }
            Some((ln_head).exp() / d)
        } else if b < 0.0 {
            Some(ln_head.exp() / (-b))
        } else {
            None
        }
    }

    fn integrable(&self, sign: f64) -> bool {
        self.vanishes() || self.beta > 0.0 || sign * (self.mu + 1.0) < 0.0
    }
}

/// Envelopes for both tails of a ray integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub outer: TailBound,
    pub inner: TailBound,
}

const CAL_SAMPLES: usize = 48;
const INFLATION: f64 = 2.0;
const U_LIMIT: f64 = 6000.0;

fn ray_point(u: f64, theta: f64) -> LogPolarPoint {
    LogPolarPoint::new(u, theta)
}

/// Deterministic pseudo-random numbers in [0, 1).
fn probe(i: u64) -> f64 {
    let mut x = i.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    x ^= x >> 31;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

impl DecayEnvelope {
    /// Fits the constants of the supplied shapes to samples of `g` in a
    /// window beyond each pivot, then inflates them.
    pub fn calibrate<G, V>(g: &G, theta: f64, outer: LogShape, inner: LogShape, period: f64) -> Result<Self>
    where
        G: Fn(LogPolarPoint) -> Result<V> + Sync,
        V: RayValue,
    {
        if inner.pivot > outer.pivot {
            return Err(Error::InvalidParameter(format!(
                "inner pivot {} lies beyond outer pivot {}",
                inner.pivot, outer.pivot
            )));
        }
        let width = 8.0 + 4.0 * period;
        let fit = |shape: LogShape, sign: f64| -> Result<TailBound> {
            let tb = TailBound { log_c: 0.0, beta: shape.beta, mu: shape.mu, pivot: shape.pivot };
            let us: Vec<f64> = (0..CAL_SAMPLES)
                .map(|i| shape.pivot + sign * width * i as f64 / (CAL_SAMPLES - 1) as f64)
                .collect();
            let logs: Vec<f64> = us
                .par_iter()
                .map(|&u| -> Result<f64> {
                    let v = g(ray_point(u, theta))?.into_scaled();
                    Ok(v.log_abs() + u - tb.log_shape(u))
                })
                .collect::<Result<_>>()?;
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if m.is_nan() {
                return Err(Error::NonIntegrable("integrand is not finite on the calibration window".into()));
            }
            if m == f64::INFINITY {
                return Err(Error::NonIntegrable("envelope constant overflows".into()));
            }
            let log_c = m + INFLATION.ln();
            Ok(TailBound { log_c, ..tb })
        };
        Ok(DecayEnvelope { outer: fit(outer, 1.0)?, inner: fit(inner, -1.0)? })
    }

    /// Checks the envelope at 10 pseudo-random radii in each tail between
    /// the pivot and `u_far`.
    pub fn validate<G, V>(&self, g: &G, theta: f64, u_inner_far: f64, u_outer_far: f64) -> Result<()>
    where
        G: Fn(LogPolarPoint) -> Result<V> + Sync,
        V: RayValue,
    {
        let mut us = Vec::with_capacity(20);
        for i in 0..10u64 {
            let t = probe(i);
            us.push((self.outer.pivot + t * (u_outer_far - self.outer.pivot), true));
            let t = probe(i + 100);
            us.push((self.inner.pivot + t * (u_inner_far - self.inner.pivot), false));
        }
        let checks: Vec<Result<(f64, f64)>> = us
            .par_iter()
            .map(|&(u, outer)| {
                let side = if outer { &self.outer } else { &self.inner };
                let v = g(ray_point(u, theta))?.into_scaled();
                let ratio = if v.is_zero() {
                    0.0
                } else {
                    (v.log_abs() + u - side.log_c - side.log_shape(u)).exp()
                };
                Ok((u, ratio))
            })
            .collect();
        for c in checks {
            let (u, ratio) = c?;
            if !(ratio <= 1.0) {
                return Err(Error::EnvelopeViolated { log_r: u, ratio });
            }
        }
        Ok(())
    }

    fn truncation(&self, budget: f64) -> Result<(f64, f64, f64)> {
        if !self.outer.integrable(1.0) || !self.inner.integrable(-1.0) {
            return Err(Error::NonIntegrable(format!(
                "envelope shapes do not decay: outer {:?}, inner {:?}",
                self.outer, self.inner
            )));
        }
        let find = |side: &TailBound, sign: f64| -> Result<(f64, f64)> {
            let mut u = side.pivot;
            let mut step = 0.25;
            loop {
                if let Some(m) = side.tail_mass(u, sign) {
                    if m <= budget {
                        return Ok((u, m));
                    }
                }
                u += sign * step;
                step = (step * 1.15).min(8.0);
                if u.abs() > U_LIMIT {
                    return Err(Error::NonIntegrable(format!(
                        "tail bound above {budget:e} out to log r = {u}"
                    )));
                }
            }
        };
        let (hi, m_hi) = find(&self.outer, 1.0)?;
        let (lo, m_lo) = find(&self.inner, -1.0)?;
        Ok((lo, hi, m_hi + m_lo))
    }
}

/// Ray direction and node budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpec {
    pub theta: f64,
    pub max_panels: usize,
}

impl RaySpec {
    pub fn new(theta: f64) -> Self {
        RaySpec { theta, max_panels: 40_000 }
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: Complex64::new(0.0, 0.0), abs_error_estimate: 0.0, nodes_used: 0 }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        QuadResult { value: self.value * s, abs_error_estimate: self.abs_error_estimate * s.norm(), nodes_used: self.nodes_used }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    abs_mass: f64,
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut gs = fc * WG[3];
    let mut mass = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x)?;
        let f2 = f(c + x)?;
        k += (f1 + f2) * WGK[j];
        mass += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gs += (f1 + f2) * WG[j / 2];
        }
    }
    let value = k * h;
    let err = ((k - gs) * h).norm();
    Ok(Panel { a, b, value, err, abs_mass: mass * h.abs() })
}

/// Adaptive G7K15 on `[lo, hi]` until `Σ err <= target(|I|)`.
fn adaptive<F>(f: &F, lo: f64, hi: f64, tol: Tolerance, max_panels: usize) -> Result<(Complex64, f64, f64, usize)>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let n0 = ((hi - lo).ceil() as usize).max(4);
    let w = (hi - lo) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let a = lo + w * i as f64;
            let b = if i + 1 == n0 { hi } else { lo + w * (i + 1) as f64 };
            gk15(f, a, b)
        })
        .collect::<Result<_>>()?;
    let total_width = hi - lo;
    loop {
        let mut sum = CompensatedSum::new();
        let mut err = 0.0;
        let mut mass = 0.0;
        for p in &panels {
            sum.add(p.value);
            err += p.err;
            mass += p.abs_mass;
        }
        let value = sum.value();
        let rounding = 50.0 * f64::EPSILON * mass;
        let target = tol.target(value.norm()).max(rounding);
        if err <= target {
            return Ok((value, err + rounding, mass, panels.len() * 15));
        }
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence { what: "ray quadrature".into(), budget: max_panels * 15 });
        }
        let worst = panels.iter().map(|p| p.err).fold(0.0, f64::max);
        let split: Vec<bool> = panels
            .iter()
            .map(|p| p.err > target * (p.b - p.a) / total_width || p.err == worst)
            .collect();
        let halves: Vec<(f64, f64)> = panels
            .iter()
            .zip(&split)
            .filter(|(_, s)| **s)
            .flat_map(|(p, _)| {
                let m = 0.5 * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        let fresh: Vec<Panel> = halves.par_iter().map(|&(a, b)| gk15(f, a, b)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(panels.len() + fresh.len() / 2);
        let mut it = fresh.into_iter();
        for (p, s) in panels.into_iter().zip(split) {
            if s {
                next.push(it.next().expect("left half"));
                next.push(it.next().expect("right half"));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

/// `∫_{L_θ} g(ζ) dζ` with `L_θ = [0, ∞)e^{iθ}`.
pub fn integrate_ray<G, V>(g: &G, spec: RaySpec, env: &DecayEnvelope, tol: Tolerance) -> Result<QuadResult>
where
    G: Fn(LogPolarPoint) -> Result<V> + Sync,
    V: RayValue,
{
    tol.validate()?;
    let theta = spec.theta;
    let dir = Complex64::from_polar(1.0, theta);
    let f = |u: f64| -> Result<Complex64> {
        let v = g(ray_point(u, theta))?.into_scaled().scale_log(u).to_complex();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonIntegrable(format!("integrand not finite at log r = {u}")));
        }
        Ok(v)
    };
    if env.outer.vanishes() && env.inner.vanishes() {
        // a vanishing envelope: check the middle section before declaring zero
        let mid = adaptive(&f, env.inner.pivot.min(env.outer.pivot - 1.0), env.outer.pivot, tol, spec.max_panels)?;
        return Ok(QuadResult { value: mid.0 * dir, abs_error_estimate: mid.1, nodes_used: mid.3 });
    }
    // first pass with a budget from the calibrated envelope mass, then one
    // redo if the integral turns out much smaller
    let mass_guess = env.outer.bound(env.outer.pivot) + env.inner.bound(env.inner.pivot);
    let mut budget = tol.target(mass_guess) / 4.0;
    let mut attempt = 0;
    loop {
        let (lo, hi, trunc) = env.truncation(budget.max(f64::MIN_POSITIVE))?;
        env.validate(g, theta, lo - 10.0, hi + 10.0)?;
        let (v, e, _mass, nodes) = adaptive(&f, lo, hi, tol.scaled(0.5), spec.max_panels)?;
        let need = tol.target(v.norm()) / 4.0;
        if attempt == 0 && need < 0.5 * budget {
            budget = need;
            attempt += 1;
            continue;
        }
        return Ok(QuadResult { value: v * dir, abs_error_estimate: e + trunc, nodes_used: nodes });
    }
}

/// Circle parameters for [`integrate_circle`] and [`integrate_nested`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSpec {
    pub eps: f64,
    /// Multiply by `1/(2πi)`.
    pub normalized: bool,
    pub max_nodes: usize,
}

impl CircleSpec {
    pub fn new(eps: f64, normalized: bool) -> Self {
        CircleSpec { eps, normalized, max_nodes: 1 << 16 }
    }
}

fn circle_node(eps: f64, j: usize, n: usize) -> Complex64 {
    Complex64::from_polar(eps, 2.0 * PI * j as f64 / n as f64)
}

fn circle_factor(normalized: bool) -> Complex64 {
    if normalized {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 2.0 * PI)
    }
}

/// `∮_{|ω|=eps} h(ω) dω` by the trapezoid rule with node doubling.
pub fn integrate_circle<H>(h: &H, spec: CircleSpec, tol: Tolerance) -> Result<QuadResult>
where
    H: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let out = integrate_nested(
        |w: Complex64, _t: Tolerance| -> Result<QuadResult> {
            Ok(QuadResult { value: h(w)?, abs_error_estimate: 0.0, nodes_used: 1 })
        },
        spec,
        tol,
    )?;
    Ok(out)
}

/// Outer circle rule whose evaluand at each `ω` is itself a quadrature.
/// The inner call receives `tol / (4 N)` for the level with `N` nodes at
/// which its node first appears.
pub fn integrate_nested<I>(inner: I, spec: CircleSpec, tol: Tolerance) -> Result<QuadResult>
where
    I: Fn(Complex64, Tolerance) -> Result<QuadResult> + Sync,
{
    tol.validate()?;
    if !(spec.eps > 0.0) {
        return Err(Error::InvalidParameter(format!("contour radius must be positive, got {}", spec.eps)));
    }
    let eval_level = |n: usize, stride: usize, offset: usize| -> Result<Vec<(Complex64, f64, usize)>> {
        let t = tol.scaled(1.0 / (4.0 * n as f64));
        (0..n / stride)
            .into_par_iter()
            .map(|i| {
                let j = offset + stride * i;
                let w = circle_node(spec.eps, j, n);
                let r = inner(w, t)?;
                Ok((r.value * w, r.abs_error_estimate * spec.eps, r.nodes_used))
            })
            .collect()
    };
    let mut n = 8usize;
    let mut nodes: Vec<(Complex64, f64, usize)> = eval_level(n, 1, 0)?;
    let reduce = |nodes: &[(Complex64, f64, usize)]| {
        let mut s = CompensatedSum::new();
        let mut e = 0.0;
        let mut used = 0;
        let mut mass = 0.0;
        for (v, err, k) in nodes {
            s.add(*v);
            e += err;
            used += k;
            mass += v.norm();
        }
        let nf = nodes.len() as f64;
        (s.value() / nf, e / nf, used, mass / nf)
    };
    let factor = circle_factor(spec.normalized);
    let (mut prev, _, _, _) = reduce(&nodes);
    loop {
        let m = 2 * n;
        let fresh = eval_level(m, 2, 1)?;
        // interleave into index order j = 0..m
        let mut merged = Vec::with_capacity(m);
        for (a, b) in nodes.iter().zip(fresh.iter()) {
            merged.push(*a);
            merged.push(*b);
        }
        nodes = merged;
        n = m;
        let (cur, inner_err, used, mass) = reduce(&nodes);
        let diff = (cur - prev).norm();
        let rounding = 20.0 * f64::EPSILON * mass;
        let target = tol.target(cur.norm() * factor.norm()) / factor.norm();
        // successive levels cannot agree more closely than their inner errors allow
        let floor = rounding + 2.0 * inner_err;
        if diff <= target.max(floor) {
            let est = (diff + inner_err + rounding) * factor.norm();
            return Ok(QuadResult { value: cur * factor, abs_error_estimate: est, nodes_used: used.max(n) });
        }
        if n >= spec.max_nodes {
            return Err(Error::NonConvergence { what: "circle quadrature".into(), budget: n });
        }
        prev = cur;
    }
}

fn wrap(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Ray direction `θ` for a point with argument `omega_arg`: `arg ω + θ`
/// stays at least `margin` from `±π` and the ray avoids every
/// `(center, half_width)` arc. Prefers `θ = -omega_arg`, otherwise the
/// admissible boundary candidate closest to it.
pub fn admissible_direction(omega_arg: f64, forbidden: &[(f64, f64)], margin: f64) -> Result<f64> {
    if !(margin > 0.0 && margin < PI) {
        return Err(Error::InvalidParameter(format!("margin must lie in (0, π), got {margin}")));
    }
    let base = -omega_arg;
    let ok = |theta: f64| {
        wrap(omega_arg + theta).abs() <= PI - margin + 1e-12
            && forbidden.iter().all(|&(c, hw)| wrap(theta - c).abs() >= hw - 1e-12)
    };
    if ok(base) {
        return Ok(base);
    }
    let mut candidates = vec![base + (PI - margin), base - (PI - margin)];
    for &(c, hw) in forbidden {
        let d = wrap(c - base);
        candidates.push(base + d + hw);
        candidates.push(base + d - hw);
    }
    let mut best: Option<f64> = None;
    for t in candidates {
        if !ok(t) {
            continue;
        }
        best = match best {
            None => Some(t),
            Some(b) => {
                let (db, dt) = ((b - base).abs(), (t - base).abs());
                if dt < db || (dt == db && t < b) {
                    Some(t)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or(Error::NoAdmissibleDirection)
}
