//! Θ_q, exp_q and E_q with argument reduction and certified truncation.
//!
//! Values that can leave the binary64 range are carried as [`Scaled`]
//! numbers, `mant · e^{log_scale}`.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use num_complex::Complex64;

use crate::qcore::log_q_number;
use crate::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_TERMS: usize = 200_000;

/// Default relative radius of the exclusion disks around zeros.
pub const POLE_THRESHOLD: f64 = 1e-3;

/// A point of the Riemann surface of the logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolarPoint {
    pub log_r: f64,
    pub arg: f64,
}

impl LogPolarPoint {
    pub fn new(log_r: f64, arg: f64) -> Self {
        LogPolarPoint { log_r, arg }
    }

    /// Principal-branch lift of a nonzero complex number.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::InvalidParameter("the origin is not on the log surface".into()));
        }
        Ok(LogPolarPoint { log_r: z.norm().ln(), arg: z.arg() })
    }

    pub fn modulus(&self) -> f64 {
        self.log_r.exp()
    }

    /// Argument reduced to `(-π, π]`.
    pub fn reduced_arg(&self) -> f64 {
        let mut a = self.arg % (2.0 * PI);
        if a > PI {
            a -= 2.0 * PI;
        } else if a <= -PI {
            a += 2.0 * PI;
        }
        a
    }

    pub fn to_complex(&self) -> Complex64 {
        polar(self.modulus(), self.reduced_arg())
    }

    pub fn mul(&self, other: &LogPolarPoint) -> LogPolarPoint {
        LogPolarPoint { log_r: self.log_r + other.log_r, arg: self.arg + other.arg }
    }

    pub fn recip(&self) -> LogPolarPoint {
        LogPolarPoint { log_r: -self.log_r, arg: -self.arg }
    }

    pub fn scale(&self, log_factor: f64) -> LogPolarPoint {
        LogPolarPoint { log_r: self.log_r + log_factor, arg: self.arg }
    }
}

/// `mant · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: Complex64 { re: 0.0, im: 0.0 }, log_scale: 0.0 };
    pub const ONE: Scaled = Scaled { mant: Complex64 { re: 1.0, im: 0.0 }, log_scale: 0.0 };

    pub fn new(mant: Complex64, log_scale: f64) -> Self {
        let a = mant.norm();
        if a == 0.0 {
            return Scaled::ZERO;
        }
        if (1e-100..=1e100).contains(&a) {
            Scaled { mant, log_scale }
        } else {
            Scaled { mant: mant / a, log_scale: log_scale + a.ln() }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scaled::new(z, 0.0)
    }

    pub fn from_log_polar(log_abs: f64, arg: f64) -> Self {
        if log_abs == f64::NEG_INFINITY {
            return Scaled::ZERO;
        }
        Scaled { mant: Complex64::from_polar(1.0, arg), log_scale: log_abs }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn log_abs(&self) -> f64 {
        self.mant.norm().ln() + self.log_scale
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        // apply the scale in steps so that representable products survive
        const STEP: f64 = 600.0;
        let mut m = self.mant;
        let mut ls = self.log_scale;
        while ls > STEP && m.norm().is_finite() {
            m *= STEP.exp();
            ls -= STEP;
        }
        while ls < -STEP && m.norm() > 0.0 {
            m *= (-STEP).exp();
            ls += STEP;
        }
        m * ls.exp()
    }

    pub fn recip(&self) -> Scaled {
        Scaled::new(self.mant.inv(), -self.log_scale)
    }

    pub fn scale_log(&self, delta: f64) -> Scaled {
        Scaled { mant: self.mant, log_scale: self.log_scale + delta }
    }

    pub fn times(&self, c: Complex64) -> Scaled {
        Scaled::new(self.mant * c, self.log_scale)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.mant * o.mant, self.log_scale + o.log_scale)
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled::new(self.mant / o.mant, self.log_scale - o.log_scale)
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// A series value with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvalResult {
    pub value: Complex64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// Scaled series value; `tail` is an absolute bound in units of
/// `e^{value.log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledEval {
    pub value: Scaled,
    pub terms_used: usize,
    pub tail: f64,
}

impl ScaledEval {
    pub fn to_result(&self) -> SeriesEvalResult {
        let f = self.value.log_scale.exp();
        SeriesEvalResult {
            value: self.value.to_complex(),
            terms_used: self.terms_used,
            tail_bound: self.tail * f,
        }
    }

    /// Certified bound relative to the value's modulus.
    pub fn rel_tail(&self) -> f64 {
        let a = self.value.mant.norm();
        if a == 0.0 {
            f64::INFINITY
        } else {
            self.tail / a
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must satisfy q > 1, got {q}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")))
    }
}

/// Θ_q on the annulus `1 <= |z0| < q`, pairing `n` with `1 - n`.
fn theta_annulus(z0: Complex64, q: f64, tol: f64) -> (Complex64, usize, f64) {
    let lq = q.ln();
    let zi = z0.inv();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    // n = 1 and n = 0 contribute z0 + 1
    let mut zp = z0; // z0^n
    let mut zm = Complex64::new(1.0, 0.0); // z0^{1-n}
    let mut n = 1usize;
    let mut terms = 0;
    loop {
        let c = (-0.5 * (n as f64) * (n as f64 - 1.0) * lq).exp();
        let t = (zp + zm) * c;
        sum.add(t);
        abs_sum += c * (zp.norm() + zm.norm());
        terms += 2;
        let nf = (n + 1) as f64;
        let lc = -0.5 * nf * (nf - 1.0) * lq;
        let next = (lc + nf * lq).exp() + lc.exp();
        let tail = next / (1.0 - q.powf(-(n as f64)));
        let partial = sum.value().norm();
        let floor = EPS * abs_sum;
        if n >= 2 && (tail <= tol * partial || tail <= floor) {
            return (sum.value(), terms, tail + 4.0 * floor);
        }
        if terms >= MAX_TERMS {
            return (sum.value(), terms, tail + 4.0 * floor);
        }
        zp *= z0;
        zm *= zi;
        n += 1;
    }
}

/// Θ_q on the annulus from the triple product
/// `∏_{n>=1} (1 - p^n)(1 + z0 p^{n-1})(1 + p^n / z0)`, `p = 1/q`.
/// Free of the cancellation the series suffers near the negative axis.
fn theta_annulus_product(z0: Complex64, q: f64) -> (Complex64, usize, f64) {
    let p = q.recip();
    let zi = z0.inv();
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    let mut pn1 = 1.0; // p^{n-1}
    let mut n = 0usize;
    loop {
        let pn = pn1 * p;
        acc *= (one + z0 * pn1) * (one + zi * pn) * (1.0 - pn);
        n += 1;
        if pn1 * z0.norm() < 1e-18 || n >= MAX_TERMS {
            let trunc = 2.2 * (z0.norm() + 1.0) * pn / (1.0 - p);
            let rounding = 8.0 * n as f64 * EPS;
            return (acc, n, (trunc + rounding) * acc.norm());
        }
        pn1 = pn;
    }
}

/// Θ_q(z) in scaled form.
pub fn theta_q_scaled(z: LogPolarPoint, q: f64, tol: f64) -> Result<ScaledEval> {
    check_q(q)?;
    check_tol(tol)?;
    let lq = q.ln();
    let m = (z.log_r / lq).floor();
    let mut lr0 = z.log_r - m * lq;
    let mut m = m;
    if lr0 >= lq {
        lr0 -= lq;
        m += 1.0;
    } else if lr0 < 0.0 {
        lr0 += lq;
        m -= 1.0;
    }
    let a = z.reduced_arg();
    let z0 = polar(lr0.exp(), a);
    let (mut s, mut terms, mut tail) = theta_annulus(z0, q, tol);
    if tail > tol * s.norm() {
        let (ps, pn, ptail) = theta_annulus_product(z0, q);
        if ptail < tail {
            s = ps;
            terms += pn;
            tail = ptail;
        }
    }
    let log_scale = 0.5 * m * (m + 1.0) * lq + m * lr0;
    // e^{i m a} with m integral, so the reduced argument suffices
    let phase = Complex64::from_polar(1.0, (m * a) % (2.0 * PI));
    let norm = s.norm();
    if norm == 0.0 {
        return Ok(ScaledEval { value: Scaled::ZERO, terms_used: terms, tail });
    }
    let value = Scaled::new(s * phase, log_scale);
    let tail = tail * (log_scale - value.log_scale).exp();
    Ok(ScaledEval { value, terms_used: terms, tail })
}

/// Θ_q(z) as an ordinary complex number (may overflow for extreme `|z|`).
pub fn theta_q(z: LogPolarPoint, q: f64, tol: f64) -> Result<SeriesEvalResult> {
    theta_q_scaled(z, q, tol).map(|r| r.to_result())
}

/// Σ c_n z^n for an entire series with positive coefficients given by their
/// logs; `log_ratio(n) = log(c_n / c_{n-1})` is decreasing to `-inf`.
/// `z = 0` is passed as `None`.
fn entire_series_scaled(
    z: Option<LogPolarPoint>,
    tol: f64,
    log_ratio: impl Fn(usize) -> f64,
) -> ScaledEval {
    let Some(z) = z else {
        return ScaledEval { value: Scaled::ONE, terms_used: 1, tail: 0.0 };
    };
    let lr = z.log_r;
    let unit = polar(1.0, z.reduced_arg());
    // the largest term, found by ascent
    let mut peak = 0.0;
    let mut acc = 0.0;
    let mut n = 0;
    loop {
        let step = lr + log_ratio(n + 1);
        if step < 0.0 {
            break;
        }
        acc += step;
        n += 1;
        if acc > peak {
            peak = acc;
        }
        if n > MAX_TERMS {
            break;
        }
    }
    let mut sum = CompensatedSum::new();
    let mut term = Scaled::new(Complex64::new(1.0, 0.0), -peak);
    let mut abs_sum = 0.0;
    let mut weighted = 0.0;
    let mut k = 0usize;
    loop {
        let t = term.to_complex();
        let ta = t.norm();
        sum.add(t);
        abs_sum += ta;
        weighted += (k as f64 + 1.0) * ta;
        let rho = (lr + log_ratio(k + 1)).exp();
        let floor = 2.0 * EPS * weighted;
        if rho < 0.5 {
            let tail = ta * rho / (1.0 - rho);
            let partial = sum.value().norm();
            if tail <= tol * partial || tail <= EPS * abs_sum || k + 1 >= MAX_TERMS {
                let value = Scaled::new(sum.value(), peak);
                let shift = (peak - value.log_scale).exp();
                return ScaledEval { value, terms_used: k + 1, tail: (tail + floor) * shift };
            }
        }
        k += 1;
        term = Scaled::new(term.mant * unit * rho, term.log_scale);
    }
}

/// `r e^{i arg}`, exact on the real axis.
fn polar(r: f64, arg: f64) -> Complex64 {
    if arg == 0.0 {
        Complex64::new(r, 0.0)
    } else if arg == PI {
        Complex64::new(-r, 0.0)
    } else {
        Complex64::from_polar(r, arg)
    }
}

fn lift(z: Complex64) -> Option<LogPolarPoint> {
    LogPolarPoint::from_complex(z).ok()
}

/// exp_q on the log surface, scaled; the series only sees the projection.
pub fn exp_q_entire_scaled_at(z: LogPolarPoint, q: f64, tol: f64) -> Result<ScaledEval> {
    check_q(q)?;
    check_tol(tol)?;
    Ok(entire_series_scaled(Some(z), tol, |n| -log_q_number(n as u32, q).unwrap_or(f64::NAN)))
}

/// exp_q(z) = Σ z^n / [n]_q!, scaled.
pub fn exp_q_entire_scaled(z: Complex64, q: f64, tol: f64) -> Result<ScaledEval> {
    check_q(q)?;
    check_tol(tol)?;
    Ok(entire_series_scaled(lift(z), tol, |n| -log_q_number(n as u32, q).unwrap_or(f64::NAN)))
}

/// exp_q(z) = Σ z^n / [n]_q!.
pub fn exp_q_entire(z: Complex64, q: f64, tol: f64) -> Result<SeriesEvalResult> {
    exp_q_entire_scaled(z, q, tol).map(|r| r.to_result())
}

pub fn e_q_entire_scaled_at(z: LogPolarPoint, q: f64, tol: f64) -> Result<ScaledEval> {
    check_q(q)?;
    check_tol(tol)?;
    let lq = q.ln();
    Ok(entire_series_scaled(Some(z), tol, |n| -(n as f64 - 1.0) * lq))
}

/// E_q(z) = Σ z^n / q^{n(n-1)/2}, scaled.
pub fn e_q_entire_scaled(z: Complex64, q: f64, tol: f64) -> Result<ScaledEval> {
    check_q(q)?;
    check_tol(tol)?;
    let lq = q.ln();
    Ok(entire_series_scaled(lift(z), tol, |n| -(n as f64 - 1.0) * lq))
}

pub fn e_q_entire(z: Complex64, q: f64, tol: f64) -> Result<SeriesEvalResult> {
    e_q_entire_scaled(z, q, tol).map(|r| r.to_result())
}

/// `log(1 + w)` accurate for small `|w|`.
fn clog1p(w: Complex64) -> Complex64 {
    let a = w.norm();
    if a > 0.5 {
        return (Complex64::new(1.0, 0.0) + w).ln();
    }
    let re = 0.5 * (w.re * (2.0 + w.re) + w.im * w.im).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

/// exp_q from its product `∏_{j>=0} (1 + (q-1) z / q^{j+1})` at a point of
/// the log surface, in scaled form. Independent of the series route.
pub fn exp_q_product_scaled_at(z: LogPolarPoint, q: f64) -> Result<Scaled> {
    check_q(q)?;
    let lq = q.ln();
    let arg = z.reduced_arg();
    let mut lw = z.log_r + ((q - 1.0) / q).ln();
    let mut log_sum = CompensatedSum::new();
    let mut j = 0usize;
    while lw > (1e-20f64).ln() {
        let l = if lw > 2f64.ln() {
            // log(1 + w) = log w + log(1 + 1/w)
            Complex64::new(lw, arg) + clog1p(polar((-lw).exp(), -arg))
        } else {
            let w = polar(lw.exp(), arg);
            let one_plus = Complex64::new(1.0, 0.0) + w;
            if one_plus.re == 0.0 && one_plus.im == 0.0 {
                return Ok(Scaled::ZERO);
            }
            clog1p(w)
        };
        log_sum.add(l);
        lw -= lq;
        j += 1;
        if j > MAX_TERMS {
            return Err(Error::NonConvergence { what: "exp_q product".into(), budget: MAX_TERMS });
        }
    }
    // remaining factors: log ∏ (1 + w q^{-i}) ≈ w q / (q - 1)
    log_sum.add(polar(lw.exp(), arg) * (q / (q - 1.0)));
    let l = log_sum.value();
    Ok(Scaled::from_log_polar(l.re, l.im))
}

/// exp_q(z) from its product, in scaled form.
pub fn exp_q_product_scaled(z: Complex64, q: f64) -> Result<Scaled> {
    match lift(z) {
        Some(p) => exp_q_product_scaled_at(p, q),
        None => {
            check_q(q)?;
            Ok(Scaled::ONE)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroKind {
    Theta,
    ExpQ,
}

/// Relative distance of `w` from the zero set: for Θ_q the smallest
/// `|1 + w q^m|`, for exp_q the smallest `|1 + w (q-1)/q^{m+1}|`, each
/// capped at 1 (the value approached far from every zero).
pub fn nearest_zero_distance(kind: ZeroKind, w: Complex64, q: f64) -> Result<f64> {
    check_q(q)?;
    match lift(w) {
        Some(p) => nearest_zero_distance_at(kind, p, q),
        None if kind == ZeroKind::ExpQ => Ok(1.0),
        None => Err(Error::InvalidParameter("Θ_q zero distance needs w ≠ 0".into())),
    }
}

/// [`nearest_zero_distance`] for a point of the log surface.
pub fn nearest_zero_distance_at(kind: ZeroKind, w: LogPolarPoint, q: f64) -> Result<f64> {
    check_q(q)?;
    let lq = q.ln();
    let arg = w.reduced_arg();
    let one = Complex64::new(1.0, 0.0);
    let mut best = 1.0_f64;
    match kind {
        ZeroKind::Theta => {
            let m0 = (-w.log_r / lq).round();
            for d in -2..=2 {
                let m = m0 + d as f64;
                let v = (one + polar((w.log_r + m * lq).exp(), arg)).norm();
                best = best.min(v);
            }
        }
        ZeroKind::ExpQ => {
            let ls = w.log_r + (q - 1.0).ln();
            let centre = (ls / lq - 1.0).round();
            let lo = (centre - 2.0).max(0.0);
            let hi = (centre + 2.0).max(0.0);
            let mut m = lo;
            while m <= hi {
                let v = (one + polar((ls - (m + 1.0) * lq).exp(), arg)).norm();
                best = best.min(v);
                m += 1.0;
            }
        }
    }
    Ok(best)
}

fn pole_guard(kind: ZeroKind, w: LogPolarPoint, q: f64) -> Result<()> {
    let d = nearest_zero_distance_at(kind, w, q)?;
    if d < POLE_THRESHOLD {
        return Err(Error::NearPole { distance: d, threshold: POLE_THRESHOLD });
    }
    Ok(())
}

/// `1 / exp_q(w)` in scaled form, refusing points near a zero.
pub fn exp_q_recip_scaled(w: Complex64, q: f64) -> Result<Scaled> {
    match lift(w) {
        Some(p) => exp_q_recip_scaled_at(p, q),
        None => {
            check_q(q)?;
            Ok(Scaled::ONE)
        }
    }
}

pub fn exp_q_recip_scaled_at(w: LogPolarPoint, q: f64) -> Result<Scaled> {
    pole_guard(ZeroKind::ExpQ, w, q)?;
    Ok(exp_q_product_scaled_at(w, q)?.recip())
}

/// `1 / Θ_q(w)` in scaled form, refusing points near a zero.
pub fn theta_recip_scaled(w: LogPolarPoint, q: f64, tol: f64) -> Result<Scaled> {
    pole_guard(ZeroKind::Theta, w, q)?;
    Ok(theta_q_scaled(w, q, tol)?.value.recip())
}

/// `exp_{1/q}(-q t) = 1 / exp_q(q t)`.
pub fn exp_q_reciprocal(t: Complex64, q: f64, tol: f64) -> Result<Complex64> {
    check_tol(tol)?;
    let w = t * q;
    Ok(exp_q_recip_scaled(w, q)?.to_complex())
}
