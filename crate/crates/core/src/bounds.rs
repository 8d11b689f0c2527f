//! Sampled certificates for the growth estimates of Θ_q, E_q and exp_q,
//! the limit constant c(q) and growth-class membership.
//!
//! All samples are quasi-random in `(log r, arg)` with a fixed seed, so every
//! fit is reproducible.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::kernels::SectorFunction;
use crate::qcore::{omega_weight, MomentSequence, DEFAULT_N_CAP};
use crate::report::{CheckReport, Params};
use crate::sampling::{log_polar_points, Halton};
use crate::special::{
    e_q_entire_scaled, exp_q_entire_scaled, nearest_zero_distance, theta_q_scaled, LogPolarPoint, ZeroKind,
};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_601;
/// Inflation applied to fitted constants before they are used as bounds.
pub const INFLATION: f64 = 1.05;
const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub constants: BTreeMap<String, f64>,
    pub residual_max: f64,
    pub residual_rms: f64,
    pub samples: usize,
    pub held_out: usize,
    pub violations: usize,
    pub description: String,
}

impl FitResult {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must exceed 1, got {q}")))
    }
}

fn gaussian_log(lr: f64, lq: f64) -> f64 {
    lr * lr / (2.0 * lq)
}

/// Least squares `y ≈ a + b x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Fits `|E_q(z)| <= K exp(log²|z| / (2 log q)) |z|^α` from the maximum over
/// `directions` at each radius, then checks `(1.05 K, α + 0.05)` on 1000
/// held-out points spanning the same radii.
#[allow(non_snake_case)]
pub fn estimate_alpha_Eq(q: f64, radii: &[f64], directions: &[f64]) -> Result<FitResult> {
    check_q(q)?;
    if radii.len() < 3 || directions.is_empty() {
        return Err(Error::InvalidParameter("need at least three radii and one direction".into()));
    }
    let (rmin, rmax) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if !(rmin > 0.0) || (rmax / rmin).log10() < 4.0 - 1e-9 {
        return Err(Error::InvalidParameter("radii must be positive and span at least four decades".into()));
    }
    let lq = q.ln();
    let rows: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| -> Result<(f64, f64)> {
            let lr = r.ln();
            let mut best = f64::NEG_INFINITY;
            for &d in directions {
                let v = e_q_entire_scaled(Complex64::from_polar(r, d), q, SERIES_TOL)?.value.log_abs();
                best = best.max(v);
            }
            Ok((lr, best - gaussian_log(lr, lq)))
        })
        .collect::<Result<_>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let (a, alpha) = linear_fit(&x, &y);
    let resid: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - a - alpha * xi).collect();
    let residual_max = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let residual_rms = (resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64).sqrt();
    if residual_max > 1.0 {
        return Err(Error::FitRejected(format!("E_q growth residual {residual_max} above 1")));
    }
    // smallest K that majorises the fitting samples with slope α
    let log_k = x.iter().zip(&y).map(|(xi, yi)| yi - alpha * xi).fold(f64::NEG_INFINITY, f64::max);
    let k = log_k.exp();
    let (kv, av) = (k * INFLATION, alpha + 0.05);
    let held = log_polar_points(1000, rmin.ln(), rmax.ln(), -PI, PI, DEFAULT_SEED);
    let violations: usize = held
        .par_iter()
        .map(|&z| -> Result<usize> {
            let lr = z.norm().ln();
            let v = e_q_entire_scaled(z, q, SERIES_TOL)?.value.log_abs();
            Ok(usize::from(v > kv.ln() + gaussian_log(lr, lq) + av * lr))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let mut constants = BTreeMap::new();
    constants.insert("alpha".into(), alpha);
    constants.insert("K".into(), k);
    constants.insert("K_ls".into(), a.exp());
    Ok(FitResult {
        constants,
        residual_max,
        residual_rms,
        samples: radii.len() * directions.len(),
        held_out: held.len(),
        violations,
        description: format!(
            "E_q growth, q = {q}, {} radii in [{rmin:e}, {rmax:e}], {} directions",
            radii.len(),
            directions.len()
        ),
    })
}

/// Standard radius grid for [`estimate_alpha_Eq`]: `10^0 .. 10^6`.
pub fn default_alpha_radii(points: usize) -> Vec<f64> {
    (0..points).map(|i| 10f64.powf(6.0 * i as f64 / (points - 1) as f64)).collect()
}

pub fn default_alpha_directions() -> Vec<f64> {
    (0..8).map(|i| -PI + PI * i as f64 / 4.0 + PI / 8.0).chain(std::iter::once(0.0)).collect()
}

/// Half the points quasi-random in `|z| ∈ [0.01, 100]`, half just outside
/// randomly chosen exclusion disks `|1 + z q^m| <= δ`.
fn theta_samples(q: f64, delta: f64, samples: usize, seed: u64) -> Result<Vec<Complex64>> {
    let (lo, hi) = (0.01f64.ln(), 100f64.ln());
    let mut out: Vec<Complex64> = log_polar_points(samples - samples / 2, lo, hi, -PI, PI, seed)
        .into_iter()
        .filter(|&z| nearest_zero_distance(ZeroKind::Theta, z, q).map(|d| d > delta).unwrap_or(false))
        .collect();
    let lq = q.ln();
    let (m_lo, m_hi) = ((-hi / lq).ceil() as i64, (-lo / lq).floor() as i64);
    let mut h = Halton::new(2, seed.wrapping_add(1));
    for _ in 0..samples / 2 {
        let u = h.next_point();
        let m = m_lo + ((m_hi - m_lo + 1) as f64 * u[0]).floor() as i64;
        let phase = 2.0 * PI * u[1];
        let z = -q.powi(-(m as i32)) * (Complex64::new(1.0, 0.0) + Complex64::from_polar(delta * (1.0 + 1e-6), phase));
        if nearest_zero_distance(ZeroKind::Theta, z, q)? > delta {
            out.push(z);
        }
    }
    Ok(out)
}

/// Fits the largest `Δ` with `|Θ_q(z)| >= Δ δ exp(log²|z| / (2 log q)) |z|^{1/2}`
/// over samples outside the exclusion disks; passes iff `Δ > 0`.
pub fn validate_theta_lower_bound(q: f64, delta: f64, samples: usize) -> Result<CheckReport> {
    validate_theta_lower_bound_seeded(q, delta, samples, DEFAULT_SEED)
}

pub fn validate_theta_lower_bound_seeded(q: f64, delta: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    check_q(q)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 0.5], got {delta}")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let lq = q.ln();
    let pts = theta_samples(q, delta, samples, seed)?;
    let mut logs: Vec<f64> = pts
        .par_iter()
        .map(|&z| -> Result<f64> {
            let p = LogPolarPoint::from_complex(z)?;
            let v = theta_q_scaled(p, q, SERIES_TOL)?.value.log_abs();
            Ok(v - delta.ln() - gaussian_log(p.log_r, lq) - 0.5 * p.log_r)
        })
        .collect::<Result<_>>()?;
    let violations = logs.iter().filter(|l| !l.is_finite()).count();
    logs.retain(|l| l.is_finite());
    logs.sort_by(f64::total_cmp);
    let log_delta_hat = logs.first().copied().unwrap_or(f64::NEG_INFINITY);
    let quant = |f: f64| {
        if logs.is_empty() {
            f64::NAN
        } else {
            let i = ((logs.len() - 1) as f64 * f).round() as usize;
            (logs[i] - log_delta_hat).exp()
        }
    };
    let params = Params::new()
        .num("q", q)
        .num("delta", delta)
        .int("samples", samples as i64)
        .int("accepted", pts.len() as i64)
        .num("Delta_hat", log_delta_hat.exp())
        .num("margin_p50", quant(0.5))
        .num("margin_p90", quant(0.9));
    let missing = usize::from(!(log_delta_hat.exp() > 0.0));
    Ok(CheckReport::certificate("bounds.theta_lower_bound", params, violations + missing))
}

fn exp_q_log_abs(z: Complex64, q: f64) -> Result<f64> {
    Ok(exp_q_entire_scaled(z, q, SERIES_TOL)?.value.log_abs())
}

/// Certifies the three exp_q estimates: the upper bound with `C₁` for
/// `|z| >= 1`, the lower bound `C₀` on `D(0, q^{1/2}/(q-1))`, and the lower
/// bound with `K₀` outside the disks of relative radius `eps` around the zeros.
///
/// The constants are fitted on dense one-dimensional sets where the extremes
/// sit: the positive axis for `C₁` (positive Taylor coefficients), the circle
/// `|z| = q^{1/2}/(q-1)` for `C₀` and the boundaries of the excluded region for
/// `K₀` (`log|exp_q| - log²|z|/(2 log q) - e log|z|` is superharmonic there).
/// Quasi-random points of each region then check the constants inflated by 5%.
pub fn validate_expq_bounds(q: f64, eps: f64, samples: usize) -> Result<CheckReport> {
    validate_expq_bounds_seeded(q, eps, samples, DEFAULT_SEED)
}

const EXPQ_R_MAX: f64 = 1e4;
const DENSE: usize = 4096;

pub fn validate_expq_bounds_seeded(q: f64, eps: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    check_q(q)?;
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 0.2], got {eps}")));
    }
    if samples < 8 {
        return Err(Error::InvalidParameter("need at least eight samples".into()));
    }
    let lq = q.ln();
    let expo = (q - 1.0).ln() / lq - 0.5;
    let shape = |lr: f64| gaussian_log(lr, lq) + expo * lr;
    let small = q.sqrt() / (q - 1.0);
    let lmax = EXPQ_R_MAX.ln();
    // relative distance, so the disks |z + q^{m+1}/(q-1)| <= ε q^{m+1}/(q-1)
    let in_lower_region = |z: Complex64| -> Result<bool> {
        Ok(z.norm() >= small && z.norm() <= EXPQ_R_MAX && nearest_zero_distance(ZeroKind::ExpQ, z, q)? > eps)
    };
    let excess = |z: Complex64| -> Result<f64> { Ok(exp_q_log_abs(z, q)? - shape(z.norm().ln())) };
    let eval_all = |pts: &[Complex64], f: &(dyn Fn(Complex64) -> Result<f64> + Sync)| -> Result<Vec<f64>> {
        pts.par_iter().map(|&z| f(z)).collect()
    };
    let not_finite = |v: &[f64]| v.iter().filter(|x| !x.is_finite()).count();

    // (a)
    let axis: Vec<Complex64> =
        (0..DENSE).map(|i| Complex64::new((lmax * i as f64 / (DENSE - 1) as f64).exp(), 0.0)).collect();
    let a_fit = eval_all(&axis, &excess)?;
    let log_c1 = a_fit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a_pts = log_polar_points(samples, 0.0, lmax, -PI, PI, seed);
    let a_held = eval_all(&a_pts, &excess)?;
    let a_viol = a_held.iter().filter(|&&x| x > log_c1 + INFLATION.ln()).count() + not_finite(&a_held);

    // (b)
    let circle: Vec<Complex64> =
        (0..DENSE).map(|i| Complex64::from_polar(small, -PI + 2.0 * PI * i as f64 / DENSE as f64)).collect();
    let b_fit = eval_all(&circle, &|z| exp_q_log_abs(z, q))?;
    let log_c0 = b_fit.iter().copied().fold(f64::INFINITY, f64::min);
    let b_pts = log_polar_points(samples, (1e-4 * small).ln(), small.ln(), -PI, PI, seed.wrapping_add(7));
    let b_held = eval_all(&b_pts, &|z| exp_q_log_abs(z, q))?;
    let b_viol = b_held.iter().filter(|&&x| x < log_c0 - INFLATION.ln()).count() + not_finite(&b_held);

    // (c): boundary of the small disk, of every zero disk and the outer circle
    let mut boundary: Vec<Complex64> = circle.iter().map(|z| z * (1.0 + 1e-9)).collect();
    boundary.extend((0..DENSE).map(|i| Complex64::from_polar(EXPQ_R_MAX, -PI + 2.0 * PI * i as f64 / DENSE as f64)));
    let mut m = 0;
    loop {
        let centre = q.powi(m + 1) / (q - 1.0);
        if centre * (1.0 - eps) > EXPQ_R_MAX {
            break;
        }
        boundary.extend((0..512).map(|i| {
            let phase = 2.0 * PI * i as f64 / 512.0;
            -centre + Complex64::from_polar(eps * centre * (1.0 + 1e-9), phase)
        }));
        m += 1;
    }
    let mut c_fit_pts = Vec::with_capacity(boundary.len());
    for z in boundary {
        if in_lower_region(z)? {
            c_fit_pts.push(z);
        }
    }
    let c_fit = eval_all(&c_fit_pts, &excess)?;
    // |exp_q| >= (ε / K₀) shape  ⇔  log K₀ >= log ε - (log|exp_q| - shape)
    let log_k0 = c_fit.iter().map(|x| eps.ln() - x).fold(f64::NEG_INFINITY, f64::max);
    let mut c_pts = Vec::with_capacity(samples);
    for z in log_polar_points(2 * samples, small.ln(), lmax, -PI, PI, seed.wrapping_add(13)) {
        if in_lower_region(z)? {
            c_pts.push(z);
        }
    }
    let c_held = eval_all(&c_pts, &excess)?;
    let c_viol = c_held.iter().filter(|&&x| eps.ln() - x > log_k0 + INFLATION.ln()).count() + not_finite(&c_held);

    let positive = |l: f64| l.is_finite() && l.exp() > 0.0;
    let missing = usize::from(!positive(log_c1)) + usize::from(!positive(log_c0)) + usize::from(!positive(log_k0));
    let params = Params::new()
        .num("q", q)
        .num("eps", eps)
        .int("samples", samples as i64)
        .num("C1", log_c1.exp())
        .num("C0", log_c0.exp())
        .num("K0", log_k0.exp())
        .int("violations_upper", a_viol as i64)
        .int("violations_small_disk", b_viol as i64)
        .int("violations_lower", c_viol as i64)
        .int("accepted_lower", c_pts.len() as i64);
    Ok(CheckReport::certificate("bounds.expq_bounds", params, a_viol + b_viol + c_viol + missing))
}

/// `r_n = ([n]_q! / q^{n(n-1)/2}) ((q-1)/q)^n = ∏_{j<=n} (1 - q^{-j})` and its
/// increments `r_{n-1} - r_n = r_{n-1} q^{-n}` up to `n = N`.
pub fn estimate_cq_limit(q: f64, n_max: usize) -> Result<FitResult> {
    check_q(q)?;
    if n_max < 50 {
        return Err(Error::InvalidParameter(format!("N must be at least 50, got {n_max}")));
    }
    let lq = q.ln();
    let mut log_r = 0.0f64;
    let mut increments = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nf = n as f64;
        increments.push((log_r - nf * lq).exp());
        log_r += (-(-nf * lq).exp()).ln_1p();
    }
    // independent route through the q-factorial
    let direct = crate::qcore::q_factorial(n_max as u32, q, crate::qcore::Mode::Log)?
        - 0.5 * (n_max * (n_max - 1)) as f64 * lq
        + n_max as f64 * ((q - 1.0) / q).ln();
    let residual = (direct - log_r).abs();
    let mut violations = 0;
    for n in 11..n_max {
        let ratio = increments[n] / increments[n - 1];
        if !(ratio <= 1.05 / q) {
            violations += 1;
        }
    }
    if violations > 0 {
        return Err(Error::FitRejected(format!("{violations} increments of r_n fail to decay geometrically")));
    }
    let mut constants = BTreeMap::new();
    constants.insert("c_q".into(), log_r.exp());
    constants.insert("increment_N".into(), *increments.last().expect("N >= 50"));
    constants.insert("increment_ratio_max".into(), (11..n_max).map(|n| increments[n] / increments[n - 1]).fold(0.0, f64::max));
    Ok(FitResult {
        constants,
        residual_max: residual,
        residual_rms: residual,
        samples: n_max,
        held_out: 0,
        violations,
        description: format!("c(q) limit, q = {q}, N = {n_max}"),
    })
}

/// Radius cap and sector shrink for [`check_class_membership`].
pub const CLASS_RADIUS_CAP: f64 = 1e12;
const CLASS_SUBSECTOR: f64 = 0.9;

/// Fits the smallest `c` with `|f(z)| <= c e^{ω_M(|z|/k)}` on quasi-random
/// points of a proper subsector and checks boundedness near the origin.
/// An increasing ratio across the outer radial bins means no `c` exists.
pub fn check_class_membership(f: &SectorFunction, m: &MomentSequence, k: f64, samples: usize) -> Result<FitResult> {
    if !(k > 1.0) {
        return Err(Error::InvalidParameter(format!("k must exceed 1, got {k}")));
    }
    if samples < 16 {
        return Err(Error::InvalidParameter("need at least 16 samples".into()));
    }
    let half = 0.5 * f.opening() * CLASS_SUBSECTOR;
    let (lo, hi) = (1e-3f64.ln(), CLASS_RADIUS_CAP.ln());
    let mut h = Halton::new(2, DEFAULT_SEED);
    let pts: Vec<LogPolarPoint> = (0..samples)
        .map(|_| {
            let u = h.next_point();
            LogPolarPoint::new(lo + (hi - lo) * u[0], f.bisector() - half + 2.0 * half * u[1])
        })
        .collect();
    let rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| -> Result<(f64, f64)> {
            let v = f.eval(*p)?.log_abs();
            let w = omega_weight(m, (p.log_r - k.ln()).exp(), DEFAULT_N_CAP)?;
            Ok((p.log_r, v - w))
        })
        .collect::<Result<_>>()?;
    if rows.iter().any(|(_, r)| r.is_nan() || *r == f64::INFINITY) {
        return Err(Error::WitnessFailed(format!("{} is not finite on the sector", f.name())));
    }
    let log_c = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    // radial bins: the ratio must stop growing before the cap
    const BINS: usize = 8;
    let mut bin_max = [f64::NEG_INFINITY; BINS];
    for (lr, r) in &rows {
        let b = (((lr - lo) / (hi - lo)) * BINS as f64).floor().clamp(0.0, (BINS - 1) as f64) as usize;
        bin_max[b] = bin_max[b].max(*r);
    }
    let tail = &bin_max[BINS - 3..];
    let growing = tail.windows(2).all(|w| w[1] > w[0] + 1.0);
    if growing {
        return Err(Error::WitnessFailed(format!(
            "|f| / e^ω grows without bound for {} (log ratio {:.1} → {:.1} over the outer bins)",
            f.name(),
            tail[0],
            tail[2]
        )));
    }
    // continuity at the origin
    let near: Vec<f64> = [-6.0, -9.0, -12.0]
        .iter()
        .map(|d: &f64| f.eval(LogPolarPoint::new(d * 10f64.ln(), f.bisector())).map(|v| v.log_abs()))
        .collect::<Result<_>>()?;
    if near.iter().any(|v| !(v.is_finite() || *v == f64::NEG_INFINITY)) || near[2] > near[0].max(0.0) + 10f64.ln() {
        return Err(Error::WitnessFailed(format!("{} is not bounded near the origin", f.name())));
    }
    let mut constants = BTreeMap::new();
    constants.insert("c".into(), log_c.exp());
    constants.insert("k".into(), k);
    let res: Vec<f64> = rows.iter().map(|r| log_c - r.1).collect();
    let residual_rms = (res.iter().filter(|r| r.is_finite()).map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    Ok(FitResult {
        constants,
        residual_max: 0.0,
        residual_rms,
        samples,
        held_out: 0,
        violations: 0,
        description: format!(
            "class membership of {}, sector {} ± {}, radii [1e-3, {CLASS_RADIUS_CAP:e}]",
            f.name(),
            f.bisector(),
            half
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{moment_sequence, QParams, SequenceKind};
    use crate::special::e_q_entire;

    #[test]
    fn cq_limit() {
        for &q in &[1.5, 2.0, 3.0] {
            let r = estimate_cq_limit(q, 100).unwrap();
            assert!(r.get("c_q").unwrap() > 0.0);
            let prod: f64 = (1..=100).map(|j| 1.0 - q.powi(-j)).product();
            assert!((r.get("c_q").unwrap() - prod).abs() < 1e-14);
            assert!(r.residual_max < 1e-10);
        }
        assert!(estimate_cq_limit(2.0, 100).unwrap().get("increment_N").unwrap() < 1e-12);
        assert!(estimate_cq_limit(2.0, 10).is_err());
    }

    #[test]
    fn alpha_fit_at_unit_radius() {
        let r = estimate_alpha_Eq(2.0, &default_alpha_radii(25), &default_alpha_directions()).unwrap();
        let k = r.get("K").unwrap();
        assert!(k >= e_q_entire(Complex64::new(1.0, 0.0), 2.0, 1e-15).unwrap().value.re);
        assert!(r.pass());
        assert!((r.get("alpha").unwrap() - 0.5).abs() < 0.1);
    }

    #[test]
    fn theta_sampler_respects_exclusions() {
        let pts = theta_samples(2.0, 0.1, 200, 1).unwrap();
        assert!(pts.len() > 150);
        for z in pts {
            assert!(nearest_zero_distance(ZeroKind::Theta, z, 2.0).unwrap() > 0.1);
        }
    }

    #[test]
    fn expq_small_disk_constant() {
        let r = validate_expq_bounds(2.0, 0.1, 200).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.param_f64("C0").unwrap() <= 1.0);
    }

    #[test]
    fn class_membership_examples() {
        let m1 = moment_sequence(SequenceKind::M1, &QParams::single(2.0).unwrap()).unwrap();
        let one = SectorFunction::monomial(0, 0.0, PI);
        let r = check_class_membership(&one, &m1, 1.5, 256).unwrap();
        assert!((r.get("c").unwrap() - 1.0).abs() < 1e-12);
        let cube = SectorFunction::monomial(3, 0.0, PI);
        assert!(check_class_membership(&cube, &m1, 1.5, 256).is_ok());
        let lq = 2f64.ln();
        let fast = SectorFunction::new(
            "exp(log²|u|/log q)",
            move |p: LogPolarPoint| Ok(crate::special::Scaled::from_log_polar(p.log_r * p.log_r / lq, 0.0)),
            0.0,
            1.0,
        );
        assert!(matches!(check_class_membership(&fast, &m1, 1.01, 256), Err(Error::WitnessFailed(_))));
    }
}
