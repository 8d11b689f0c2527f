//! Truncated power series, moment derivatives and pointwise difference
//! operators, with a corpus of reference functions.

use std::sync::Arc;

use num_complex::Complex64;

use crate::qcore::{log_pq_number, log_q_number, MomentSequence};
use crate::special::{e_q_entire, exp_q_entire};
use crate::{Error, Result};

/// `|a_n| <= e^{log_c} ρ^n` for every `n` beyond the stored order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricTail {
    pub log_c: f64,
    pub rho: f64,
}

impl GeometricTail {
    /// Tail of an exactly represented polynomial.
    pub const EXACT: GeometricTail = GeometricTail { log_c: f64::NEG_INFINITY, rho: 0.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPowerSeries {
    coeffs: Vec<Complex64>,
    tail: Option<GeometricTail>,
}

impl TruncatedPowerSeries {
    pub fn new(coeffs: Vec<Complex64>, tail: Option<GeometricTail>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a series needs at least one coefficient".into()));
        }
        if let Some(t) = tail {
            if !(t.rho >= 0.0) {
                return Err(Error::InvalidParameter(format!("tail ratio must be >= 0, got {}", t.rho)));
            }
        }
        Ok(TruncatedPowerSeries { coeffs, tail })
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs, Some(GeometricTail::EXACT))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn tail(&self) -> Option<GeometricTail> {
        self.tail
    }

    /// Horner evaluation with the certified tail bound (0 without a tail
    /// descriptor, where the series is taken as given).
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        let bound = match self.tail {
            None => 0.0,
            Some(t) if t.log_c == f64::NEG_INFINITY => 0.0,
            Some(t) => {
                let x = t.rho * z.norm();
                if x >= 1.0 {
                    return Err(Error::DomainExceeded(format!(
                        "|z| = {} outside the certified disk of radius {}",
                        z.norm(),
                        1.0 / t.rho
                    )));
                }
                let n1 = (self.order() + 1) as f64;
                (t.log_c + n1 * x.ln()).exp() / (1.0 - x)
            }
        };
        Ok((acc, bound))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
        let coeffs = (0..n).map(|i| get(&self.coeffs, i) + get(&other.coeffs, i)).collect();
        let tail = match (self.tail, other.tail) {
            (Some(a), Some(b)) => {
                let rho = a.rho.max(b.rho);
                let log_c = log_add(a.log_c, b.log_c);
                Some(GeometricTail { log_c, rho })
            }
            _ => None,
        };
        TruncatedPowerSeries { coeffs, tail }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let tail = self.tail.map(|t| GeometricTail { log_c: t.log_c + s.norm().ln(), rho: t.rho });
        TruncatedPowerSeries { coeffs: self.coeffs.iter().map(|c| c * s).collect(), tail }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `b_n = (m(n+k)/m(n)) a_{n+k}`, `n <= N - k`.
pub fn moment_derivative(f: &TruncatedPowerSeries, m: &MomentSequence, k: usize) -> Result<TruncatedPowerSeries> {
    let order = f.order();
    if k > order {
        return Err(Error::OrderTooLarge { k, order });
    }
    let coeffs: Vec<Complex64> = (0..=order - k)
        .map(|n| f.coeffs[n + k] * (m.log_at(n + k) - m.log_at(n)).exp())
        .collect();
    let tail = match f.tail {
        Some(t) if t.log_c == f64::NEG_INFINITY => Some(t),
        Some(t) => m.shift_ratio_bound(k).map(|(c, g)| GeometricTail {
            log_c: t.log_c + k as f64 * t.rho.ln() + c.ln(),
            rho: t.rho * g,
        }),
        None => None,
    };
    Ok(TruncatedPowerSeries { coeffs, tail })
}

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type Generator = Arc<dyn Fn(usize) -> TruncatedPowerSeries + Send + Sync>;

/// A holomorphic function on `D(0, radius)` with both a closed form and a
/// Maclaurin generator.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    closed_form: Evaluator,
    series: Generator,
    radius: f64,
}

impl std::fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionSpec").field("name", &self.name).field("radius", &self.radius).finish()
    }
}

pub const DEFAULT_ORDER: usize = 80;

impl FunctionSpec {
    pub fn new(
        name: impl Into<String>,
        radius: f64,
        closed_form: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        series: impl Fn(usize) -> TruncatedPowerSeries + Send + Sync + 'static,
    ) -> Self {
        FunctionSpec { name: name.into(), closed_form: Arc::new(closed_form), series: Arc::new(series), radius }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn series(&self, order: usize) -> TruncatedPowerSeries {
        (self.series)(order)
    }

    /// True for a polynomial of degree below `k`, whose `k`-th derivatives
    /// of every kind vanish identically.
    pub fn annihilated_by(&self, k: usize) -> bool {
        let s = self.series(k);
        s.tail().is_none_or(|t| t.log_c == f64::NEG_INFINITY) && s.coeffs().iter().skip(k).all(|a| *a == Complex64::new(0.0, 0.0))
    }

    /// Maclaurin coefficient `a_n`.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.series(n.max(1)).coeffs()[n]
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() >= self.radius {
            return Err(Error::DomainExceeded(format!(
                "{} evaluated at |z| = {} >= radius {}",
                self.name,
                z.norm(),
                self.radius
            )));
        }
        Ok((self.closed_form)(z))
    }
}

fn check_nodes(f: &FunctionSpec, z: Complex64, max_scale: f64) -> Result<()> {
    let r = z.norm() * max_scale;
    if r >= f.radius() {
        return Err(Error::DomainExceeded(format!(
            "node of modulus {r} leaves the disk of analyticity of {} (radius {})",
            f.name(),
            f.radius()
        )));
    }
    Ok(())
}

fn q_factorial_lin(k: usize, q: f64) -> f64 {
    (1..=k).map(|j| log_q_number(j as u32, q).unwrap_or(f64::NAN)).sum::<f64>().exp()
}

/// `D_q^k f(z)` with `D_q f(z) = (f(qz) - f(z)) / ((q-1) z)`.
pub fn jackson_dq(f: &FunctionSpec, z: Complex64, q: f64, k: usize) -> Result<Complex64> {
    if !(q > 1.0) {
        return Err(Error::InvalidParameter(format!("q must satisfy q > 1, got {q}")));
    }
    if z.norm() == 0.0 {
        return Ok(f.coeff(k) * q_factorial_lin(k, q));
    }
    check_nodes(f, z, q.powi(k as i32))?;
    let mut g: Vec<Complex64> = (0..=k).map(|j| f.eval(z * q.powi(j as i32))).collect::<Result<_>>()?;
    for l in 1..=k {
        for j in 0..=(k - l) {
            let node = z * q.powi(j as i32);
            g[j] = (g[j + 1] - g[j]) / (node * (q - 1.0));
        }
    }
    Ok(g[0])
}

/// `D̃_q^k f(z)` with `D̃_q g(z) = (g(qz) - g(0)) / (qz)`. The values
/// `g_l(0) = q^{l(l-1)/2} a_l` come from the Maclaurin coefficients.
pub fn tilde_dq(f: &FunctionSpec, z: Complex64, q: f64, k: usize) -> Result<Complex64> {
    if !(q > 1.0) {
        return Err(Error::InvalidParameter(format!("q must satisfy q > 1, got {q}")));
    }
    let at_zero = |l: usize| f.coeff(l) * (0.5 * (l as f64) * (l as f64 - 1.0) * q.ln()).exp();
    if z.norm() == 0.0 {
        return Ok(at_zero(k));
    }
    check_nodes(f, z, q.powi(k as i32))?;
    let mut g: Vec<Complex64> = (0..=k).map(|j| f.eval(z * q.powi(j as i32))).collect::<Result<_>>()?;
    for l in 1..=k {
        let g0 = at_zero(l - 1);
        for j in 0..=(k - l) {
            let node = z * q.powi(j as i32);
            g[j] = (g[j + 1] - g0) / (node * q);
        }
    }
    Ok(g[0])
}

fn pq_factorial_lin(k: usize, p: f64, q: f64) -> f64 {
    (1..=k).map(|j| log_pq_number(j as u32, p, q).unwrap_or(f64::NAN)).sum::<f64>().exp()
}

/// `D_{p,q}^k f(z)` with `D_{p,q} g(z) = (g(pz) - g(qz)) / ((p-q) z)`,
/// over the node grid `p^i q^j z`, `i + j <= k`.
pub fn pq_derivative(f: &FunctionSpec, z: Complex64, p: f64, q: f64, k: usize) -> Result<Complex64> {
    crate::qcore::QParams::pair(p, q)?;
    let at_zero = |l: usize| f.coeff(l) * pq_factorial_lin(l, p, q);
    if z.norm() == 0.0 {
        return Ok(at_zero(k));
    }
    check_nodes(f, z, p.max(q).max(1.0).powi(k as i32))?;
    let node = |i: usize, j: usize| z * p.powi(i as i32) * q.powi(j as i32);
    // grid[i][j] holds the current level at node (i, j) with i + j <= k - l
    let mut grid: Vec<Vec<Complex64>> = (0..=k)
        .map(|i| {
            (0..=(k - i))
                .map(|j| {
                    let w = node(i, j);
                    if w.norm() == 0.0 {
                        Ok(at_zero(0))
                    } else {
                        f.eval(w)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    for l in 1..=k {
        for i in 0..=(k - l) {
            for j in 0..=(k - l - i) {
                let w = node(i, j);
                grid[i][j] = if w.norm() == 0.0 {
                    at_zero(l)
                } else {
                    (grid[i + 1][j] - grid[i][j + 1]) / (w * (p - q))
                };
            }
        }
    }
    Ok(grid[0][0])
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly_spec(name: String, coeffs: Vec<Complex64>) -> FunctionSpec {
    let cf = coeffs.clone();
    FunctionSpec::new(
        name,
        f64::INFINITY,
        move |z| cf.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a),
        move |order| {
            let mut v = coeffs.clone();
            v.resize(order.max(coeffs.len() - 1) + 1, Complex64::new(0.0, 0.0));
            TruncatedPowerSeries::polynomial(v).expect("non-empty")
        },
    )
}

/// Entire series from log-magnitudes of positive coefficients whose
/// successive ratios decrease; the tail ratio is the first omitted one.
fn ratio_tail_series(order: usize, log_a: impl Fn(usize) -> f64) -> TruncatedPowerSeries {
    let coeffs = (0..=order).map(|n| Complex64::new(log_a(n).exp(), 0.0)).collect();
    let n1 = order + 1;
    let log_rho = log_a(n1 + 1) - log_a(n1);
    let tail = GeometricTail { log_c: log_a(n1) - n1 as f64 * log_rho, rho: log_rho.exp() };
    TruncatedPowerSeries::new(coeffs, Some(tail)).expect("non-empty")
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|j| (j as f64).ln()).sum()
}

/// Reference functions used as oracles.
pub fn corpus(q: f64) -> Vec<FunctionSpec> {
    let mut out = Vec::new();
    for n in 0..=6usize {
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        v[n] = Complex64::new(1.0, 0.0);
        out.push(poly_spec(format!("z^{n}"), v));
    }
    out.push(poly_spec(
        "poly_a".into(),
        vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.3, -0.7), c(0.0, 0.0), c(0.0, 1.0)],
    ));
    out.push(poly_spec("poly_b".into(), vec![c(0.0, 0.0), c(0.25, 0.25), c(-1.5, 0.5), c(0.0, -2.0)]));
    out.push(FunctionSpec::new(
        "geometric",
        1.0,
        |z| (Complex64::new(1.0, 0.0) - z).inv(),
        |order| {
            TruncatedPowerSeries::new(vec![Complex64::new(1.0, 0.0); order + 1], Some(GeometricTail { log_c: 0.0, rho: 1.0 }))
                .expect("non-empty")
        },
    ));
    out.push(FunctionSpec::new(
        "geometric_half",
        2.0,
        |z| (Complex64::new(1.0, 0.0) - z * 0.5).inv(),
        |order| {
            let v = (0..=order).map(|n| Complex64::new(0.5f64.powi(n as i32), 0.0)).collect();
            TruncatedPowerSeries::new(v, Some(GeometricTail { log_c: 0.0, rho: 0.5 })).expect("non-empty")
        },
    ));
    out.push(FunctionSpec::new("exp", f64::INFINITY, |z| z.exp(), |order| {
        let mut s = ratio_tail_series(order, |n| -ln_factorial(n));
        let mut a = 1.0;
        for (n, c) in s.coeffs.iter_mut().enumerate() {
            if n > 0 {
                a /= n as f64;
            }
            *c = Complex64::new(a, 0.0);
        }
        s
    }));
    let lq = q.ln();
    out.push(FunctionSpec::new(
        "E_q",
        f64::INFINITY,
        move |z| e_q_entire(z, q, 1e-16).map(|r| r.value).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        move |order| ratio_tail_series(order, |n| -0.5 * n as f64 * (n as f64 - 1.0) * lq),
    ));
    out.push(FunctionSpec::new(
        "exp_q",
        f64::INFINITY,
        move |z| exp_q_entire(z, q, 1e-16).map(|r| r.value).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        move |order| {
            ratio_tail_series(order, |n| {
                -(1..=n).map(|j| log_q_number(j as u32, q).unwrap_or(f64::NAN)).sum::<f64>()
            })
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{moment_sequence, QParams, SequenceKind};
    use crate::sampling::log_polar_points;
    use proptest::prelude::*;

    fn find(q: f64, name: &str) -> FunctionSpec {
        corpus(q).into_iter().find(|f| f.name() == name).unwrap()
    }

    #[test]
    fn annihilation_by_degree() {
        assert!(find(2.0, "z^1").annihilated_by(2));
        assert!(!find(2.0, "z^2").annihilated_by(2));
        assert!(find(2.0, "z^0").annihilated_by(1));
        assert!(!find(2.0, "exp").annihilated_by(3));
        assert!(!find(2.0, "poly_b").annihilated_by(3));
    }

    fn m(kind: SequenceKind, q: f64) -> MomentSequence {
        moment_sequence(kind, &QParams::single(q).unwrap()).unwrap()
    }

    fn cr(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn moment_derivative_examples() {
        let f = TruncatedPowerSeries::polynomial(vec![cr(0.0), cr(0.0), cr(1.0)]).unwrap();
        let d = moment_derivative(&f, &m(SequenceKind::M1, 2.0), 1).unwrap();
        assert_eq!(d.coeffs().len(), 2);
        assert!(d.coeffs()[0].norm() < 1e-15 && (d.coeffs()[1] - 2.0).norm() < 1e-14);
        let same = moment_derivative(&f, &m(SequenceKind::M2, 2.0), 0).unwrap();
        assert_eq!(same.coeffs(), f.coeffs());
        let ones = TruncatedPowerSeries::new(vec![cr(1.0); 20], None).unwrap();
        let d = moment_derivative(&ones, &m(SequenceKind::M2, 2.0), 1).unwrap();
        for (n, b) in d.coeffs().iter().enumerate() {
            let expect = 2f64.powi(n as i32 + 1) - 1.0;
            assert!((b.re - expect).abs() < 1e-12 * expect);
        }
        assert!(matches!(
            moment_derivative(&f, &m(SequenceKind::M1, 2.0), 3),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn jackson_examples() {
        let f = find(2.0, "z^3");
        let v = jackson_dq(&f, cr(0.3), 2.0, 1).unwrap();
        assert!((v - 0.63).norm() < 1e-14);
        let f0 = find(2.0, "z^0");
        assert!(jackson_dq(&f0, cr(0.4), 2.0, 1).unwrap().norm() < 1e-15);
        let g = find(2.0, "geometric");
        let v = jackson_dq(&g, cr(0.1), 2.0, 1).unwrap();
        assert!((v.re - 1.0 / (0.8 * 0.9)).abs() < 1e-13);
        assert!(matches!(jackson_dq(&g, cr(0.6), 2.0, 1), Err(Error::DomainExceeded(_))));
    }

    #[test]
    fn tilde_examples() {
        let f = find(2.0, "z^2");
        assert!((tilde_dq(&f, cr(0.1), 2.0, 1).unwrap() - 0.2).norm() < 1e-14);
        let g = find(2.0, "geometric");
        assert!((tilde_dq(&g, cr(0.1), 2.0, 1).unwrap() - 1.25).norm() < 1e-13);
        let z = Complex64::new(0.2, -0.1);
        assert_eq!(tilde_dq(&g, z, 2.0, 0).unwrap(), g.eval(z).unwrap());
    }

    #[test]
    fn pq_examples() {
        let f = find(2.0, "z^3");
        let v = pq_derivative(&f, cr(0.05), 3.0, 2.0, 1).unwrap();
        assert!((v - 0.0475).norm() < 1e-15);
        let g = find(2.0, "geometric_half");
        let z = Complex64::new(0.05, 0.02);
        for k in 0..4 {
            let a = pq_derivative(&g, z, 3.0, 2.0, k).unwrap();
            let b = pq_derivative(&g, z, 2.0, 3.0, k).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
        let f2 = find(2.0, "z^2");
        let a = pq_derivative(&f2, cr(0.1), 0.0, 2.0, 1).unwrap();
        assert!((a - tilde_dq(&f2, cr(0.1), 2.0, 1).unwrap()).norm() < 1e-15);
        assert!(pq_derivative(&f2, cr(0.1), 2.0, 2.0, 1).is_err());
    }

    #[test]
    fn pq_special_cases_match_other_operators() {
        for f in corpus(2.0) {
            let z = Complex64::new(0.05, 0.02);
            for k in 0..=3 {
                let a = pq_derivative(&f, z, 0.0, 2.0, k).unwrap();
                let b = tilde_dq(&f, z, 2.0, k).unwrap();
                assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "{} k={k}", f.name());
                let a = pq_derivative(&f, z, 1.0, 2.0, k).unwrap();
                let b = jackson_dq(&f, z, 2.0, k).unwrap();
                assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "{} k={k}", f.name());
            }
        }
    }

    #[test]
    fn corpus_contents() {
        let fs = corpus(2.0);
        let g = fs.iter().find(|f| f.name() == "geometric").unwrap();
        assert!(g.series(30).coeffs().iter().all(|c| *c == cr(1.0)));
        let e = fs.iter().find(|f| f.name() == "exp").unwrap();
        let s = e.series(20);
        let mut fact = 1.0;
        for (n, a) in s.coeffs().iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((a.re - 1.0 / fact).abs() <= 1e-15 / fact);
        }
        assert!(fs.iter().filter(|f| f.name().starts_with("z^")).count() == 7);
    }

    #[test]
    fn corpus_closed_form_matches_series() {
        for q in [1.5, 2.0] {
            for f in corpus(q) {
                let r = if f.radius().is_finite() { f.radius() / 2.0 } else { 4.0 };
                let s = f.series(DEFAULT_ORDER);
                for z in log_polar_points(20, (r / 100.0).ln(), r.ln(), -3.14, 3.14, 5) {
                    let (v, bound) = s.eval(z).unwrap();
                    let w = f.eval(z).unwrap();
                    assert!((v - w).norm() <= 1e-10 * w.norm().max(1.0) + bound, "{} at {z}", f.name());
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence() {
        for q in [1.5, 2.0] {
            let m1 = m(SequenceKind::M1, q);
            let m2 = m(SequenceKind::M2, q);
            for f in corpus(q) {
                let s = f.series(DEFAULT_ORDER);
                for k in 1..=3usize {
                    let d2 = moment_derivative(&s, &m2, k).unwrap();
                    let d1 = moment_derivative(&s, &m1, k).unwrap();
                    let rmax = if f.radius().is_finite() { f.radius() } else { 2.0 };
                    let r = 0.4 * rmax / q.powi(k as i32);
                    for z in log_polar_points(20, (r / 4.0).ln(), r.ln(), -3.1, 3.1, 9) {
                        let (a, ba) = d2.eval(z).unwrap();
                        let b = jackson_dq(&f, z, q, k).unwrap();
                        assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-3) + ba, "m2 {} q={q} k={k} z={z}", f.name());
                        let (a, ba) = d1.eval(z).unwrap();
                        let b = tilde_dq(&f, z, q, k).unwrap();
                        assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-3) + ba, "m1 {} q={q} k={k} z={z}", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn z_zero_uses_series() {
        let f = find(2.0, "geometric");
        assert!((jackson_dq(&f, cr(0.0), 2.0, 2).unwrap() - 3.0).norm() < 1e-14);
        assert!((tilde_dq(&f, cr(0.0), 2.0, 2).unwrap() - 2.0).norm() < 1e-14);
        assert!((pq_derivative(&f, cr(0.0), 3.0, 2.0, 2).unwrap() - 5.0).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn moment_derivative_linear(
            a in proptest::collection::vec(-2.0f64..2.0, 12),
            b in proptest::collection::vec(-2.0f64..2.0, 12),
            s in -3.0f64..3.0, t in -3.0f64..3.0, k in 0usize..5,
        ) {
            let fa = TruncatedPowerSeries::polynomial(a.iter().map(|x| cr(*x)).collect()).unwrap();
            let fb = TruncatedPowerSeries::polynomial(b.iter().map(|x| cr(*x)).collect()).unwrap();
            let mm = m(SequenceKind::M2, 1.7);
            let lhs = moment_derivative(&fa.scale(cr(s)).add(&fb.scale(cr(t))), &mm, k).unwrap();
            let da = moment_derivative(&fa, &mm, k).unwrap();
            let db = moment_derivative(&fb, &mm, k).unwrap();
            let rhs = da.scale(cr(s)).add(&db.scale(cr(t)));
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).norm() <= 1e-12 * y.norm().max(1.0));
            }
        }

        #[test]
        fn pq_monomial_rule(n in 0usize..7, k in 0usize..4, p in 0.5f64..3.0, ratio in 1.1f64..2.0, re in -0.2f64..0.2, im in -0.2f64..0.2) {
            let q = p * ratio;
            let f = find(2.0, &format!("z^{n}"));
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 1e-3);
            let v = pq_derivative(&f, z, p, q, k).unwrap();
            let expect = if n < k {
                Complex64::new(0.0, 0.0)
            } else {
                z.powi((n - k) as i32) * (pq_factorial_lin(n, p, q) / pq_factorial_lin(n - k, p, q))
            };
            let scale = pq_factorial_lin(n, p, q) * z.norm().powi(n as i32 - k as i32).max(1.0);
            prop_assert!((v - expect).norm() <= 1e-9 * scale);
        }

        #[test]
        fn rescaling_identity(k in 0usize..4, p in 0.3f64..2.0, ratio in 1.2f64..2.5, which in 0usize..4, re in -0.1f64..0.1, im in -0.1f64..0.1) {
            let q = p * ratio;
            let names = ["geometric_half", "exp", "poly_a", "z^5"];
            let f = find(2.0, names[which]);
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 1e-2);
            prop_assume!(z.norm() * q.max(1.0).powi(k as i32) < 0.9 * f.radius());
            let lhs = pq_derivative(&f, z, p, q, k).unwrap();
            let kk = k as f64;
            let rhs = jackson_dq(&f, z * p.powi(k as i32), q / p, k).unwrap() * p.powf(0.5 * kk * (kk - 1.0));
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0), "lhs={lhs} rhs={rhs}");
        }
    }
}
