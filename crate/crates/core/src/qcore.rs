//! q-numbers, factorials, moment sequences and weight functions.
//!
//! Factorial-type quantities are held in log domain; linear values are
//! produced on request and fail with [`Error::Overflow`] when they leave
//! the binary64 range.

use std::sync::Arc;

use crate::report::{CheckReport, Params};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamContext {
    SingleQ,
    PqPair,
}

/// Validated parameter bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams {
    q: f64,
    p: Option<f64>,
    context: ParamContext,
}

impl QParams {
    pub fn single(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidParameter(format!("q must satisfy q > 1, got {q}")));
        }
        Ok(QParams { q, p: None, context: ParamContext::SingleQ })
    }

    pub fn pair(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p >= 0.0 && q >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "p and q must be finite and nonnegative, got p={p}, q={q}"
            )));
        }
        if p == q {
            return Err(Error::InvalidParameter(format!("p and q must differ, got {p}")));
        }
        Ok(QParams { q, p: Some(p), context: ParamContext::PqPair })
    }

    /// Pair constrained to `p > q > 1`, as needed for kernel construction.
    pub fn kernel(p: f64, q: f64) -> Result<Self> {
        let out = Self::pair(p, q)?;
        if !(p > q && q > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel construction requires p > q > 1, got p={p}, q={q}"
            )));
        }
        Ok(out)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn context(&self) -> ParamContext {
        self.context
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Log,
}

fn check_base(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParameter(format!("q must be positive and finite, got {q}")));
    }
    if q == 1.0 {
        return Err(Error::InvalidParameter(
            "q = 1 is the classical limit; use n directly".into(),
        ));
    }
    Ok(())
}

/// `ln|e^a - 1|` without cancellation.
fn ln_abs_expm1(a: f64) -> f64 {
    if a > 0.0 {
        a + (-(-a).exp_m1()).ln()
    } else {
        (-a.exp_m1()).ln()
    }
}

/// `[n]_q = (q^n - 1)/(q - 1)`.
pub fn q_number(n: u32, q: f64) -> Result<f64> {
    check_base(q)?;
    if n == 0 {
        return Ok(0.0);
    }
    let h = q - 1.0;
    let v = (n as f64 * h.ln_1p()).exp_m1() / h;
    if !v.is_finite() {
        return Err(Error::Overflow { what: format!("[{n}]_q at q={q}; use log mode") });
    }
    Ok(v)
}

/// `ln [n]_q` for `n >= 1`.
pub fn log_q_number(n: u32, q: f64) -> Result<f64> {
    check_base(q)?;
    if n == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let h = q - 1.0;
    let a = n as f64 * h.ln_1p();
    Ok(ln_abs_expm1(a) - h.abs().ln())
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q` for `q > 1`.
pub fn q_factorial(n: u32, q: f64, mode: Mode) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidParameter(format!("q must satisfy q > 1, got {q}")));
    }
    match mode {
        Mode::Log => {
            let mut s = 0.0;
            for j in 1..=n {
                s += log_q_number(j, q)?;
            }
            Ok(s)
        }
        Mode::Linear => {
            let mut prod = 1.0;
            for j in 1..=n {
                prod *= q_number(j, q)?;
                if !prod.is_finite() {
                    return Err(Error::Overflow { what: format!("[{n}]_q! at q={q}; use log mode") });
                }
            }
            Ok(prod)
        }
    }
}

fn check_pair(p: f64, q: f64) -> Result<()> {
    QParams::pair(p, q).map(|_| ())
}

fn ordered(p: f64, q: f64) -> (f64, f64) {
    if p > q {
        (p, q)
    } else {
        (q, p)
    }
}

/// `[n]_{p,q} = (p^n - q^n)/(p - q)`.
pub fn pq_number(n: u32, p: f64, q: f64) -> Result<f64> {
    check_pair(p, q)?;
    if n == 0 {
        return Ok(0.0);
    }
    let (hi, lo) = ordered(p, q);
    let x = lo / hi;
    let ratio = if x == 0.0 { 1.0 } else { -(n as f64 * x.ln()).exp_m1() / (1.0 - x) };
    let v = hi.powi(n as i32 - 1) * ratio;
    if !v.is_finite() {
        return Err(Error::Overflow { what: format!("[{n}]_(p,q) at p={p}, q={q}; use log mode") });
    }
    Ok(v)
}

/// `ln [n]_{p,q}` for `n >= 1`.
pub fn log_pq_number(n: u32, p: f64, q: f64) -> Result<f64> {
    check_pair(p, q)?;
    if n == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (hi, lo) = ordered(p, q);
    let x = lo / hi;
    let tail = if x == 0.0 { 0.0 } else { (-(n as f64 * x.ln()).exp_m1()).ln() - (-x).ln_1p() };
    Ok((n as f64 - 1.0) * hi.ln() + tail)
}

/// `[n]_{p,q}! = [1]_{p,q} ... [n]_{p,q}`.
pub fn pq_factorial(n: u32, p: f64, q: f64, mode: Mode) -> Result<f64> {
    check_pair(p, q)?;
    match mode {
        Mode::Log => {
            let mut s = 0.0;
            for j in 1..=n {
                s += log_pq_number(j, p, q)?;
            }
            Ok(s)
        }
        Mode::Linear => {
            let mut prod = 1.0;
            for j in 1..=n {
                prod *= pq_number(j, p, q)?;
                if !prod.is_finite() {
                    return Err(Error::Overflow {
                        what: format!("[{n}]_(p,q)! at p={p}, q={q}; use log mode"),
                    });
                }
            }
            Ok(prod)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    M1,
    M2,
    Mpq,
    Factorial,
    Custom,
    Product,
}

#[derive(Debug, Clone)]
enum Generator {
    M1 { log_q: f64 },
    M2 { q: f64 },
    Mpq { p: f64, q: f64 },
    Factorial,
    Custom,
    Product(Arc<MomentSequence>, Arc<MomentSequence>),
}

const TABLE_LEN: usize = 1024;

/// Positive sequence `m(n)` with `m(0) = 1`, read through a log table that is
/// fixed at construction, so shared references may be read concurrently.
#[derive(Debug, Clone)]
pub struct MomentSequence {
    kind: SequenceKind,
    gen: Generator,
    table: Arc<[f64]>,
}

fn log_step(gen: &Generator, j: usize) -> f64 {
    let j32 = j as u32;
    match gen {
        Generator::M2 { q } => log_q_number(j32, *q).unwrap_or(f64::NAN),
        Generator::Mpq { p, q } => log_pq_number(j32, *p, *q).unwrap_or(f64::NAN),
        Generator::Factorial => (j as f64).ln(),
        _ => unreachable!("log_step only for tabled generators"),
    }
}

impl MomentSequence {
    fn tabled(kind: SequenceKind, gen: Generator) -> Self {
        let mut table = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0;
        table.push(0.0);
        for j in 1..TABLE_LEN {
            acc += log_step(&gen, j);
            table.push(acc);
        }
        MomentSequence { kind, gen, table: table.into() }
    }

    /// A user-supplied finite sequence. Indices beyond the supplied values
    /// are treated as `m(n) = +inf`, so they never contribute to `ω_M`.
    pub fn custom(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values[0] != 1.0 {
            return Err(Error::InvalidParameter("custom sequence must start with m(0) = 1".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "custom sequence values must be positive and finite, got {bad}"
            )));
        }
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        Ok(MomentSequence { kind: SequenceKind::Custom, gen: Generator::Custom, table: logs.into() })
    }

    /// Termwise product `m(n) = a(n) b(n)`.
    pub fn product(a: &MomentSequence, b: &MomentSequence) -> Self {
        MomentSequence {
            kind: SequenceKind::Product,
            gen: Generator::Product(Arc::new(a.clone()), Arc::new(b.clone())),
            table: Arc::from(Vec::new()),
        }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Whether the sequence is log-convex by construction, which allows the
    /// ascending maximiser search in [`omega_weight`].
    pub fn is_structurally_log_convex(&self) -> bool {
        match &self.gen {
            Generator::M1 { .. } | Generator::M2 { .. } | Generator::Factorial => true,
            Generator::Mpq { p, q } => p.max(*q) >= 1.0,
            Generator::Custom => false,
            Generator::Product(a, b) => {
                a.is_structurally_log_convex() && b.is_structurally_log_convex()
            }
        }
    }

    pub fn log_at(&self, n: usize) -> f64 {
        match &self.gen {
            Generator::M1 { log_q } => {
                let nf = n as f64;
                0.5 * nf * (nf - 1.0) * log_q
            }
            Generator::Custom => self.table.get(n).copied().unwrap_or(f64::INFINITY),
            Generator::Product(a, b) => a.log_at(n) + b.log_at(n),
            gen => {
                if n < self.table.len() {
                    self.table[n]
                } else {
                    let mut acc = self.table[self.table.len() - 1];
                    for j in self.table.len()..=n {
                        acc += log_step(gen, j);
                    }
                    acc
                }
            }
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        self.log_at(n).exp()
    }

    /// `(c, g)` with `m(n+k)/m(n) <= c·g^n` for every `n >= 0`, when such a
    /// closed-form bound is known for the kind.
    pub fn shift_ratio_bound(&self, k: usize) -> Option<(f64, f64)> {
        let kf = k as f64;
        match &self.gen {
            Generator::M1 { log_q } => Some(((0.5 * kf * (kf - 1.0) * log_q).exp(), (kf * log_q).exp())),
            Generator::M2 { q } => {
                Some(((0.5 * kf * (kf + 1.0) * q.ln() - kf * (q - 1.0).ln()).exp(), q.powf(kf)))
            }
            Generator::Mpq { p, q } => {
                let (hi, lo) = ordered(*p, *q);
                if hi < 1.0 {
                    return None;
                }
                let x = lo / hi;
                Some(((0.5 * kf * (kf - 1.0) * hi.ln() - kf * (-x).ln_1p()).exp(), hi.powf(kf)))
            }
            Generator::Factorial => {
                // (n+k)!/n! <= (n+k)^k, majorised by c·2^n
                let c = (0..=(4 * k + 64))
                    .map(|n| kf * ((n + k) as f64).ln() - n as f64 * 2f64.ln())
                    .fold(0.0_f64, f64::max)
                    .exp();
                Some((c, 2.0))
            }
            Generator::Custom => None,
            Generator::Product(a, b) => {
                let (ca, ga) = a.shift_ratio_bound(k)?;
                let (cb, gb) = b.shift_ratio_bound(k)?;
                Some((ca * cb, ga * gb))
            }
        }
    }
}

pub fn moment_sequence(kind: SequenceKind, params: &QParams) -> Result<MomentSequence> {
    let q = params.q();
    let need_q = || -> Result<()> {
        if q > 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("this sequence needs q > 1, got {q}")))
        }
    };
    match kind {
        SequenceKind::M1 => {
            need_q()?;
            Ok(MomentSequence {
                kind,
                gen: Generator::M1 { log_q: q.ln() },
                table: Arc::from(Vec::new()),
            })
        }
        SequenceKind::M2 => {
            need_q()?;
            Ok(MomentSequence::tabled(kind, Generator::M2 { q }))
        }
        SequenceKind::Mpq => {
            let p = params
                .p()
                .ok_or_else(|| Error::InvalidParameter("m_pq needs p as well as q".into()))?;
            check_pair(p, q)?;
            Ok(MomentSequence::tabled(kind, Generator::Mpq { p, q }))
        }
        SequenceKind::Factorial => Ok(MomentSequence::tabled(kind, Generator::Factorial)),
        SequenceKind::Custom | SequenceKind::Product => Err(Error::InvalidParameter(
            "custom and product sequences are built with MomentSequence::custom/product".into(),
        )),
    }
}

/// `ω_M(t)` together with the index attaining it.
pub fn omega_weight_argmax(m: &MomentSequence, t: f64, n_cap: usize) -> Result<(f64, usize)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("ω_M needs finite t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok((0.0, 0));
    }
    let lt = t.ln();
    let term = |n: usize| n as f64 * lt - m.log_at(n);
    if m.is_structurally_log_convex() {
        let mut best = 0.0;
        let mut arg = 0;
        let mut n = 0;
        loop {
            if n >= n_cap {
                return Err(Error::NCapReached { n_cap });
            }
            let next = term(n + 1);
            if next < best {
                return Ok((best, arg));
            }
            n += 1;
            if next > best {
                best = next;
                arg = n;
            } else {
                // tie: remember the later index only for reporting
                arg = n;
            }
        }
    }
    let mut best = 0.0;
    let mut arg = 0;
    for n in 1..=n_cap {
        let v = term(n);
        if v > best {
            best = v;
            arg = n;
        }
    }
    if arg == n_cap {
        return Err(Error::NCapReached { n_cap });
    }
    Ok((best, arg))
}

/// `ω_M(t) = sup_n log(t^n / m(n))`.
pub fn omega_weight(m: &MomentSequence, t: f64, n_cap: usize) -> Result<f64> {
    omega_weight_argmax(m, t, n_cap).map(|(v, _)| v)
}

pub const DEFAULT_N_CAP: usize = 100_000;

/// `ω_M` bound to a sequence and an index cap.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    base: MomentSequence,
    n_cap: usize,
}

impl WeightFunction {
    pub fn new(base: MomentSequence) -> Self {
        WeightFunction { base, n_cap: DEFAULT_N_CAP }
    }

    pub fn with_n_cap(base: MomentSequence, n_cap: usize) -> Self {
        WeightFunction { base, n_cap }
    }

    pub fn base(&self) -> &MomentSequence {
        &self.base
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        omega_weight(&self.base, t, self.n_cap)
    }
}

/// `m(n)^2 <= m(n-1) m(n+1)` for `1 <= n < n_max`, compared in log domain
/// with relative slack `1e-13`.
pub fn check_log_convex(m: &MomentSequence, n_max: usize) -> bool {
    (1..n_max).all(|n| {
        let lhs = 2.0 * m.log_at(n);
        let rhs = m.log_at(n - 1) + m.log_at(n + 1);
        lhs <= rhs + 1e-13 * lhs.abs().max(rhs.abs()).max(1.0)
    })
}

const SUBMULT_N_CAP: usize = 1 << 16;

/// `ω_{M1 M2}(r) <= ω_{M1}(s) + ω_{M2}(r/s)` over the grid.
pub fn check_weight_submultiplicativity(
    m1: &MomentSequence,
    m2: &MomentSequence,
    r_grid: &[f64],
    s_grid: &[f64],
) -> CheckReport {
    let prod = MomentSequence::product(m1, m2);
    check_weight_submultiplicativity_for(&prod, m1, m2, r_grid, s_grid)
}

/// As [`check_weight_submultiplicativity`] with an explicitly supplied
/// product sequence, e.g. `m_pq` against its factors.
pub fn check_weight_submultiplicativity_for(
    prod: &MomentSequence,
    m1: &MomentSequence,
    m2: &MomentSequence,
    r_grid: &[f64],
    s_grid: &[f64],
) -> CheckReport {
    let params = Params::new()
        .int("r_points", r_grid.len() as i64)
        .int("s_points", s_grid.len() as i64);
    let mut worst = 0.0_f64;
    let mut violations = 0usize;
    for &r in r_grid {
        for &s in s_grid {
            let eval = || -> Result<(f64, f64)> {
                let lhs = omega_weight(prod, r, SUBMULT_N_CAP)?;
                let rhs = omega_weight(m1, s, SUBMULT_N_CAP)? + omega_weight(m2, r / s, SUBMULT_N_CAP)?;
                Ok((lhs, rhs))
            };
            match eval() {
                Ok((lhs, rhs)) => {
                    let slack = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
                    let excess = lhs - rhs;
                    if excess > slack {
                        violations += 1;
                    }
                    worst = worst.max(excess.max(0.0));
                }
                Err(e) => {
                    return CheckReport::failure(
                        "qcore.weight_submultiplicativity",
                        params.num("r", r).num("s", s),
                        &e,
                    )
                }
            }
        }
    }
    let mut rep = CheckReport::identity(
        "qcore.weight_submultiplicativity",
        params.int("violations", violations as i64),
        0.0,
        worst,
        0.0,
        1e-12,
    );
    rep.pass &= violations == 0;
    rep
}
