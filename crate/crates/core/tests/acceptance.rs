//! Acceptance criteria 1 to 8, one pass/fail line each.
//!
//! Identity checks must meet their threshold outright (`rel_err < tol`); the
//! error-estimate allowance of `CheckReport::pass` is not used here.

use std::time::{Duration, Instant};

use qmoment::report::CheckReport;
use qmoment::suite::{run_suite, thresholds, RunConfig, Suite, SuiteSelection};

struct Outcome {
    ok: bool,
    detail: String,
}

fn strict(checks: &[&CheckReport], tol_of: impl Fn(&CheckReport) -> Option<f64>) -> (usize, f64, Vec<String>) {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for c in checks {
        match tol_of(c) {
            Some(tol) => {
                worst = worst.max(c.rel_err / tol);
                if !(c.rel_err < tol) || !c.pass {
                    bad.push(format!("{} (rel {:.2e}, tol {:.0e})", c.check_id, c.rel_err, tol));
                }
            }
            None => {
                if !c.pass {
                    bad.push(format!("{} ({} violations)", c.check_id, c.rel_err));
                }
            }
        }
    }
    (checks.len(), worst, bad)
}

fn judge(checks: &[&CheckReport], tol_of: impl Fn(&CheckReport) -> Option<f64>, elapsed: Duration, limit: Duration) -> Outcome {
    let (n, worst, bad) = strict(checks, tol_of);
    let in_time = elapsed <= limit;
    let mut detail = format!(
        "{n} checks, worst rel/tol {worst:.2e}, {:.1} s (limit {} s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    if !bad.is_empty() {
        detail += &format!(", failing: {}", bad.join("; "));
    }
    Outcome { ok: n > 0 && bad.is_empty() && in_time, detail }
}

fn with_prefix<'a>(all: &'a [CheckReport], prefix: &str) -> Vec<&'a CheckReport> {
    all.iter().filter(|c| c.check_id.starts_with(prefix)).collect()
}

fn timed(config: &RunConfig, suite: Suite) -> (Vec<CheckReport>, Duration) {
    let t = Instant::now();
    let r = run_suite(config, suite).expect("valid configuration");
    (r, t.elapsed())
}

fn k_of(c: &CheckReport) -> i64 {
    c.params.get("k").and_then(|v| v.as_i64()).unwrap_or(0)
}

fn main() {
    // behave like a harness under name filters and `--list`
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let config = RunConfig { k_max: 2, ..RunConfig::default() };
    let mut lines = Vec::new();
    let mut first_pass = Vec::new();

    // 1 and 2: one run of the special suite covers both identities
    let (special, t) = timed(&config, Suite::Special);
    let fe = with_prefix(&special, "special.theta_functional_equation");
    let rec = with_prefix(&special, "special.reciprocal_identity");
    let q_count = fe.iter().filter(|c| c.check_id.ends_with("m=0")).count();
    let mut c1 = judge(&fe, |_| Some(thresholds::FUNCTIONAL_EQUATION), t, Duration::from_secs(5));
    c1.ok &= fe.len() == 7 * q_count && q_count >= 3;
    lines.push((1, "Θ_q functional equation, q ∈ {1.5, 2, 3}, m ∈ −3..3, 50 z each", c1));
    lines.push((2, "reciprocal identity, 100 samples per q", judge(&rec, |_| Some(thresholds::RECIPROCAL), t, Duration::from_secs(2))));
    first_pass.extend(special);

    // 3
    let (moments, t) = timed(&config, Suite::Moments);
    let all: Vec<&CheckReport> = moments.iter().collect();
    let c3 = judge(
        &all,
        |c| if c.check_id.contains("_direction") { None } else { Some(thresholds::MOMENTS) },
        t,
        Duration::from_secs(30),
    );
    lines.push((3, "moment integrals m1, m2 for n ≤ 10, q ∈ {1.5, 2}, three directions", c3));
    first_pass.extend(moments);

    // 4
    let (cauchy, t) = timed(&config, Suite::Cauchy);
    let all: Vec<&CheckReport> = cauchy.iter().collect();
    let mut c4 = judge(&all, |_| Some(thresholds::CAUCHY), t, Duration::from_secs(60));
    c4.ok &= cauchy.len() == 2 && cauchy.iter().all(|c| c.params.get("triples").and_then(|v| v.as_i64()) == Some(30));
    lines.push((4, "Cauchy kernels, 30 triples each", c4));
    first_pass.extend(cauchy);

    // 5
    let (theorems, t) = timed(&config, Suite::Theorems);
    let all: Vec<&CheckReport> = theorems.iter().collect();
    let c5 = judge(
        &all,
        |c| {
            if c.check_id.starts_with("theorems.pq_branch") {
                Some(thresholds::BRANCH)
            } else if k_of(c) >= 2 {
                Some(thresholds::THEOREM_K2)
            } else {
                Some(thresholds::THEOREM)
            }
        },
        t,
        Duration::from_secs(600),
    );
    lines.push((5, "integral representations over the corpus, k ≤ 2, with p = 0 and p = 1 branches", c5));

    // 6
    let (kernel, t) = timed(&config, Suite::Kernel);
    let pair = |c: &&CheckReport| c.check_id.contains("p=3 q=2");
    let fac: Vec<&CheckReport> = with_prefix(&kernel, "kernel.moment_factorized").into_iter().filter(pair).collect();
    let conv: Vec<&CheckReport> = with_prefix(&kernel, "kernel.moment_convolved").into_iter().filter(pair).collect();
    let agree: Vec<&CheckReport> = with_prefix(&kernel, "kernel.moment_paths_agree").into_iter().filter(pair).collect();
    let op_t: Vec<&CheckReport> = with_prefix(&kernel, "kernel.operator_t").into_iter().filter(pair).collect();
    let limit = Duration::from_secs(1200);
    let parts = [
        judge(&fac, |_| Some(thresholds::FACTORIZED), t, limit),
        judge(&conv, |_| Some(thresholds::CONVOLVED), t, limit),
        judge(&agree, |_| None, t, limit),
        judge(&op_t, |_| Some(thresholds::OPERATOR_T), t, limit),
    ];
    let counts_ok = fac.len() == 6 && conv.len() == 6 && agree.len() == 6 && op_t.len() >= 12;
    let c6 = Outcome {
        ok: counts_ok && parts.iter().all(|o| o.ok),
        detail: format!(
            "factorized: {}; convolved: {}; agreement: {}; T(u^n): {}",
            parts[0].detail, parts[1].detail, parts[2].detail, parts[3].detail
        ),
    };
    lines.push((6, "(p,q) = (3,2) moments via the convolution kernel and the operator T", c6));
    first_pass.extend(kernel);

    // 7
    let (bounds, t) = timed(&config, Suite::Bounds);
    let all: Vec<&CheckReport> = bounds.iter().collect();
    let mut c7 = judge(&all, |_| None, t, Duration::from_secs(60));
    let has = |p: &str| bounds.iter().any(|c| c.check_id.starts_with(p));
    let positive = with_prefix(&bounds, "bounds.theta_lower").iter().all(|c| c.param_f64("Delta_hat").is_some_and(|d| d > 0.0));
    let grid = with_prefix(&bounds, "bounds.weight_product")
        .iter()
        .all(|c| c.params.get("r_points").and_then(|v| v.as_i64()).unwrap_or(0) * c.params.get("s_points").and_then(|v| v.as_i64()).unwrap_or(0) == 16);
    c7.ok &= positive
        && grid
        && [
            "bounds.theta_delta_independence",
            "bounds.eq_growth",
            "bounds.expq",
            "bounds.cq_limit",
            "bounds.weight_product",
        ]
        .iter()
        .all(|p| has(p));
    lines.push((7, "bounds certificates: Θ lower bound, E_q growth, exp_q bounds, c(q), weight product", c7));
    first_pass.extend(bounds);

    // 8: rerun everything except the theorem suite and compare bytes
    let rerun_config = RunConfig { suites: SuiteSelection { theorems: false, ..SuiteSelection::default() }, ..config.clone() };
    first_pass.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    let again = run_suite(&rerun_config, Suite::All).expect("valid configuration");
    let a = serde_json::to_string_pretty(&first_pass).unwrap();
    let b = serde_json::to_string_pretty(&again).unwrap();
    let c8 = Outcome {
        ok: a == b && !first_pass.is_empty(),
        detail: format!("{} reports, {} bytes, identical: {}", again.len(), b.len(), a == b),
    };
    lines.push((8, "reports byte-identical across reruns", c8));

    let mut failed = Vec::new();
    for (n, what, o) in &lines {
        println!("criterion {n}: {} | {what} | {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed.push(*n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
