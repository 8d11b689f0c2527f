use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qmoment::report::CheckReport;
use qmoment::suite::{eval_point, run_suite, AlphaPolicy, EvalTarget, RunConfig, Suite};
use qmoment::Complex64;

/// Caps the worker threads used by the quadrature.
const THREADS_VAR: &str = "QMOMENT_THREADS";

#[derive(Parser)]
#[command(name = "qmoment", version, about = "Verification driver for q-calculus identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a JSON report.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Evaluate one function at a point.
    Eval {
        #[arg(long)]
        target: String,
        /// Complex point as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Render a saved report as a table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    tol_series: Option<f64>,
    #[arg(long)]
    tol_quad: Option<f64>,
    #[arg(long)]
    eps_contour: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    /// `estimate` or a fixed value.
    #[arg(long)]
    alpha_policy: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigFlags {
    fn apply(&self, mut c: RunConfig) -> Result<RunConfig> {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(q, p, tol_series, tol_quad, eps_contour, margin, k_max, seed);
        if let Some(a) = &self.alpha_policy {
            c.alpha_policy = match a.as_str() {
                "estimate" => AlphaPolicy::Estimate,
                v => AlphaPolicy::Fixed(v.parse().with_context(|| format!("bad --alpha-policy {v:?}"))?),
            };
        }
        Ok(c)
    }
}

fn load_config(path: Option<&PathBuf>, flags: &ConfigFlags) -> Result<RunConfig> {
    let base = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    let c = flags.apply(base)?;
    c.validate()?;
    Ok(c)
}

fn parse_z(s: &str) -> Result<Complex64> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().with_context(|| format!("bad real part in {s:?}"))?;
    let im: f64 = im.trim().parse().with_context(|| format!("bad imaginary part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

fn render_report(config: &RunConfig, checks: &[CheckReport]) -> Result<String> {
    let doc = serde_json::json!({ "config": config, "checks": checks });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn table(checks: &[CheckReport]) -> String {
    let width = checks.iter().map(|c| c.check_id.len()).max().unwrap_or(8).max(8);
    let mut out = format!("{:<width$}  {:<4}  {:>10}  {:>10}\n", "check_id", "pass", "rel_err", "estimate");
    for c in checks {
        let pass = if c.pass { "ok" } else { "FAIL" };
        out += &format!("{:<width$}  {:<4}  {:>10.3e}  {:>10.3e}\n", c.check_id, pass, c.rel_err, c.error_estimate);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out += &format!("{} checks, {} failed\n", checks.len(), failed);
    out
}

fn cap_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_VAR} must be a positive integer"))?;
        if n == 0 {
            bail!("{THREADS_VAR} must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    cap_threads()?;
    match cli.command {
        Command::Check { suite, config, report, flags } => {
            let suite = Suite::parse(&suite)?;
            let config = load_config(config.as_ref(), &flags)?;
            let checks = run_suite(&config, suite)?;
            let text = render_report(&config, &checks)?;
            match report {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                    eprint!("{}", table(&checks));
                }
                None => print!("{text}"),
            }
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Eval { target, z, config, flags } => {
            let target = EvalTarget::parse(&target)?;
            let config = load_config(config.as_ref(), &flags)?;
            let z = parse_z(&z)?;
            let r = eval_point(&config, target, z)?;
            println!("target      {}", r.target);
            println!("z           {} {:+}i", r.z.re, r.z.im);
            println!("value       {:.16e} {:+.16e}i", r.value.re, r.value.im);
            println!("work        {}", r.work);
            println!("error_bound {:.3e}", r.error_bound);
            Ok(true)
        }
        Command::Report { input } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc: serde_json::Value = serde_json::from_str(&text)?;
            let checks = doc
                .get("checks")
                .cloned()
                .ok_or_else(|| anyhow!("{} has no checks array", input.display()))?;
            let checks: Vec<CheckReport> = serde_json::from_value(checks)?;
            print!("{}", table(&checks));
            Ok(checks.iter().all(|c| c.pass))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
