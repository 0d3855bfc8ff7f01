//! The `bernstein-convex` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 verification failure.

pub mod cache;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::Parser;
use serde_json::{json, Value};

use crate::error::Result;
use crate::limits::{
    boundedness_report, build_sequence_with, extrapolate_limit, ls_inequality_check,
    oq2_scaled_error, timed_solve, RowSolver, SequenceTable, SweepMode, TimedSolve,
};
use crate::options::{noise_floor, SolverOptions};
use crate::scalar::Scalar;
use crate::target::TargetSpec;

use cache::Cache;
use config::{Cli, CommandKind, Format, RunConfig};
use output::{fmt_param, fmt_value, render_csv, render_json, Emission};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Absolute slack of the ordering checks.
const ORDERING_SLACK: f64 = 1e-15;
/// Absolute slack of `E_n <= E_n^(+2)`.
const NESTING_SLACK: f64 = 1e-12;
/// Relative slack of the even-pairing and scaling-law checks.
const PAIRING_REL: f64 = 1e-10;
const SCALING_REL: f64 = 1e-10;
/// Relative slack of the Leviatan-Shevchuk check.
const LS_REL: f64 = 1e-8;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (kind, args) = cli.command.split();
    let config = match RunConfig::from_args(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

/// Runs a validated configuration, writes its output, returns the exit code.
pub fn execute(config: &RunConfig) -> Result<i32> {
    let cache = match &config.cache_dir {
        Some(dir) => Some(Cache::open(dir)?),
        None => None,
    };
    let solver = |f: &TargetSpec, n: usize, c: bool, o: &SolverOptions| -> TimedSolve {
        match &cache {
            Some(cache) => cache.solve(f, n, c, o),
            None => timed_solve(f, n, c, o),
        }
    };
    let (emission, code) = match config.command {
        CommandKind::Approx | CommandKind::ApproxConvex => cmd_approx(config, &solver)?,
        CommandKind::Sequence => cmd_sequence(config, &solver)?,
        CommandKind::Oq2 => cmd_oq2(config, &solver)?,
        CommandKind::Verify => cmd_verify(config, &solver)?,
    };
    let text = match (config.command, config.format) {
        (_, Format::Json) => render_json(config, &emission),
        (CommandKind::Verify, Format::Csv) => emission.comments.join("\n") + "\n",
        (_, Format::Csv) => render_csv(&emission),
    };
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(cache) = &cache {
        eprintln!("cache: {} hits, {} solved", cache.hits(), cache.misses());
    }
    Ok(code)
}

fn target(lambda: &Scalar, half_width: &Scalar) -> Result<TargetSpec> {
    TargetSpec::abs_pow(lambda.clone())?.with_half_width(half_width.clone())
}

fn sweep_mode(config: &RunConfig, strict: bool) -> SweepMode {
    SweepMode {
        strict,
        execution: config.execution(),
    }
}

fn table_for(
    config: &RunConfig,
    solver: &RowSolver<'_>,
    f: &TargetSpec,
    constrained: bool,
    strict: bool,
) -> Result<SequenceTable> {
    build_sequence_with(
        f,
        config.n_min,
        config.n_max,
        constrained,
        &config.solver_options(),
        sweep_mode(config, strict),
        solver,
    )
}

fn status_code(rows_failed: usize) -> i32 {
    if rows_failed > 0 {
        EXIT_SOLVER
    } else {
        EXIT_OK
    }
}

fn cmd_approx(config: &RunConfig, solver: &RowSolver<'_>) -> Result<(Emission, i32)> {
    let mut e = Emission::default();
    let a = &config.parsed.half_widths[0];
    for lambda in &config.parsed.lambdas {
        let t = table_for(config, solver, &target(lambda, a)?, config.constrained, true)?;
        e.rows.extend(t.rows);
    }
    let failed = e.rows.iter().filter(|r| !r.is_ok()).count();
    e.report = json!({ "failed_rows": failed });
    Ok((e, status_code(failed)))
}

fn cmd_sequence(config: &RunConfig, solver: &RowSolver<'_>) -> Result<(Emission, i32)> {
    let mut e = Emission::default();
    let mut reports = Vec::new();
    let a = &config.parsed.half_widths[0];
    let stability = Scalar::from_f64(config.stability);
    for lambda in &config.parsed.lambdas {
        let t = table_for(config, solver, &target(lambda, a)?, config.constrained, config.strict)?;
        let label = format!(
            "lambda={} constrained={} fast_path={}",
            fmt_param(lambda),
            u8::from(t.constrained),
            u8::from(t.fast_path)
        );
        e.comments.push(label.clone());

        let bounded = match boundedness_report(&t) {
            Ok(b) => {
                e.comments.push(format!(
                    "boundedness: sup={} at n={} tail_increase_ratio={}",
                    fmt_value(&b.sup),
                    b.sup_at,
                    fmt_value(&b.tail_increase_ratio)
                ));
                json!({
                    "sup": fmt_value(&b.sup),
                    "sup_at": b.sup_at,
                    "tail_increase_ratio": fmt_value(&b.tail_increase_ratio),
                })
            }
            Err(err) => {
                e.comments.push(format!("boundedness: not available: {err}"));
                json!({ "error": err.to_string() })
            }
        };

        let extrap = match extrapolate_limit(
            &t,
            config.model_order,
            &config.parsed.windows,
            config.method,
            &stability,
        ) {
            Ok(r) => {
                let mut line = format!(
                    "extrapolation: method={} k={}",
                    json!(r.method).as_str().unwrap_or_default(),
                    r.model_order
                );
                for w in &r.estimates {
                    line.push_str(&format!(
                        "\nwindow {} (n={:?}): estimate={}",
                        w.window,
                        w.degrees,
                        fmt_value(&w.estimate)
                    ));
                }
                line.push_str(&format!(
                    "\nspread={} median={} stable={}",
                    fmt_value(&r.spread),
                    fmt_value(&r.median),
                    if r.stable { "yes" } else { "no" }
                ));
                e.comments.push(line);
                json!({
                    "method": r.method,
                    "model_order": r.model_order,
                    "estimates": r.estimates.iter().map(|w| json!({
                        "window": w.window,
                        "degrees": w.degrees,
                        "estimate": fmt_value(&w.estimate),
                    })).collect::<Vec<_>>(),
                    "spread": fmt_value(&r.spread),
                    "median": fmt_value(&r.median),
                    "stability_threshold": config.stability,
                    "stable": r.stable,
                })
            }
            Err(err) => {
                e.comments.push(format!("extrapolation: rejected: {err}"));
                json!({ "error": err.to_string() })
            }
        };
        reports.push(json!({
            "lambda": fmt_param(lambda),
            "constrained": t.constrained,
            "fast_path": t.fast_path,
            "failed_rows": t.failed(),
            "boundedness": bounded,
            "extrapolation": extrap,
        }));
        e.rows.extend(t.rows);
    }
    let failed = e.rows.iter().filter(|r| !r.is_ok()).count();
    e.report = Value::Array(reports);
    Ok((e, status_code(failed)))
}

/// `|x - y| / y`, or 0 when both are at round-off level.
fn relative_deviation(x: &Scalar, y: &Scalar) -> Scalar {
    let floor = noise_floor(&Scalar::one());
    if x.abs() <= floor && y.abs() <= floor {
        return Scalar::zero();
    }
    (x - y).abs() / &y.abs()
}

fn cmd_oq2(config: &RunConfig, solver: &RowSolver<'_>) -> Result<(Emission, i32)> {
    let mut e = Emission::default();
    let mut report = Vec::new();
    let one = Scalar::one();
    for lambda in &config.parsed.lambdas {
        let base = table_for(config, solver, &target(lambda, &one)?, true, true)?;
        for a in &config.parsed.half_widths {
            let t = table_for(config, solver, &target(lambda, a)?, true, true)?;
            let factor = a.powf(lambda);
            for r in &t.rows {
                let (Some(ea), Some(b)) = (&r.e_upper, base.row(r.n).and_then(|b| b.e_upper.as_ref())) else {
                    continue;
                };
                let dev = relative_deviation(ea, &(&factor * b));
                e.comments.push(format!(
                    "lambda={} a={} n={}: |E(a) - a^lambda E(1)| / (a^lambda E(1)) = {}",
                    fmt_param(lambda),
                    fmt_param(a),
                    r.n,
                    fmt_value(&dev)
                ));
                report.push(json!({
                    "lambda": fmt_param(lambda),
                    "half_width": fmt_param(a),
                    "n": r.n,
                    "scaling_law_deviation": fmt_value(&dev),
                }));
            }
            e.rows.extend(t.rows);
        }
    }
    let failed = e.rows.iter().filter(|r| !r.is_ok()).count();
    e.report = Value::Array(report);
    Ok((e, status_code(failed)))
}

struct Check {
    pass: bool,
    name: String,
    detail: String,
    margin: Scalar,
}

impl Check {
    fn line(&self) -> String {
        format!(
            "{} {} {} margin={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.margin.to_sci(6)
        )
    }
}

/// `lhs <= rhs`, reported with margin `rhs - lhs`.
fn le_check(name: &str, detail: String, lhs: &Scalar, rhs: &Scalar) -> Check {
    let margin = rhs - lhs;
    Check {
        pass: !margin.is_negative(),
        name: name.to_string(),
        detail,
        margin,
    }
}

fn bounds(t: &SequenceTable, n: usize) -> Option<(&Scalar, &Scalar)> {
    let r = t.row(n)?;
    Some((r.e_lower.as_ref()?, r.e_upper.as_ref()?))
}

fn ordering_checks(t: &SequenceTable, kind: &str, out: &mut Vec<Check>) {
    let slack = Scalar::from_f64(ORDERING_SLACK);
    let lam = fmt_param(t.lambda());
    for r in &t.rows {
        let (Some((_, up)), Some((lo_next, _))) = (bounds(t, r.n), bounds(t, r.n + 1)) else {
            continue;
        };
        out.push(le_check(
            &format!("ordering/{kind}"),
            format!("lambda={lam} n={}->{}", r.n, r.n + 1),
            lo_next,
            &(up + &slack),
        ));
    }
}

fn cmd_verify(config: &RunConfig, solver: &RowSolver<'_>) -> Result<(Emission, i32)> {
    let opts = config.solver_options();
    let one = Scalar::one();
    let mut checks: Vec<Check> = Vec::new();
    let mut failed_rows = 0;
    for lambda in &config.parsed.lambdas {
        let f = target(lambda, &one)?;
        let lam = fmt_param(lambda);
        let plain = table_for(config, solver, &f, false, true)?;
        failed_rows += plain.failed();
        ordering_checks(&plain, "unconstrained", &mut checks);
        let convex = if f.is_convex() {
            let t = table_for(config, solver, &f, true, true)?;
            failed_rows += t.failed();
            ordering_checks(&t, "constrained", &mut checks);
            for n in config.degrees() {
                if let (Some((lo, _)), Some((_, up))) = (bounds(&plain, n), bounds(&t, n)) {
                    checks.push(le_check(
                        "nesting",
                        format!("lambda={lam} n={n}"),
                        lo,
                        &(up + &Scalar::from_f64(NESTING_SLACK)),
                    ));
                }
            }
            Some(t)
        } else {
            None
        };

        if f.is_even() {
            for t in std::iter::once(&plain).chain(convex.as_ref()) {
                let kind = if t.constrained { "constrained" } else { "unconstrained" };
                for n in config.degrees().filter(|n| n % 2 == 0) {
                    let (Some((lo0, up0)), Some((lo1, up1))) = (bounds(t, n), bounds(t, n + 1)) else {
                        continue;
                    };
                    // The two brackets must come within the relative slack of each other.
                    let gap = (lo0 - up1).max(lo1 - up0);
                    let allowed = &Scalar::from_f64(PAIRING_REL) * up0 + &noise_floor(up0);
                    checks.push(le_check(
                        &format!("pairing/{kind}"),
                        format!("lambda={lam} n={n},{}", n + 1),
                        &gap,
                        &allowed,
                    ));
                }
            }
        }

        if *lambda >= Scalar::from_i64(2) {
            for n in config.degrees().filter(|n| *n >= 2) {
                match ls_inequality_check(&f, n, &opts) {
                    Ok(c) => {
                        let rhs = &c.rhs * &(Scalar::one() + &Scalar::from_f64(LS_REL)) + &noise_floor(&c.rhs);
                        checks.push(le_check(
                            "leviatan-shevchuk",
                            format!("lambda={lam} n={n} ratio={}", c.ratio.to_sci(6)),
                            &c.lhs,
                            &rhs,
                        ));
                    }
                    Err(err) => {
                        eprintln!("leviatan-shevchuk lambda={lam} n={n}: {err}");
                        failed_rows += 1;
                    }
                }
            }
        }

        if let Some(base) = &convex {
            for a in config.parsed.half_widths.iter().filter(|a| **a != one) {
                let factor = a.powf(lambda);
                for n in config.degrees() {
                    let Some((_, b)) = bounds(base, n) else { continue };
                    match oq2_scaled_error(&f, a, n, &opts) {
                        Ok((_, ea)) => {
                            let dev = relative_deviation(&ea, &(&factor * b));
                            checks.push(le_check(
                                "oq2-scaling",
                                format!("lambda={lam} a={} n={n}", fmt_param(a)),
                                &dev,
                                &Scalar::from_f64(SCALING_REL),
                            ));
                        }
                        Err(err) => {
                            eprintln!("oq2 lambda={lam} a={} n={n}: {err}", fmt_param(a));
                            failed_rows += 1;
                        }
                    }
                }
            }
        }
    }

    let failures = checks.iter().filter(|c| !c.pass).count();
    let mut e = Emission::default();
    e.comments = checks.iter().map(Check::line).collect();
    e.comments.push(format!(
        "{} checks, {} failed, {} solver failures",
        checks.len(),
        failures,
        failed_rows
    ));
    e.report = json!({
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "detail": c.detail,
            "pass": c.pass,
            "margin": c.margin.to_sci(6),
        })).collect::<Vec<_>>(),
        "failed": failures,
        "solver_failures": failed_rows,
    });
    let code = if failed_rows > 0 {
        EXIT_SOLVER
    } else if failures > 0 {
        EXIT_VERIFY
    } else {
        EXIT_OK
    };
    Ok((e, code))
}
