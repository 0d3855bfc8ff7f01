//! Scaled error sequences `n^lambda * E_n`, their extrapolated limits, and
//! the cross-checks run on them.

use std::ops::RangeInclusive;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::convex::{best_convex_approx, en_convex_value, ConvexApproxResult};
use crate::error::{Error, Result};
use crate::options::{noise_floor, SolverOptions};
use crate::remez::{best_approx, ApproxResult};
use crate::scalar::Scalar;
use crate::sweep::{map_items, Execution};
use crate::target::{TargetKind, TargetSpec};

/// Highest degree at which the even fast path still solves every row.
pub const PAIRING_CHECK_MAX_DEGREE: usize = 7;

/// Relative tolerance of the even-pairing test `|E_2m - E_2m+1| <= tol * E_2m`.
pub const PAIRING_TOL: f64 = 1e-10;

/// Default `stable` threshold relative to the median estimate.
pub const DEFAULT_STABILITY: f64 = 1e-3;

/// Outcome of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Solve {
    Unconstrained(ApproxResult),
    Convex(ConvexApproxResult),
}

impl Solve {
    pub fn error_lower(&self) -> &Scalar {
        match self {
            Solve::Unconstrained(r) => &r.error_lower,
            Solve::Convex(r) => &r.error_lower,
        }
    }

    pub fn error_upper(&self) -> &Scalar {
        match self {
            Solve::Unconstrained(r) => &r.error_upper,
            Solve::Convex(r) => &r.error_upper,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Solve::Unconstrained(r) => r.iterations,
            Solve::Convex(r) => r.cut_rounds,
        }
    }
}

/// Remez for `constrained = false`, the convex solver otherwise.
pub fn solve(f: &TargetSpec, n: usize, constrained: bool, opts: &SolverOptions) -> Result<Solve> {
    if constrained {
        best_convex_approx(f, n, opts).map(Solve::Convex)
    } else {
        best_approx(f, n, opts).map(Solve::Unconstrained)
    }
}

/// A solve together with its wall time in milliseconds.
#[derive(Debug)]
pub struct TimedSolve {
    pub outcome: Result<Solve>,
    pub wall_ms: u64,
}

/// Signature of the per-row solver used by [`build_sequence_with`]; the CLI
/// plugs its cache in here.
pub type RowSolver<'a> = dyn Fn(&TargetSpec, usize, bool, &SolverOptions) -> TimedSolve + Sync + 'a;

pub fn timed_solve(f: &TargetSpec, n: usize, constrained: bool, opts: &SolverOptions) -> TimedSolve {
    let start = Instant::now();
    let outcome = solve(f, n, constrained, opts);
    TimedSolve {
        outcome,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: usize,
    pub lambda: Scalar,
    pub half_width: Scalar,
    pub constrained: bool,
    pub e_lower: Option<Scalar>,
    pub e_upper: Option<Scalar>,
    pub scaled_lower: Option<Scalar>,
    pub scaled_upper: Option<Scalar>,
    /// Unconstrained rows only.
    pub equioscillation_ratio: Option<Scalar>,
    /// Constrained rows only: `min P''` of the stored polynomial.
    pub convexity_slack: Option<Scalar>,
    pub iterations: Option<usize>,
    pub status: RowStatus,
    pub wall_ms: u64,
    /// Set when the row was copied from the even degree `n - 1`.
    pub paired_from: Option<usize>,
    pub message: Option<String>,
}

impl SequenceRow {
    pub fn from_solve(f: &TargetSpec, n: usize, constrained: bool, timed: &TimedSolve) -> Self {
        let mut row = SequenceRow {
            n,
            lambda: f.exponent().clone(),
            half_width: f.half_width().clone(),
            constrained,
            e_lower: None,
            e_upper: None,
            scaled_lower: None,
            scaled_upper: None,
            equioscillation_ratio: None,
            convexity_slack: None,
            iterations: None,
            status: RowStatus::Failed,
            wall_ms: timed.wall_ms,
            paired_from: None,
            message: None,
        };
        match &timed.outcome {
            Ok(s) => {
                row.set_errors(s.error_lower().clone(), s.error_upper().clone());
                row.iterations = Some(s.iterations());
                match s {
                    Solve::Unconstrained(r) => {
                        row.equioscillation_ratio = Some(r.equioscillation_ratio.clone())
                    }
                    Solve::Convex(r) => row.convexity_slack = Some(r.stored_convexity()),
                }
                row.status = RowStatus::Ok;
            }
            Err(e) => row.message = Some(e.to_string()),
        }
        row
    }

    fn set_errors(&mut self, lower: Scalar, upper: Scalar) {
        let w = scale_factor(self.n, &self.lambda);
        self.scaled_lower = Some(&w * &lower);
        self.scaled_upper = Some(&w * &upper);
        self.e_lower = Some(lower);
        self.e_upper = Some(upper);
    }

    /// The row for degree `n + 1` carrying this row's errors.
    fn paired_copy(&self) -> Self {
        let mut row = self.clone();
        row.n = self.n + 1;
        row.wall_ms = 0;
        row.paired_from = Some(self.n);
        if let (Some(lo), Some(up)) = (self.e_lower.clone(), self.e_upper.clone()) {
            row.set_errors(lo, up);
        }
        row
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

/// `n^lambda`, with `0^lambda = 0`.
fn scale_factor(n: usize, lambda: &Scalar) -> Scalar {
    if n == 0 {
        return Scalar::zero();
    }
    Scalar::from(n).powf(lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTable {
    pub target: TargetSpec,
    pub constrained: bool,
    /// True when odd degrees were copied from the even degree below.
    pub fast_path: bool,
    pub rows: Vec<SequenceRow>,
}

impl SequenceTable {
    pub fn lambda(&self) -> &Scalar {
        self.target.exponent()
    }

    pub fn ok_rows(&self) -> impl Iterator<Item = &SequenceRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }

    pub fn row(&self, n: usize) -> Option<&SequenceRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// A table built from given scaled values, for exercising the reports.
    pub fn synthetic(lambda: Scalar, scaled: &[(usize, Scalar)]) -> Result<Self> {
        let target = TargetSpec::abs_pow(lambda.clone())?;
        let rows = scaled
            .iter()
            .map(|(n, s)| {
                let w = scale_factor(*n, &lambda);
                let e = if w.is_zero() { Scalar::zero() } else { s / &w };
                SequenceRow {
                    n: *n,
                    lambda: lambda.clone(),
                    half_width: Scalar::one(),
                    constrained: false,
                    e_lower: Some(e.clone()),
                    e_upper: Some(e),
                    scaled_lower: Some(s.clone()),
                    scaled_upper: Some(s.clone()),
                    equioscillation_ratio: None,
                    convexity_slack: None,
                    iterations: None,
                    status: RowStatus::Ok,
                    wall_ms: 0,
                    paired_from: None,
                    message: None,
                }
            })
            .collect();
        Ok(SequenceTable {
            target,
            constrained: false,
            fast_path: false,
            rows,
        })
    }
}

/// Sweep controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepMode {
    /// Solve every degree even for even targets.
    pub strict: bool,
    pub execution: Execution,
}

/// One row per `n` in `n_min..=n_max`, solved directly.
pub fn build_sequence(
    f: &TargetSpec,
    n_min: usize,
    n_max: usize,
    constrained: bool,
    opts: &SolverOptions,
) -> Result<SequenceTable> {
    build_sequence_with(f, n_min, n_max, constrained, opts, SweepMode::default(), &timed_solve)
}

/// [`build_sequence`] with explicit sweep controls and row solver.
///
/// For even targets outside strict mode, degrees up to
/// [`PAIRING_CHECK_MAX_DEGREE`] are all solved and every complete pair
/// `(2m, 2m+1)` among them is compared. If the pairs agree, the remaining
/// odd degrees are copied from the even degree below instead of solved.
pub fn build_sequence_with(
    f: &TargetSpec,
    n_min: usize,
    n_max: usize,
    constrained: bool,
    opts: &SolverOptions,
    mode: SweepMode,
    solver: &RowSolver<'_>,
) -> Result<SequenceTable> {
    if n_min > n_max {
        return Err(Error::InvalidInput(format!(
            "empty degree range {n_min}..{n_max}"
        )));
    }
    if constrained && !f.is_convex() {
        return Err(Error::NotConvex(format!("{f} is not convex on [-1, 1]")));
    }
    opts.validate()?;
    let solve_rows = |ns: &[usize]| {
        map_items(ns, mode.execution, |&n| {
            SequenceRow::from_solve(f, n, constrained, &solver(f, n, constrained, opts))
        })
    };

    let first_even = n_min + n_min % 2;
    let head_end = n_max.min(PAIRING_CHECK_MAX_DEGREE.max(first_even + 1));
    let all: Vec<usize> = (n_min..=n_max).collect();
    if mode.strict || !f.is_even() || head_end == n_max {
        return Ok(SequenceTable {
            target: f.clone(),
            constrained,
            fast_path: false,
            rows: solve_rows(&all),
        });
    }

    let head: Vec<usize> = (n_min..=head_end).collect();
    let mut rows = solve_rows(&head);
    if !pairs_agree(&rows) {
        let tail: Vec<usize> = (head_end + 1..=n_max).collect();
        rows.extend(solve_rows(&tail));
        return Ok(SequenceTable {
            target: f.clone(),
            constrained,
            fast_path: false,
            rows,
        });
    }

    // head_end is odd here, so every remaining odd degree has its partner.
    let tail: Vec<usize> = (head_end + 1..=n_max).filter(|n| n % 2 == 0).collect();
    let solved = solve_rows(&tail);
    let mut by_n: Vec<Option<SequenceRow>> = vec![None; n_max + 1];
    for r in rows.into_iter().chain(solved) {
        let n = r.n;
        by_n[n] = Some(r);
    }
    for n in head_end + 1..=n_max {
        if by_n[n].is_none() {
            let copy = by_n[n - 1].as_ref().map(SequenceRow::paired_copy);
            by_n[n] = copy;
        }
    }
    Ok(SequenceTable {
        target: f.clone(),
        constrained,
        fast_path: true,
        rows: by_n.into_iter().flatten().collect(),
    })
}

/// Every complete `(2m, 2m+1)` pair succeeded and agrees; at least one pair.
fn pairs_agree(rows: &[SequenceRow]) -> bool {
    let tol = Scalar::from_f64(PAIRING_TOL);
    let mut checked = 0;
    for w in rows.windows(2) {
        if w[0].n % 2 != 0 {
            continue;
        }
        let (Some(a), Some(b)) = (&w[0].e_upper, &w[1].e_upper) else {
            return false;
        };
        if (a - b).abs() > &tol * a + noise_floor(a) {
            return false;
        }
        checked += 1;
    }
    checked > 0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtrapolationMethod {
    Richardson,
    Aitken,
}

impl std::str::FromStr for ExtrapolationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(ExtrapolationMethod::Richardson),
            "aitken" => Ok(ExtrapolationMethod::Aitken),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    /// Inclusive degree window, e.g. `20..40`.
    pub window: String,
    /// Degrees actually used by the estimate.
    pub degrees: Vec<usize>,
    pub estimate: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    pub method: ExtrapolationMethod,
    pub model_order: usize,
    pub estimates: Vec<WindowEstimate>,
    pub spread: Scalar,
    pub median: Scalar,
    pub stability_threshold: Scalar,
    pub stable: bool,
}

/// Limit estimates of `scaled_upper` over each degree window.
///
/// Richardson fits `s + c_1/n + ... + c_k/n^k` through `k + 1` evenly spaced
/// rows of the window (both ends included) and evaluates the Neville
/// interpolant at `1/n = 0`. Aitken applies `k` rounds of the `Delta^2`
/// transform to all rows of the window. For even targets only rows with the
/// parity of the window start are used, since odd and even degrees form two
/// separate subsequences there.
pub fn extrapolate_limit(
    table: &SequenceTable,
    k: usize,
    windows: &[RangeInclusive<usize>],
    method: ExtrapolationMethod,
    stability: &Scalar,
) -> Result<ExtrapolationReport> {
    if k == 0 {
        return Err(Error::InvalidInput("model order must be at least 1".into()));
    }
    if windows.is_empty() {
        return Err(Error::InvalidInput("no extrapolation windows".into()));
    }
    let parity = table.target.is_even();
    let mut estimates = Vec::with_capacity(windows.len());
    for w in windows {
        let rows: Vec<(usize, Scalar, Option<Scalar>)> = table
            .ok_rows()
            .filter(|r| w.contains(&r.n) && (!parity || r.n % 2 == w.start() % 2))
            .filter_map(|r| r.scaled_upper.clone().map(|s| (r.n, s, r.scaled_lower.clone())))
            .collect();
        // A row whose lower bound is not positive may be a zero error.
        if let Some((n, _, _)) = rows
            .iter()
            .find(|(_, s, lo)| !s.is_positive() || !lo.as_ref().is_some_and(Scalar::is_positive))
        {
            return Err(Error::InvalidInput(format!(
                "scaled value at n = {n} is not certified positive"
            )));
        }
        let rows: Vec<(usize, Scalar)> = rows.into_iter().map(|(n, s, _)| (n, s)).collect();
        let label = format!("{}..{}", w.start(), w.end());
        if rows.len() < k + 2 {
            return Err(Error::InvalidInput(format!(
                "window {label} has {} usable rows, needs {}",
                rows.len(),
                k + 2
            )));
        }
        let (degrees, estimate) = match method {
            ExtrapolationMethod::Richardson => {
                let picked: Vec<(usize, Scalar)> = (0..=k)
                    .map(|i| rows[(i * (rows.len() - 1) + k / 2) / k].clone())
                    .collect();
                let est = neville_at_zero(&picked)?;
                (picked.into_iter().map(|(n, _)| n).collect(), est)
            }
            ExtrapolationMethod::Aitken => {
                if rows.len() < 2 * k + 1 {
                    return Err(Error::InvalidInput(format!(
                        "window {label}: {k} Aitken rounds need {} rows",
                        2 * k + 1
                    )));
                }
                let values: Vec<Scalar> = rows.iter().map(|(_, s)| s.clone()).collect();
                (rows.iter().map(|(n, _)| *n).collect(), aitken(values, k))
            }
        };
        estimates.push(WindowEstimate {
            window: label,
            degrees,
            estimate,
        });
    }

    let mut sorted: Vec<Scalar> = estimates.iter().map(|e| e.estimate.clone()).collect();
    sorted.sort_by(Scalar::cmp_total);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2].clone()
    } else {
        (&sorted[m / 2 - 1] + &sorted[m / 2]) / 2i64
    };
    let spread = &sorted[m - 1] - &sorted[0];
    let stable = spread <= stability * &median.abs();
    Ok(ExtrapolationReport {
        method,
        model_order: k,
        estimates,
        spread,
        median,
        stability_threshold: stability.clone(),
        stable,
    })
}

/// Value at `x = 0` of the interpolant through `(1/n_i, s_i)`.
fn neville_at_zero(points: &[(usize, Scalar)]) -> Result<Scalar> {
    let xs: Vec<Scalar> = points
        .iter()
        .map(|(n, _)| Scalar::one() / &Scalar::from(*n))
        .collect();
    let mut p: Vec<Scalar> = points.iter().map(|(_, s)| s.clone()).collect();
    for level in 1..p.len() {
        for i in (level..p.len()).rev() {
            let denom = &xs[i - level] - &xs[i];
            if denom.is_zero() {
                return Err(Error::Singular("repeated degree in extrapolation".into()));
            }
            // P_{i-level..i}(0) = (x_{i-level} P_{i-level+1..i} - x_i P_{i-level..i-1}) / (x_{i-level} - x_i)
            p[i] = (&xs[i - level] * &p[i] - &xs[i] * &p[i - 1]) / &denom;
        }
    }
    Ok(p.pop().expect("nonempty"))
}

/// `k` rounds of Aitken's `Delta^2`; returns the last term.
fn aitken(mut s: Vec<Scalar>, k: usize) -> Scalar {
    for _ in 0..k {
        let next: Vec<Scalar> = s
            .windows(3)
            .map(|w| {
                let d1 = &w[2] - &w[1];
                let d0 = &w[1] - &w[0];
                let dd = &d1 - &d0;
                if dd.is_zero() {
                    w[2].clone()
                } else {
                    &w[2] - &(&d1 * &d1 / &dd)
                }
            })
            .collect();
        s = next;
    }
    s.pop().expect("enough rows")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub sup: Scalar,
    /// Degree where `sup` is attained (first occurrence).
    pub sup_at: usize,
    /// `max` of the last quarter of rows over `max` of the first three quarters.
    pub tail_increase_ratio: Scalar,
}

/// Boundedness diagnostics of `scaled_upper` over the successful rows.
pub fn boundedness_report(table: &SequenceTable) -> Result<BoundednessReport> {
    let rows: Vec<(usize, Scalar)> = table
        .ok_rows()
        .filter_map(|r| r.scaled_upper.clone().map(|s| (r.n, s)))
        .collect();
    if rows.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "boundedness needs 8 successful rows, got {}",
            rows.len()
        )));
    }
    let split = rows.len() - rows.len().div_ceil(4);
    let max_of = |part: &[(usize, Scalar)]| {
        part.iter()
            .map(|(_, s)| s.clone())
            .fold(Scalar::zero(), Scalar::max)
    };
    let head = max_of(&rows[..split]);
    let tail = max_of(&rows[split..]);
    let (sup_at, sup) = rows
        .iter()
        .fold((rows[0].0, rows[0].1.clone()), |(bn, bs), (n, s)| {
            if *s > bs {
                (*n, s.clone())
            } else {
                (bn, bs)
            }
        });
    let tail_increase_ratio = if tail.is_zero() {
        Scalar::zero()
    } else {
        tail / head
    };
    Ok(BoundednessReport {
        sup,
        sup_at,
        tail_increase_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsCheck {
    pub n: usize,
    /// Upper bound of `E_n^{(+2)}(f)`.
    pub lhs: Scalar,
    /// Lower bound of `E_{n-2}(f'')`.
    pub rhs: Scalar,
    /// `lhs / rhs`, or 0 when `rhs` is at round-off level.
    pub ratio: Scalar,
    /// `lhs <= rhs (1 + tol_rel)` up to round-off.
    pub holds: bool,
}

/// Compares the convex error of `f` at degree `n` with the unconstrained
/// error of `f''` at degree `n - 2`.
pub fn ls_inequality_check(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<LsCheck> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("degree {n} below 2")));
    }
    if f.kind() == TargetKind::AbsPow && *f.exponent() < Scalar::from_i64(2) {
        return Err(Error::InvalidInput(format!(
            "exponent {} below 2: f'' is not continuous",
            f.exponent()
        )));
    }
    let f2 = f.second_derivative()?;
    let (_, lhs) = en_convex_value(f, n, opts)?;
    let rhs = best_approx(&f2, n - 2, opts)?.error_lower;
    let floor = noise_floor(&Scalar::one());
    let ratio = if rhs <= floor {
        Scalar::zero()
    } else {
        &lhs / &rhs
    };
    let holds = lhs <= &rhs * &(Scalar::one() + &opts.tol_rel) + &floor;
    Ok(LsCheck {
        n,
        lhs,
        rhs,
        ratio,
        holds,
    })
}

/// `E_n^{(+2)}(f; [-a, a])` as a `(lower, upper)` bracket.
pub fn oq2_scaled_error(
    f: &TargetSpec,
    a: &Scalar,
    n: usize,
    opts: &SolverOptions,
) -> Result<(Scalar, Scalar)> {
    let scaled = f.clone().with_half_width(a.clone())?;
    en_convex_value(&scaled, n, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Scalar {
        Scalar::from_f64(v)
    }

    fn close(a: &Scalar, b: f64, tol: f64) -> bool {
        (a - &s(b)).abs() <= s(tol)
    }

    fn opts() -> SolverOptions {
        SolverOptions::new(s(1e-20)).unwrap()
    }

    #[test]
    fn abs_sequence_small_degrees() {
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let t = build_sequence(&f, 1, 3, false, &opts()).unwrap();
        let scaled: Vec<f64> = t.rows.iter().map(|r| r.scaled_upper.as_ref().unwrap().to_f64()).collect();
        assert!((scaled[0] - 0.5).abs() < 1e-15);
        assert!((scaled[1] - 0.25).abs() < 1e-15);
        assert!((scaled[2] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn polynomial_target_has_zero_errors() {
        let f = TargetSpec::abs_pow_f64(2.0).unwrap();
        let t = build_sequence(&f, 2, 5, false, &opts()).unwrap();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            assert!(r.e_upper.as_ref().unwrap() < &s(1e-60));
        }
    }

    #[test]
    fn constrained_matches_unconstrained_at_low_degree() {
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let a = build_sequence(&f, 1, 2, false, &opts()).unwrap();
        let b = build_sequence(&f, 1, 2, true, &opts()).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            let d = x.e_upper.as_ref().unwrap() - y.e_upper.as_ref().unwrap();
            assert!(d.abs() < s(1e-30));
        }
    }

    #[test]
    fn fast_path_copies_odd_degrees() {
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let o = SolverOptions::new(s(1e-15)).unwrap();
        let fast = build_sequence(&f, 0, 12, false, &o).unwrap();
        assert!(fast.fast_path);
        assert_eq!(fast.rows.len(), 13);
        assert_eq!(fast.row(11).unwrap().paired_from, Some(10));
        assert_eq!(fast.row(5).unwrap().paired_from, None);
        let strict = build_sequence_with(
            &f,
            0,
            12,
            false,
            &o,
            SweepMode { strict: true, execution: Execution::Sequential },
            &timed_solve,
        )
        .unwrap();
        assert!(!strict.fast_path);
        for (a, b) in fast.rows.iter().zip(&strict.rows) {
            assert_eq!(a.n, b.n);
            let (x, y) = (a.e_upper.as_ref().unwrap(), b.e_upper.as_ref().unwrap());
            assert!((x - y).abs() <= s(1e-14) * x, "n = {}", a.n);
        }
    }

    #[test]
    fn failed_rows_are_kept() {
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let failing = |f: &TargetSpec, n: usize, c: bool, o: &SolverOptions| {
            if n == 2 {
                TimedSolve {
                    outcome: Err(Error::Singular("injected".into())),
                    wall_ms: 0,
                }
            } else {
                timed_solve(f, n, c, o)
            }
        };
        let t = build_sequence_with(&f, 0, 4, false, &opts(), SweepMode::default(), &failing).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.failed(), 1);
        assert_eq!(t.row(2).unwrap().status, RowStatus::Failed);
        assert!(!t.fast_path);
    }

    fn synthetic(f: impl Fn(f64) -> f64, ns: RangeInclusive<usize>) -> SequenceTable {
        let rows: Vec<(usize, Scalar)> = ns
            .map(|n| {
                let v = Scalar::from_f64(f(n as f64));
                (n, v)
            })
            .collect();
        SequenceTable::synthetic(s(1.5), &rows).unwrap()
    }

    #[test]
    fn richardson_examples() {
        let stab = s(DEFAULT_STABILITY);
        let one_over: Vec<(usize, Scalar)> = (10..=20)
            .map(|n| (n, Scalar::one() + Scalar::one() / &Scalar::from(n)))
            .collect();
        let t = SequenceTable::synthetic(s(1.5), &one_over).unwrap();
        let r = extrapolate_limit(&t, 1, &[10..=20], ExtrapolationMethod::Richardson, &stab).unwrap();
        assert!(close(&r.estimates[0].estimate, 1.0, 1e-60));
        assert_eq!(r.estimates[0].degrees, vec![10, 20]);

        let t = synthetic(|_| 3.0, 1..=30);
        for k in 1..=3 {
            for m in [ExtrapolationMethod::Richardson, ExtrapolationMethod::Aitken] {
                let r = extrapolate_limit(&t, k, &[1..=15, 16..=30], m, &stab).unwrap();
                assert!(close(&r.median, 3.0, 1e-60));
                assert!(r.spread < s(1e-60) && r.stable);
            }
        }

        let quad: Vec<(usize, Scalar)> = (5..=40)
            .map(|n| {
                let x = Scalar::one() / &Scalar::from(n);
                (n, Scalar::from_i64(2) + &x + &x.square())
            })
            .collect();
        let t = SequenceTable::synthetic(s(1.5), &quad).unwrap();
        let r = extrapolate_limit(&t, 2, &[5..=20, 21..=40], ExtrapolationMethod::Richardson, &stab).unwrap();
        for e in &r.estimates {
            assert!(close(&e.estimate, 2.0, 1e-12));
        }
    }

    #[test]
    fn extrapolation_rejections() {
        let stab = s(DEFAULT_STABILITY);
        let t = synthetic(|_| 1.0, 1..=4);
        assert!(extrapolate_limit(&t, 3, &[1..=4], ExtrapolationMethod::Richardson, &stab).is_err());
        let t = synthetic(|_| 0.0, 1..=10);
        assert!(extrapolate_limit(&t, 1, &[1..=10], ExtrapolationMethod::Richardson, &stab).is_err());
    }

    #[test]
    fn aitken_accelerates_geometric_tail() {
        let t = synthetic(|n| 1.0 + 0.5f64.powf(n), 1..=20);
        let r = extrapolate_limit(&t, 1, &[5..=12, 13..=20], ExtrapolationMethod::Aitken, &s(1e-3)).unwrap();
        for e in &r.estimates {
            assert!(close(&e.estimate, 1.0, 1e-12));
        }
    }

    #[test]
    fn boundedness_examples() {
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let t = build_sequence(&f, 1, 12, false, &SolverOptions::new(s(1e-15)).unwrap()).unwrap();
        let b = boundedness_report(&t).unwrap();
        assert!(close(&b.sup, 0.5, 1e-14));
        assert!(b.sup_at <= 2);
        assert!(b.tail_increase_ratio <= Scalar::one());

        let zero = synthetic(|_| 0.0, 1..=10);
        let b = boundedness_report(&zero).unwrap();
        assert!(b.sup.is_zero() && b.tail_increase_ratio.is_zero());

        let flat = synthetic(|_| 0.7, 1..=10);
        assert_eq!(boundedness_report(&flat).unwrap().tail_increase_ratio, Scalar::one());

        assert!(boundedness_report(&synthetic(|_| 1.0, 1..=7)).is_err());
    }

    #[test]
    fn ls_examples() {
        let o = SolverOptions::new(s(1e-15)).unwrap();
        let f = TargetSpec::abs_pow_f64(3.0).unwrap();
        let c = ls_inequality_check(&f, 4, &o).unwrap();
        assert!(close(&c.rhs, 0.75, 1e-12));
        assert!(c.holds && c.ratio < s(0.5));

        let f = TargetSpec::abs_pow_f64(2.0).unwrap();
        let c = ls_inequality_check(&f, 3, &o).unwrap();
        assert!(c.ratio.is_zero() && c.holds);

        let f = TargetSpec::abs_pow_f64(4.0).unwrap();
        let c = ls_inequality_check(&f, 6, &o).unwrap();
        assert!(c.ratio.is_zero() && c.holds);

        let f = TargetSpec::abs_pow_f64(1.5).unwrap();
        assert!(ls_inequality_check(&f, 4, &o).is_err());
    }

    #[test]
    fn oq2_examples() {
        let o = SolverOptions::new(s(1e-15)).unwrap();
        let f = TargetSpec::abs_pow_f64(1.0).unwrap();
        let (_, up) = oq2_scaled_error(&f, &s(2.0), 2, &o).unwrap();
        assert!(close(&up, 0.25, 1e-14));
        let (_, up) = oq2_scaled_error(&f, &s(1.0), 2, &o).unwrap();
        assert!(close(&up, 0.125, 1e-14));
        let f = TargetSpec::abs_pow_f64(2.0).unwrap();
        let (_, up) = oq2_scaled_error(&f, &s(3.0), 4, &o).unwrap();
        assert!(up < s(1e-50));
    }
}
