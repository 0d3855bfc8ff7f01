//! Best approximation by convex polynomials.
//!
//! `E_n^{(+2)}(f) = inf { ||f - P||_inf : deg P <= n, P'' >= 0 on [-1, 1] }` is a
//! semi-infinite linear program in `(a_0..a_n, t)`:
//!
//! ```text
//! minimize t  s.t.  |f(x) - P(x)| <= t  and  P''(y) >= 0  for all x, y in [-1, 1]
//! ```
//!
//! It is solved by cutting planes. A finite LP over a seed set of points is
//! solved, the most violated convexity and error constraints of its solution
//! are appended, and the LP is re-solved from the previous basis. The final
//! LP value is a lower bound (the LP is a relaxation). The upper bound comes
//! from the LP polynomial after a repair `P + (delta/2) x^2` that lifts
//! `P''` by `delta = -min P''`, measured by the same scan as the Remez solver.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{chebyshev_extrema, chebyshev_extrema_with_zero};
use crate::lp::{solve_lp_from_basis, LpProblem};
use crate::options::{noise_floor, SolverOptions};
use crate::poly::ChebPoly;
use crate::remez::best_approx;
use crate::scalar::{precision_bits, Scalar};
use crate::scan::{sup_error, ErrorScanner};
use crate::target::TargetSpec;

/// Budget of cut rounds per solve.
pub const MAX_CUT_ROUNDS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexApproxResult {
    pub degree: usize,
    /// Feasible after repair: `min P'' >= 0` up to rounding.
    pub polynomial: ChebPoly,
    /// Value of the final LP relaxation.
    pub error_lower: Scalar,
    /// Measured `sup |f - P|` of the repaired polynomial.
    pub error_upper: Scalar,
    /// `min P''` of the LP polynomial before repair.
    pub convexity_slack: Scalar,
    pub cut_rounds: usize,
    pub n_error_cuts: usize,
    pub n_convexity_cuts: usize,
}

impl ConvexApproxResult {
    pub fn relative_gap(&self) -> Scalar {
        if self.error_upper.is_zero() {
            return Scalar::zero();
        }
        (&self.error_upper - &self.error_lower) / &self.error_upper
    }

    /// `min P''` of the stored (repaired) polynomial.
    pub fn stored_convexity(&self) -> Scalar {
        self.polynomial.derivative().derivative().min_on_domain().1
    }
}

/// `E_n^{(+2)}(f)`. Degrees 0 and 1 carry no convexity constraint and go
/// straight to the Remez solver.
pub fn best_convex_approx(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<ConvexApproxResult> {
    check_convex(f)?;
    if n <= 1 {
        let r = best_approx(f, n, opts)?;
        return Ok(ConvexApproxResult {
            degree: n,
            polynomial: r.polynomial,
            error_lower: r.error_lower,
            error_upper: r.error_upper,
            convexity_slack: Scalar::zero(),
            cut_rounds: 0,
            n_error_cuts: 0,
            n_convexity_cuts: 0,
        });
    }
    convex_cutting_plane(f, n, opts)
}

/// Projection of [`best_convex_approx`] onto its error bracket.
pub fn en_convex_value(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<(Scalar, Scalar)> {
    let r = best_convex_approx(f, n, opts)?;
    Ok((r.error_lower, r.error_upper))
}

fn check_convex(f: &TargetSpec) -> Result<()> {
    if f.is_convex() {
        Ok(())
    } else {
        Err(Error::NotConvex(format!("{f} is not convex on [-1, 1]")))
    }
}

/// The general cutting-plane path, for every degree (including 0 and 1).
pub fn convex_cutting_plane(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<ConvexApproxResult> {
    check_convex(f)?;
    opts.validate()?;
    let scanner = ErrorScanner::new(f, opts.scan_size(n));
    let floor = noise_floor(&sup_error(&scanner.extrema(&ChebPoly::zero())));
    let lp_tol = Scalar::pow2(-(precision_bits() as i32 / 2));

    let mut cuts = CutSet::new(n);
    let seed = 4 * n + 8;
    for x in chebyshev_extrema_with_zero(seed).iter() {
        let fx = f.eval_unchecked(x);
        cuts.add_error_cut(x, &fx, true);
        cuts.add_error_cut(x, &fx, false);
    }
    for y in chebyshev_extrema(seed).iter() {
        cuts.add_convexity_cut(y);
    }

    let mut basis: Vec<usize> = Vec::new();
    let mut last_lower = Scalar::zero();
    let mut last_candidate = ChebPoly::zero();
    for round in 1..=MAX_CUT_ROUNDS {
        let sol = solve_lp_from_basis(&cuts.problem, &lp_tol, &basis)?;
        if !sol.is_optimal() {
            return Err(Error::Lp(format!(
                "cut LP at degree {n} ended {:?}",
                sol.status
            )));
        }
        basis = sol.basis.clone();
        let t = sol.z[n + 1].clone();
        let poly = ChebPoly::new(sol.z[..=n].to_vec());
        last_lower = t.clone().max(Scalar::zero());

        // Convexity separation first.
        let second = poly.derivative().derivative();
        let conv_minima = negative_local_minima(&second);
        let min_second = conv_minima
            .iter()
            .map(|(_, v)| v.clone())
            .fold(second.min_on_domain().1, Scalar::min);
        let deficit = (-&min_second).max(Scalar::zero());

        // Error separation.
        let extrema = scanner.local_maxima(&poly);
        let sup = sup_error(&extrema);
        let error_violation = (&sup - &t).max(Scalar::zero());

        let worst = error_violation.clone().max(&deficit / 2i64);
        let target_gap = (&opts.tol_rel * &t).max(floor.clone());
        if worst <= target_gap {
            let (repaired, _) = repair(poly, &deficit);
            let upper = sup_error(&scanner.local_maxima(&repaired));
            return Ok(ConvexApproxResult {
                degree: n,
                polynomial: repaired,
                error_lower: last_lower,
                error_upper: upper,
                convexity_slack: min_second,
                cut_rounds: round,
                n_error_cuts: cuts.n_error,
                n_convexity_cuts: cuts.n_convexity,
            });
        }

        last_candidate = repair(poly.clone(), &deficit).0;
        let mut added = 0;
        for (y, v) in &conv_minima {
            if v.is_negative() && cuts.add_convexity_cut(y) {
                added += 1;
            }
        }
        for e in &extrema {
            if e.magnitude() > t {
                let fx = f.eval_unchecked(&e.x);
                if cuts.add_error_cut(&e.x, &fx, !e.error.is_negative()) {
                    added += 1;
                }
            }
        }
        if added == 0 {
            // Every violated point is already a cut: the LP cannot move.
            return Err(Error::NoConvergence {
                iterations: round,
                lower: last_lower,
                upper: sup_error(&scanner.local_maxima(&last_candidate)),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_CUT_ROUNDS,
        lower: last_lower,
        upper: sup_error(&scanner.local_maxima(&last_candidate)),
    })
}

/// `P + (delta/2) x^2`, which lifts `P''` by `delta` everywhere and moves the
/// error by at most `delta/2`. In the Chebyshev basis `x^2 = (T_0 + T_2)/2`.
fn repair(mut poly: ChebPoly, deficit: &Scalar) -> (ChebPoly, bool) {
    if !deficit.is_positive() {
        return (poly, false);
    }
    let quarter = deficit / 4i64;
    let coeffs = poly.coeffs_mut();
    coeffs[0] += &quarter;
    coeffs[2] += &quarter;
    (poly, true)
}

/// Local minima of `q` on [-1, 1] (endpoints and interior stationary points)
/// where `q` is negative, plus the minimum of a dense grid scan as a safety
/// net for stationary points the root finder may miss.
fn negative_local_minima(q: &ChebPoly) -> Vec<(Scalar, Scalar)> {
    let mut out: Vec<(Scalar, Scalar)> = Vec::new();
    let mut candidates = vec![Scalar::from_i64(-1), Scalar::one()];
    let dq = q.derivative();
    if !dq.is_identically_zero() {
        let tol = Scalar::epsilon() * 65536i64;
        candidates.extend(dq.roots_in_domain(&tol).unwrap_or_default());
    }
    for y in candidates {
        let v = q.eval_unchecked(&y);
        if v.is_negative() {
            out.push((y, v));
        }
    }
    let grid = chebyshev_extrema((16 * q.degree()).max(128) + 1);
    let (gy, gv) = grid
        .iter()
        .map(|y| (y, q.eval_unchecked(y)))
        .min_by(|a, b| a.1.cmp_total(&b.1))
        .expect("grid is nonempty");
    if gv.is_negative() && out.iter().all(|(_, v)| gv < *v) {
        out.push((gy.clone(), gv));
    }
    out
}

/// Growing LP over `(a_0..a_n, t)`; rows are never removed.
struct CutSet {
    n: usize,
    problem: LpProblem,
    seen: HashSet<(String, u8)>,
    n_error: usize,
    n_convexity: usize,
}

impl CutSet {
    fn new(n: usize) -> Self {
        let mut objective = vec![Scalar::zero(); n + 2];
        objective[n + 1] = Scalar::one();
        CutSet {
            n,
            problem: LpProblem::new(objective, Vec::new(), Vec::new())
                .expect("objective is nonempty"),
            seen: HashSet::new(),
            n_error: 0,
            n_convexity: 0,
        }
    }

    /// `upper`: `P(x) - f(x) <= t` if false, `f(x) - P(x) <= t` if true.
    fn add_error_cut(&mut self, x: &Scalar, fx: &Scalar, f_above: bool) -> bool {
        if !self.seen.insert((x.to_hex(), u8::from(f_above))) {
            return false;
        }
        let basis = ChebPoly::basis_values(self.n, x);
        let mut row: Vec<Scalar> = if f_above {
            basis.iter().map(|v| -v).collect()
        } else {
            basis
        };
        row.push(Scalar::from_i64(-1));
        let rhs = if f_above { -fx } else { fx.clone() };
        self.problem.push_row(row, rhs).expect("row has n + 2 entries");
        self.n_error += 1;
        true
    }

    /// `P''(y) >= 0`, normalised to unit max-norm. Vacuous rows (degree < 2)
    /// are skipped.
    fn add_convexity_cut(&mut self, y: &Scalar) -> bool {
        if self.n < 2 || !self.seen.insert((y.to_hex(), 2)) {
            return false;
        }
        let d2 = ChebPoly::basis_second_derivatives(self.n, y);
        let norm = d2.iter().map(Scalar::abs).fold(Scalar::zero(), Scalar::max);
        if norm.is_zero() {
            return false;
        }
        let mut row: Vec<Scalar> = d2.iter().map(|v| -(v / &norm)).collect();
        row.push(Scalar::zero());
        self.problem
            .push_row(row, Scalar::zero())
            .expect("row has n + 2 entries");
        self.n_convexity += 1;
        true
    }
}
