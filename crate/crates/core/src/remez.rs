//! Best uniform polynomial approximation by the Remez exchange algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::chebyshev_extrema;
use crate::options::{noise_floor, SolverOptions};
use crate::poly::ChebPoly;
use crate::scalar::Scalar;
use crate::scan::{sup_error, ErrorScanner, Extremum};
use crate::target::TargetSpec;

/// Iteration budget of the exchange loop.
pub const MAX_REMEZ_ITERATIONS: usize = 200;

/// Alternation set: `degree + 2` strictly increasing nodes in [-1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    nodes: Vec<Scalar>,
}

impl Reference {
    pub fn new(nodes: Vec<Scalar>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("a reference needs at least two nodes".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Singular("reference nodes coalesced".into()));
        }
        if nodes[0] < Scalar::from_i64(-1) || nodes[nodes.len() - 1] > Scalar::one() {
            return Err(Error::InvalidInput("reference nodes outside [-1, 1]".into()));
        }
        Ok(Reference { nodes })
    }

    /// The `n + 2` Chebyshev extrema `cos(k pi / (n + 1))`, ascending.
    pub fn chebyshev(n: usize) -> Self {
        Reference {
            nodes: chebyshev_extrema(n + 2).to_vec(),
        }
    }

    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub degree: usize,
    pub polynomial: ChebPoly,
    /// de la Vallee Poussin bound: smallest `|f - P|` over the alternating reference.
    pub error_lower: Scalar,
    /// Measured `sup |f - P|` over the refined scan.
    pub error_upper: Scalar,
    /// `error_lower / error_upper`, in (0, 1].
    pub equioscillation_ratio: Scalar,
    pub iterations: usize,
    pub reference: Reference,
    /// Signed levelled error `h` of the last reference solve.
    pub levelled_error: Scalar,
}

impl ApproxResult {
    /// `min P''` over [-1, 1]; negative when the optimum is not convex.
    pub fn convexity_slack(&self) -> Scalar {
        self.polynomial.derivative().derivative().min_on_domain().1
    }

    /// Relative width of the error bracket.
    pub fn relative_gap(&self) -> Scalar {
        if self.error_upper.is_zero() {
            return Scalar::zero();
        }
        (&self.error_upper - &self.error_lower) / &self.error_upper
    }
}

/// `E_n(f)` with its optimal polynomial.
///
/// Starts from the Chebyshev extrema, levels the error on the reference,
/// scans `f - P` for its extrema and swaps in a whole new alternating
/// reference, until `sup|f - P| / |h| - 1 <= tol_rel`.
pub fn best_approx(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<ApproxResult> {
    opts.validate()?;
    let scanner = ErrorScanner::new(f, opts.scan_size(n));
    let f_scale = sup_error(&scanner.extrema(&ChebPoly::zero()));
    let floor = noise_floor(&f_scale);

    let mut reference = Reference::chebyshev(n);
    let mut best: Option<(Scalar, Scalar)> = None;
    for iteration in 1..=MAX_REMEZ_ITERATIONS {
        let f_ref: Vec<Scalar> = reference.nodes.iter().map(|x| f.eval_unchecked(x)).collect();
        let (poly, h) = level_on_reference(&reference, &f_ref, n)?;
        let extrema = scanner.extrema(&poly);

        let ref_errors: Vec<Scalar> = reference
            .nodes
            .iter()
            .zip(&f_ref)
            .map(|(x, fx)| fx - &poly.eval_unchecked(x))
            .collect();
        let ref_max = ref_errors.iter().map(Scalar::abs).fold(Scalar::zero(), Scalar::max);
        let upper = sup_error(&extrema).max(ref_max);

        if upper <= floor {
            // f is (numerically) a polynomial of degree <= n.
            return Ok(ApproxResult {
                degree: n,
                polynomial: poly,
                error_lower: Scalar::zero(),
                error_upper: upper,
                equioscillation_ratio: Scalar::one(),
                iterations: iteration,
                reference,
                levelled_error: h,
            });
        }

        let lower = if alternates(&ref_errors) {
            ref_errors.iter().map(Scalar::abs).fold(upper.clone(), Scalar::min)
        } else {
            Scalar::zero()
        };
        best = Some(match best {
            Some((bl, bu)) => (bl.max(lower.clone()), bu.min(upper.clone())),
            None => (lower.clone(), upper.clone()),
        });

        if !lower.is_zero() && &upper / &lower - Scalar::one() <= opts.tol_rel {
            return Ok(ApproxResult {
                degree: n,
                polynomial: poly,
                equioscillation_ratio: &lower / &upper,
                error_lower: lower,
                error_upper: upper,
                iterations: iteration,
                reference,
                levelled_error: h,
            });
        }

        reference = exchange(&reference, &ref_errors, &extrema)?;
    }
    let (lower, upper) = best.expect("at least one iteration ran");
    Err(Error::NoConvergence {
        iterations: MAX_REMEZ_ITERATIONS,
        lower,
        upper,
    })
}

/// Projection of [`best_approx`] onto its error bracket.
pub fn en_value(f: &TargetSpec, n: usize, opts: &SolverOptions) -> Result<(Scalar, Scalar)> {
    let r = best_approx(f, n, opts)?;
    Ok((r.error_lower, r.error_upper))
}

fn alternates(errors: &[Scalar]) -> bool {
    errors.iter().all(|e| !e.is_zero())
        && errors
            .windows(2)
            .all(|w| w[0].is_negative() != w[1].is_negative())
}

/// Solves `P(x_k) + (-1)^k h = f(x_k)` for the Chebyshev coefficients of `P`
/// and the levelled error `h`.
fn level_on_reference(reference: &Reference, f_ref: &[Scalar], n: usize) -> Result<(ChebPoly, Scalar)> {
    let size = n + 2;
    debug_assert_eq!(reference.len(), size);
    let mut rows: Vec<Vec<Scalar>> = reference
        .nodes
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let mut row = ChebPoly::basis_values(n, x);
            row.push(if k % 2 == 0 {
                Scalar::one()
            } else {
                Scalar::from_i64(-1)
            });
            row
        })
        .collect();
    let mut rhs = f_ref.to_vec();
    let sol = gauss_solve(&mut rows, &mut rhs)?;
    let mut coeffs = sol;
    let h = coeffs.pop().expect("system has n + 2 unknowns");
    Ok((ChebPoly::new(coeffs), h))
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
pub(crate) fn gauss_solve(a: &mut [Vec<Scalar>], b: &mut [Scalar]) -> Result<Vec<Scalar>> {
    let size = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(Scalar::abs)
        .fold(Scalar::zero(), Scalar::max);
    let singular_below = Scalar::epsilon() * 1024i64 * &scale;
    for col in 0..size {
        let piv = (col..size)
            .max_by(|&p, &q| a[p][col].abs().cmp_total(&a[q][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= singular_below {
            return Err(Error::Singular(format!(
                "reference system, pivot {col} vanishes"
            )));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (head, tail) = a.split_at_mut(col + 1);
        let pivot_row = &head[col];
        let (bhead, btail) = b.split_at_mut(col + 1);
        for (row, bi) in tail.iter_mut().zip(btail.iter_mut()) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                v.sub_mul(&factor, p);
            }
            bi.sub_mul(&factor, &bhead[col]);
        }
    }
    let mut x = vec![Scalar::zero(); size];
    for i in (0..size).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..size {
            acc.sub_mul(&a[i][j], &x[j]);
        }
        x[i] = acc / &a[i][i];
    }
    Ok(x)
}

/// Multi-point exchange: the new reference is `n + 2` consecutive alternating
/// extrema that keep the global maximum. When the scan yields too few sign
/// runs, falls back to swapping the global maximizer into the old reference.
fn exchange(reference: &Reference, ref_errors: &[Scalar], extrema: &[Extremum]) -> Result<Reference> {
    let size = reference.len();
    if extrema.len() >= size {
        let mut chosen: Vec<&Extremum> = extrema.iter().collect();
        while chosen.len() > size {
            let first = chosen[0].magnitude();
            let last = chosen[chosen.len() - 1].magnitude();
            if first < last {
                chosen.remove(0);
            } else {
                chosen.pop();
            }
        }
        let nodes: Vec<Scalar> = chosen.iter().map(|e| e.x.clone()).collect();
        if let Ok(r) = Reference::new(nodes) {
            return Ok(r);
        }
    }
    single_exchange(reference, ref_errors, extrema)
}

fn single_exchange(
    reference: &Reference,
    ref_errors: &[Scalar],
    extrema: &[Extremum],
) -> Result<Reference> {
    let peak = extrema
        .iter()
        .max_by(|a, b| a.magnitude().cmp_total(&b.magnitude()))
        .expect("scan returns at least one point");
    let x = &peak.x;
    let neg = peak.error.is_negative();
    let mut nodes = reference.nodes.clone();
    let same_sign = |i: usize| ref_errors[i].is_negative() == neg;
    let last = nodes.len() - 1;
    if let Some(pos) = nodes.iter().position(|r| r == x) {
        nodes[pos] = x.clone();
    } else if *x < nodes[0] {
        if same_sign(0) {
            nodes[0] = x.clone();
        } else {
            nodes.pop();
            nodes.insert(0, x.clone());
        }
    } else if *x > nodes[last] {
        if same_sign(last) {
            nodes[last] = x.clone();
        } else {
            nodes.remove(0);
            nodes.push(x.clone());
        }
    } else {
        let i = nodes.iter().rposition(|r| r < x).expect("x lies inside the reference");
        if same_sign(i) {
            nodes[i] = x.clone();
        } else {
            nodes[i + 1] = x.clone();
        }
    }
    Reference::new(nodes)
}
