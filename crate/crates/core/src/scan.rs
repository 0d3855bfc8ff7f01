//! Locating the extrema of an error curve `e = f - P` on [-1, 1].
//!
//! A dense symmetric Chebyshev grid (which always contains `-1`, `0` and `1`)
//! is searched for local maxima of `|e|`, each refined by golden-section
//! search on its two neighbouring grid cells. [`ErrorScanner::extrema`] keeps
//! the largest per sign run, so its entries alternate in sign.

use std::sync::Arc;

use crate::grid::chebyshev_extrema_with_zero;
use crate::poly::ChebPoly;
use crate::scalar::{precision_bits, Scalar};
use crate::target::TargetSpec;

/// A local extremum of the signed error `f - P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub x: Scalar,
    pub error: Scalar,
}

impl Extremum {
    pub fn magnitude(&self) -> Scalar {
        self.error.abs()
    }
}

/// Scan grid with the target's values cached on it.
pub struct ErrorScanner<'a> {
    target: &'a TargetSpec,
    grid: Arc<Vec<Scalar>>,
    f_values: Vec<Scalar>,
    x_tol: Scalar,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

impl<'a> ErrorScanner<'a> {
    pub fn new(target: &'a TargetSpec, grid_size: usize) -> Self {
        let grid = chebyshev_extrema_with_zero(grid_size);
        let f_values = grid.iter().map(|x| target.eval_unchecked(x)).collect();
        ErrorScanner {
            target,
            grid,
            f_values,
            x_tol: Scalar::pow2(-(precision_bits() as i32 / 3)),
        }
    }

    pub fn grid(&self) -> &[Scalar] {
        &self.grid
    }

    pub fn error_at(&self, p: &ChebPoly, x: &Scalar) -> Scalar {
        self.target.eval_unchecked(x) - p.eval_unchecked(x)
    }

    /// Every grid-local maximum of `|f - p|`, refined, left to right.
    ///
    /// A sign run may hold several humps of nearly equal height (typical of
    /// constrained optima), so each one is refined rather than only the
    /// largest grid value.
    pub fn local_maxima(&self, p: &ChebPoly) -> Vec<Extremum> {
        let errors: Vec<Scalar> = self
            .grid
            .iter()
            .zip(&self.f_values)
            .map(|(x, f)| f - &p.eval_unchecked(x))
            .collect();
        let last = errors.len() - 1;
        let mut out = Vec::new();
        for (j, e) in errors.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let neg = e.is_negative();
            let g = |k: usize| if neg { -&errors[k] } else { errors[k].clone() };
            let gj = e.abs();
            let left_ok = j == 0 || gj >= g(j - 1);
            let right_ok = j == last || gj > g(j + 1);
            if left_ok && right_ok {
                out.push(self.refine(p, j, neg, e));
            }
        }
        if out.is_empty() {
            // e vanishes on the whole grid.
            out.push(Extremum {
                x: self.grid[0].clone(),
                error: Scalar::zero(),
            });
        }
        out
    }

    /// One refined extremum per sign run of `f - p`, left to right: the
    /// largest of the run's local maxima. Consecutive entries alternate in
    /// sign.
    pub fn extrema(&self, p: &ChebPoly) -> Vec<Extremum> {
        let mut runs: Vec<Extremum> = Vec::new();
        for m in self.local_maxima(p) {
            match runs.last_mut() {
                Some(r) if r.error.is_negative() == m.error.is_negative() && !r.error.is_zero() => {
                    if m.magnitude() > r.magnitude() {
                        *r = m;
                    }
                }
                _ => runs.push(m),
            }
        }
        runs
    }

    /// Golden-section search for the largest `|e|` around grid point `j`.
    fn refine(&self, p: &ChebPoly, j: usize, negative: bool, e_j: &Scalar) -> Extremum {
        let last = self.grid.len() - 1;
        let mut a = self.grid[j.saturating_sub(1)].clone();
        let mut b = self.grid[(j + 1).min(last)].clone();
        let signed = |x: &Scalar| {
            let e = self.error_at(p, x);
            if negative {
                (-&e, e)
            } else {
                (e.clone(), e)
            }
        };
        let mut best_x = self.grid[j].clone();
        let mut best_e = e_j.clone();
        let mut best_g = if negative { -e_j } else { e_j.clone() };

        let ratio = Scalar::from_f64(INV_PHI);
        let mut c = &b - &(&(&b - &a) * &ratio);
        let mut d = &a + &(&(&b - &a) * &ratio);
        let (mut gc, mut ec) = signed(&c);
        let (mut gd, mut ed) = signed(&d);
        while &b - &a > self.x_tol {
            if gc > gd {
                b = d;
                d = c;
                gd = gc;
                ed = ec;
                c = &b - &(&(&b - &a) * &ratio);
                (gc, ec) = signed(&c);
            } else {
                a = c;
                c = d;
                gc = gd;
                ec = ed;
                d = &a + &(&(&b - &a) * &ratio);
                (gd, ed) = signed(&d);
            }
        }
        for (x, g, e) in [(c, gc, ec), (d, gd, ed)] {
            if g > best_g {
                best_g = g;
                best_x = x;
                best_e = e;
            }
        }
        Extremum {
            x: best_x,
            error: best_e,
        }
    }
}

/// Largest `|error|` among `extrema`.
pub fn sup_error(extrema: &[Extremum]) -> Scalar {
    extrema
        .iter()
        .map(Extremum::magnitude)
        .fold(Scalar::zero(), Scalar::max)
}
