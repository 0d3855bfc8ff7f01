//! Polynomials in the Chebyshev basis on [-1, 1].

use std::mem;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::chebyshev_extrema;
use crate::scalar::{precision_bits, Scalar};

/// `sum_k coeffs[k] * T_k(x)` on [-1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    coeffs: Vec<Scalar>,
}

impl ChebPoly {
    /// Builds from Chebyshev coefficients `a_0..a_n`. An empty vector is the
    /// zero polynomial.
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Scalar::zero());
        }
        ChebPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![Scalar::zero()])
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    /// `T_k`.
    pub fn chebyshev_t(k: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); k + 1];
        coeffs[k] = Scalar::one();
        Self::new(coeffs)
    }

    pub fn from_f64(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Scalar::from_f64(c)).collect())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Scalar] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    /// Index of the last stored coefficient (trailing zeros count).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn max_abs_coeff(&self) -> Scalar {
        self.coeffs
            .iter()
            .map(Scalar::abs)
            .fold(Scalar::zero(), Scalar::max)
    }

    /// Evaluates at `x`, rejecting points outside [-1, 1].
    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        if x.abs() > Scalar::one() {
            return Err(Error::OutOfDomain(x.clone()));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Clenshaw recurrence without the domain check.
    pub fn eval_unchecked(&self, x: &Scalar) -> Scalar {
        let n = self.degree();
        if n == 0 {
            return self.coeffs[0].clone();
        }
        let two_x = x * 2i64;
        let mut b1 = Scalar::zero();
        let mut b2 = Scalar::zero();
        let mut tmp = Scalar::zero();
        for a in self.coeffs[1..].iter().rev() {
            tmp.set(a);
            tmp.add_mul(&two_x, &b1);
            tmp -= &b2;
            mem::swap(&mut b2, &mut b1);
            mem::swap(&mut b1, &mut tmp);
        }
        let mut out = self.coeffs[0].clone();
        out.add_mul(x, &b1);
        out -= &b2;
        out
    }

    /// Derivative in the Chebyshev basis; the degree drops by one (constants
    /// map to the zero constant).
    pub fn derivative(&self) -> ChebPoly {
        let n = self.degree();
        if n == 0 {
            return ChebPoly::zero();
        }
        // d_{k-1} = d_{k+1} + 2k a_k, then halve d_0.
        let mut d = vec![Scalar::zero(); n + 2];
        for k in (1..=n).rev() {
            let mut v = &self.coeffs[k] * (2 * k as i64);
            v += &d[k + 1];
            d[k - 1] = v;
        }
        d.truncate(n);
        d[0] /= 2i64;
        ChebPoly::new(d)
    }

    /// `alpha * p + beta * q`.
    pub fn linear_combination(alpha: &Scalar, p: &ChebPoly, beta: &Scalar, q: &ChebPoly) -> ChebPoly {
        let len = p.coeffs.len().max(q.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let mut v = Scalar::zero();
                if let Some(a) = p.coeffs.get(k) {
                    v.add_mul(alpha, a);
                }
                if let Some(b) = q.coeffs.get(k) {
                    v.add_mul(beta, b);
                }
                v
            })
            .collect();
        ChebPoly::new(coeffs)
    }

    /// All sign-changing real roots in [-1, 1], ascending.
    ///
    /// Scans a Chebyshev grid of `max(64, 8 * degree)` intervals for sign
    /// changes and polishes each bracket. Every returned root `r` satisfies
    /// `|p(r)| <= tol * (1 + max|a_k|)`, or sits in a bracket that has
    /// collapsed to the working precision.
    pub fn roots_in_domain(&self, tol: &Scalar) -> Result<Vec<Scalar>> {
        if self.is_identically_zero() {
            return Err(Error::InvalidInput(
                "roots of the identically zero polynomial".into(),
            ));
        }
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        let intervals = (8 * self.degree()).max(64);
        let grid = chebyshev_extrema(intervals + 1);
        let residual_tol = tol * (Scalar::one() + self.max_abs_coeff());
        let values: Vec<Scalar> = grid.iter().map(|x| self.eval_unchecked(x)).collect();

        let mut roots = Vec::new();
        for j in 0..grid.len() {
            if values[j].is_zero() {
                roots.push(grid[j].clone());
                continue;
            }
            if j + 1 < grid.len()
                && !values[j + 1].is_zero()
                && values[j].is_negative() != values[j + 1].is_negative()
            {
                roots.push(self.polish_root(
                    &grid[j],
                    &values[j],
                    &grid[j + 1],
                    &values[j + 1],
                    &residual_tol,
                ));
            }
        }
        roots.dedup_by(|b, a| b <= a);
        Ok(roots)
    }

    /// Illinois-modified regula falsi with a forced bisection every third step.
    fn polish_root(
        &self,
        lo: &Scalar,
        f_lo: &Scalar,
        hi: &Scalar,
        f_hi: &Scalar,
        residual_tol: &Scalar,
    ) -> Scalar {
        let (mut a, mut fa) = (lo.clone(), f_lo.clone());
        let (mut b, mut fb) = (hi.clone(), f_hi.clone());
        let width_floor = Scalar::epsilon() * 4i64;
        let mut side = 0i8;
        let max_iter = 4 * precision_bits() as usize + 64;
        for it in 0..max_iter {
            let c = if it % 3 == 2 {
                (&a + &b) / 2i64
            } else {
                // c = b - fb (b - a) / (fb - fa)
                let mut step = &b - &a;
                step *= &fb;
                step /= &(&fb - &fa);
                let c = &b - &step;
                if c <= a || c >= b {
                    (&a + &b) / 2i64
                } else {
                    c
                }
            };
            let fc = self.eval_unchecked(&c);
            if fc.is_zero() || (fc.abs() <= *residual_tol && (&b - &a) <= Scalar::pow2(-20)) {
                return c;
            }
            if fc.is_negative() == fa.is_negative() {
                a = c;
                fa = fc;
                if side == -1 {
                    fb /= 2i64;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa /= 2i64;
                }
                side = 1;
            }
            if &b - &a <= width_floor {
                break;
            }
        }
        let fa = self.eval_unchecked(&a).abs();
        let fb = self.eval_unchecked(&b).abs();
        if fa <= fb {
            a
        } else {
            b
        }
    }

    /// Global minimum over [-1, 1] as `(argmin, min)`, leftmost on ties.
    ///
    /// Candidates are both endpoints and every root of the derivative.
    pub fn min_on_domain(&self) -> (Scalar, Scalar) {
        self.extremum_on_domain(|v, best| v < best)
    }

    /// Global maximum over [-1, 1], leftmost on ties.
    pub fn max_on_domain(&self) -> (Scalar, Scalar) {
        self.extremum_on_domain(|v, best| v > best)
    }

    fn extremum_on_domain(&self, better: impl Fn(&Scalar, &Scalar) -> bool) -> (Scalar, Scalar) {
        let mut candidates = vec![Scalar::from_i64(-1)];
        let dp = self.derivative();
        if !dp.is_identically_zero() {
            let tol = Scalar::epsilon() * 65536i64;
            candidates.extend(dp.roots_in_domain(&tol).unwrap_or_default());
        }
        candidates.push(Scalar::one());
        let mut best_x = candidates[0].clone();
        let mut best_v = self.eval_unchecked(&best_x);
        for x in &candidates[1..] {
            let v = self.eval_unchecked(x);
            if better(&v, &best_v) {
                best_v = v;
                best_x = x.clone();
            }
        }
        (best_x, best_v)
    }

    /// Values `T_0(x)..T_n(x)`.
    pub fn basis_values(n: usize, x: &Scalar) -> Vec<Scalar> {
        let mut t = Vec::with_capacity(n + 1);
        t.push(Scalar::one());
        if n >= 1 {
            t.push(x.clone());
        }
        let two_x = x * 2i64;
        for k in 2..=n {
            let mut v = &two_x * &t[k - 1];
            v -= &t[k - 2];
            t.push(v);
        }
        t
    }

    /// Second derivatives `T_0''(x)..T_n''(x)`.
    pub fn basis_second_derivatives(n: usize, x: &Scalar) -> Vec<Scalar> {
        let t = Self::basis_values(n, x);
        let two_x = x * 2i64;
        // T'_{k+1} = 2 T_k + 2x T'_k - T'_{k-1};  T''_{k+1} = 4 T'_k + 2x T''_k - T''_{k-1}
        let mut d1 = vec![Scalar::zero(); n + 1];
        let mut d2 = vec![Scalar::zero(); n + 1];
        if n >= 1 {
            d1[1] = Scalar::one();
        }
        for k in 1..n {
            let mut v = &t[k] * 2i64;
            v.add_mul(&two_x, &d1[k]);
            v -= &d1[k - 1];
            d1[k + 1] = v;
            let mut w = &d1[k] * 4i64;
            w.add_mul(&two_x, &d2[k]);
            w -= &d2[k - 1];
            d2[k + 1] = w;
        }
        d2
    }
}
