//! Independent reference solvers shared by the integration tests.
#![allow(dead_code)]

use bernstein_convex::lp::LpProblem;
use bernstein_convex::Scalar;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;

/// Optimum of `min c.z s.t. A z <= b` by enumerating every vertex: each
/// choice of `d` rows is solved as an equality system and kept if feasible.
/// Returns `None` when no vertex is feasible.
pub fn vertex_enumeration(p: &LpProblem, feas_tol: &Scalar) -> Option<Scalar> {
    let d = p.num_vars();
    let m = p.num_rows();
    let mut best: Option<Scalar> = None;
    let mut pick: Vec<usize> = (0..d).collect();
    if m < d {
        return None;
    }
    loop {
        let a: Vec<Vec<Scalar>> = pick.iter().map(|&i| p.rows()[i].clone()).collect();
        let b: Vec<Scalar> = pick.iter().map(|&i| p.rhs()[i].clone()).collect();
        if let Some(z) = solve_square(a, b) {
            let feasible = p.rows().iter().zip(p.rhs()).all(|(row, bi)| {
                let lhs: Scalar = row.iter().zip(&z).map(|(r, x)| r * x).sum();
                lhs <= bi + feas_tol
            });
            if feasible {
                let v: Scalar = p.objective().iter().zip(&z).map(|(c, x)| c * x).sum();
                best = Some(match best {
                    Some(b) => b.min(v),
                    None => v,
                });
            }
        }
        if !next_combination(&mut pick, m) {
            return best;
        }
    }
}

fn next_combination(pick: &mut [usize], m: usize) -> bool {
    let d = pick.len();
    for i in (0..d).rev() {
        if pick[i] < m - d + i {
            pick[i] += 1;
            for j in i + 1..d {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_square(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Option<Vec<Scalar>> {
    let n = b.len();
    let tiny = Scalar::from_f64(1e-40);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().cmp_total(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let factor = &a[r][col] / &a[col][col];
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    let mut x = vec![Scalar::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc -= &a[r][c] * &x[c];
        }
        x[r] = acc / &a[r][r];
    }
    Some(x)
}

/// A random bounded feasible LP: box rows `-l_i <= z_i <= u_i` plus random
/// rows that the origin satisfies strictly.
pub fn random_feasible_lp(rng: &mut impl Rng, vars: usize, extra_rows: usize) -> LpProblem {
    let int = |rng: &mut dyn rand::RngCore, lo: i64, hi: i64| Scalar::from_i64(rng.gen_range(lo..=hi));
    let objective: Vec<Scalar> = (0..vars).map(|_| int(rng, -9, 9)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..vars {
        for sign in [1i64, -1] {
            let mut r = vec![Scalar::zero(); vars];
            r[i] = Scalar::from_i64(sign);
            rows.push(r);
            rhs.push(Scalar::from_i64(rng.gen_range(1..=10)));
        }
    }
    for _ in 0..extra_rows {
        rows.push((0..vars).map(|_| int(rng, -5, 5)).collect());
        rhs.push(int(rng, 1, 12));
    }
    LpProblem::new(objective, rows, rhs).unwrap()
}

/// Chebyshev values `T_0..T_n` and second derivatives at `x`, in f64.
pub fn chebyshev_f64(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n + 1];
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    t[0] = 1.0;
    if n >= 1 {
        t[1] = x;
        d1[1] = 1.0;
    }
    for k in 1..n {
        t[k + 1] = 2.0 * x * t[k] - t[k - 1];
        d1[k + 1] = 2.0 * t[k] + 2.0 * x * d1[k] - d1[k - 1];
        d2[k + 1] = 4.0 * d1[k] + 2.0 * x * d2[k] - d2[k - 1];
    }
    (t, d2)
}

/// Minimax error of degree-`n` polynomials against `f` on a uniform grid of
/// `points` nodes, as an f64 LP; with `convex`, `P'' >= 0` is imposed on the
/// same grid.
pub fn grid_minimax(f: impl Fn(f64) -> f64, n: usize, points: usize, convex: bool) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let coeffs: Vec<_> = (0..=n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..points {
        let x = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
        let (vals, second) = chebyshev_f64(n, x);
        let fx = f(x);
        let mut upper: Vec<_> = coeffs.iter().zip(&vals).map(|(&v, &c)| (v, c)).collect();
        upper.push((t, -1.0));
        lp.add_constraint(upper.as_slice(), ComparisonOp::Le, fx);
        let mut lower: Vec<_> = coeffs.iter().zip(&vals).map(|(&v, &c)| (v, c)).collect();
        lower.push((t, 1.0));
        lp.add_constraint(lower.as_slice(), ComparisonOp::Ge, fx);
        if convex && n >= 2 {
            let row: Vec<_> = coeffs.iter().zip(&second).map(|(&v, &c)| (v, c)).collect();
            lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
        }
    }
    lp.solve().expect("grid LP solvable").objective()
}
