//! Dense linear programming at working precision.
//!
//! Solves `minimize c.z subject to A z <= b` with free `z` by running a
//! two-phase simplex method on the dual standard form
//!
//! ```text
//! minimize b.y  subject to  A^T y = -c,  y >= 0
//! ```
//!
//! whose variables are all sign constrained. The primal solution is read off
//! the simplex multipliers of the optimal dual basis. The dual has one
//! equality row per primal variable, so the basis stays small (`|c| x |c|`)
//! however many constraints the primal carries; that is what makes
//! cutting-plane loops with thousands of rows cheap. The basis inverse is held
//! explicitly and refactored periodically.
//!
//! Sign conventions: at an optimum `y >= 0`, `A^T y = -c` and
//! `c.z = -b.y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{precision_bits, Scalar};

/// `minimize c.z` subject to `A z <= b`, `z` free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    objective: Vec<Scalar>,
    rows: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
}

impl LpProblem {
    pub fn new(objective: Vec<Scalar>, rows: Vec<Vec<Scalar>>, rhs: Vec<Scalar>) -> Result<Self> {
        if objective.is_empty() {
            return Err(Error::InvalidInput("LP needs at least one variable".into()));
        }
        if rows.len() != rhs.len() {
            return Err(Error::InvalidInput(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != objective.len()) {
            return Err(Error::InvalidInput(format!(
                "row {bad} has length {}, expected {}",
                rows[bad].len(),
                objective.len()
            )));
        }
        Ok(LpProblem {
            objective,
            rows,
            rhs,
        })
    }

    /// Appends the constraint `row . z <= rhs`.
    pub fn push_row(&mut self, row: Vec<Scalar>, rhs: Scalar) -> Result<()> {
        if row.len() != self.objective.len() {
            return Err(Error::InvalidInput(format!(
                "row has length {}, expected {}",
                row.len(),
                self.objective.len()
            )));
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn objective(&self) -> &[Scalar] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[Scalar] {
        &self.rhs
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (empty unless optimal).
    pub z: Vec<Scalar>,
    pub objective_value: Scalar,
    /// Dual multipliers, one per constraint row (empty unless optimal).
    pub y: Vec<Scalar>,
    /// `max(A z - b)^+`.
    pub primal_residual: Scalar,
    /// `max(|A^T y + c|, (-y)^+)`.
    pub dual_residual: Scalar,
    /// `|y . (b - A z)|`.
    pub complementarity_gap: Scalar,
    /// For `Infeasible`: `y >= 0` with `A^T y = 0`, `b.y < 0`.
    /// For `Unbounded`: `d` with `A d <= 0`, `c.d < 0`.
    pub ray: Vec<Scalar>,
    /// Constraint rows forming the optimal dual basis; feed back to
    /// [`solve_lp_from_basis`] after appending rows.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, ray: Vec<Scalar>, iterations: usize) -> Self {
        LpSolution {
            status,
            z: Vec::new(),
            objective_value: Scalar::zero(),
            y: Vec::new(),
            primal_residual: Scalar::zero(),
            dual_residual: Scalar::zero(),
            complementarity_gap: Scalar::zero(),
            ray,
            basis: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves from scratch. On optimal return all three certificate residuals are
/// at most `tol`; if they cannot be brought under `tol` the call fails rather
/// than returning an uncertified point.
pub fn solve_lp(problem: &LpProblem, tol: &Scalar) -> Result<LpSolution> {
    solve_lp_from_basis(problem, tol, &[])
}

/// Like [`solve_lp`], starting from a previous optimal basis when that basis
/// is still valid (same objective, rows only appended). Falls back to a cold
/// start otherwise.
pub fn solve_lp_from_basis(problem: &LpProblem, tol: &Scalar, hint: &[usize]) -> Result<LpSolution> {
    if problem.num_rows() == 0 {
        return Err(Error::InvalidInput("LP needs at least one constraint".into()));
    }
    let mut dual = DualSimplex::new(problem);
    let phase2_ready = !hint.is_empty() && dual.try_warm_start(hint);
    if !phase2_ready {
        dual.start_phase_one();
        match dual.run(Phase::One)? {
            Outcome::Optimal => {}
            Outcome::Unbounded(_) => unreachable!("phase one is bounded below by zero"),
        }
        if dual.objective_value() > dual.feasibility_floor() {
            return dual_infeasible(problem, tol, &dual);
        }
        dual.drive_out_artificials();
    }
    match dual.run(Phase::Two)? {
        Outcome::Unbounded(ray) => Ok(LpSolution::without_point(
            LpStatus::Infeasible,
            ray,
            dual.iterations,
        )),
        Outcome::Optimal => {
            let mut sol = dual.certified_solution(problem);
            if !within(&sol, tol) {
                dual.refactor()?;
                sol = dual.certified_solution(problem);
            }
            if !within(&sol, tol) {
                return Err(Error::Lp(format!(
                    "certificate residuals above tolerance {tol}: primal {}, dual {}, gap {}",
                    sol.primal_residual, sol.dual_residual, sol.complementarity_gap
                )));
            }
            Ok(sol)
        }
    }
}

fn within(sol: &LpSolution, tol: &Scalar) -> bool {
    sol.primal_residual <= *tol && sol.dual_residual <= *tol && sol.complementarity_gap <= *tol
}

/// The dual is infeasible, so the primal is unbounded or infeasible. An
/// auxiliary bounded LP decides which.
fn dual_infeasible(problem: &LpProblem, tol: &Scalar, dual: &DualSimplex) -> Result<LpSolution> {
    let improving = dual.multipliers();
    let d = problem.num_vars();
    // minimize s  s.t.  A z - s <= b,  -s <= 1
    let mut objective = vec![Scalar::zero(); d + 1];
    objective[d] = Scalar::one();
    let mut rows = Vec::with_capacity(problem.num_rows() + 1);
    for r in problem.rows() {
        let mut row = r.clone();
        row.push(Scalar::from_i64(-1));
        rows.push(row);
    }
    let mut cap = vec![Scalar::zero(); d + 1];
    cap[d] = Scalar::from_i64(-1);
    rows.push(cap);
    let mut rhs = problem.rhs().to_vec();
    rhs.push(Scalar::one());
    let aux = LpProblem::new(objective, rows, rhs)?;
    let aux_sol = solve_lp(&aux, tol)?;
    if aux_sol.objective_value <= dual.feasibility_floor() {
        Ok(LpSolution::without_point(
            LpStatus::Unbounded,
            improving,
            dual.iterations + aux_sol.iterations,
        ))
    } else {
        let mut farkas = aux_sol.y;
        farkas.truncate(problem.num_rows());
        Ok(LpSolution::without_point(
            LpStatus::Infeasible,
            farkas,
            dual.iterations + aux_sol.iterations,
        ))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Outcome {
    Optimal,
    /// Dual ray in original row scaling.
    Unbounded(Vec<Scalar>),
}

const REFACTOR_EVERY: usize = 64;

/// Revised simplex state for `min b.y, A^T y = -c, y >= 0` with columns
/// scaled to unit max-norm. Columns `0..m` are constraint rows of the primal,
/// columns `m..m+d` are phase-one artificials `sign_i e_i`.
struct DualSimplex {
    d: usize,
    m: usize,
    columns: Vec<Vec<Scalar>>,
    costs: Vec<Scalar>,
    col_scale: Vec<Scalar>,
    rhs: Vec<Scalar>,
    art_sign: Vec<bool>,
    basis: Vec<usize>,
    binv: Vec<Vec<Scalar>>,
    xb: Vec<Scalar>,
    phase_costs_one: bool,
    iterations: usize,
    since_refactor: usize,
    eps: Scalar,
}

impl DualSimplex {
    fn new(problem: &LpProblem) -> Self {
        let d = problem.num_vars();
        let m = problem.num_rows();
        let mut columns = Vec::with_capacity(m);
        let mut costs = Vec::with_capacity(m);
        let mut col_scale = Vec::with_capacity(m);
        for (row, b) in problem.rows().iter().zip(problem.rhs()) {
            let norm = row.iter().map(Scalar::abs).fold(Scalar::zero(), Scalar::max);
            let s = if norm.is_zero() {
                Scalar::one()
            } else {
                Scalar::one() / &norm
            };
            columns.push(row.iter().map(|a| a * &s).collect());
            costs.push(b * &s);
            col_scale.push(s);
        }
        let rhs: Vec<Scalar> = problem.objective().iter().map(|c| -c).collect();
        let art_sign = rhs.iter().map(|g| !g.is_negative()).collect();
        DualSimplex {
            d,
            m,
            columns,
            costs,
            col_scale,
            rhs,
            art_sign,
            basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            phase_costs_one: true,
            iterations: 0,
            since_refactor: 0,
            eps: Scalar::pow2(-(3 * precision_bits() as i32 / 4)),
        }
    }

    fn feasibility_floor(&self) -> Scalar {
        let gnorm = self.rhs.iter().map(Scalar::abs).fold(Scalar::zero(), Scalar::max);
        Scalar::pow2(-(precision_bits() as i32 / 2)) * (Scalar::one() + gnorm)
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.m
    }

    fn cost(&self, j: usize) -> Scalar {
        if self.phase_costs_one {
            if self.is_artificial(j) {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        } else if self.is_artificial(j) {
            Scalar::zero()
        } else {
            self.costs[j].clone()
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<Scalar> {
        if self.is_artificial(j) {
            let i = j - self.m;
            return self
                .binv
                .iter()
                .map(|row| if self.art_sign[i] { row[i].clone() } else { -&row[i] })
                .collect();
        }
        let col = &self.columns[j];
        self.binv
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (r, a) in row.iter().zip(col) {
                    acc.add_mul(r, a);
                }
                acc
            })
            .collect()
    }

    /// Simplex multipliers `pi^T = c_B^T B^{-1}`.
    fn multipliers(&self) -> Vec<Scalar> {
        let mut pi = vec![Scalar::zero(); self.d];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = self.cost(j);
            if cb.is_zero() {
                continue;
            }
            for (p, b) in pi.iter_mut().zip(&self.binv[i]) {
                p.add_mul(&cb, b);
            }
        }
        pi
    }

    fn objective_value(&self) -> Scalar {
        let mut v = Scalar::zero();
        for (i, &j) in self.basis.iter().enumerate() {
            v.add_mul(&self.cost(j), &self.xb[i]);
        }
        v
    }

    fn start_phase_one(&mut self) {
        self.phase_costs_one = true;
        self.basis = (0..self.d).map(|i| self.m + i).collect();
        self.binv = (0..self.d)
            .map(|i| {
                let mut row = vec![Scalar::zero(); self.d];
                row[i] = if self.art_sign[i] {
                    Scalar::one()
                } else {
                    Scalar::from_i64(-1)
                };
                row
            })
            .collect();
        self.xb = self.rhs.iter().map(Scalar::abs).collect();
        self.since_refactor = 0;
    }

    fn try_warm_start(&mut self, hint: &[usize]) -> bool {
        if hint.len() != self.d || hint.iter().any(|&j| j >= self.m) {
            return false;
        }
        let mut seen = hint.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.d {
            return false;
        }
        self.basis = hint.to_vec();
        self.phase_costs_one = false;
        if self.refactor().is_err() {
            return false;
        }
        let floor = -(&self.eps * 1024i64);
        if self.xb.iter().any(|x| *x < floor) {
            return false;
        }
        for x in &mut self.xb {
            if x.is_negative() {
                *x = Scalar::zero();
            }
        }
        true
    }

    /// Rebuilds `B^{-1}` and `x_B` from the basis by Gauss-Jordan elimination
    /// with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let d = self.d;
        let mut a: Vec<Vec<Scalar>> = vec![vec![Scalar::zero(); 2 * d]; d];
        for (k, &j) in self.basis.iter().enumerate() {
            if self.is_artificial(j) {
                let i = j - self.m;
                a[i][k] = if self.art_sign[i] {
                    Scalar::one()
                } else {
                    Scalar::from_i64(-1)
                };
            } else {
                for i in 0..d {
                    a[i][k] = self.columns[j][i].clone();
                }
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[d + i] = Scalar::one();
        }
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&p, &q| a[p][col].abs().cmp_total(&a[q][col].abs()))
                .unwrap();
            if a[piv][col].abs() <= self.eps {
                return Err(Error::Singular("LP basis".into()));
            }
            a.swap(col, piv);
            let inv = Scalar::one() / &a[col][col];
            for v in &mut a[col] {
                *v *= &inv;
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == col || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    v.sub_mul(&f, p);
                }
            }
        }
        self.binv = a.into_iter().map(|row| row[d..].to_vec()).collect();
        self.xb = self
            .binv
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (r, g) in row.iter().zip(&self.rhs) {
                    acc.add_mul(r, g);
                }
                acc
            })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, leave: usize, enter: usize, w: &[Scalar]) {
        let inv = Scalar::one() / &w[leave];
        for v in &mut self.binv[leave] {
            *v *= &inv;
        }
        self.xb[leave] *= &inv;
        let pivot_row = self.binv[leave].clone();
        let pivot_x = self.xb[leave].clone();
        for i in 0..self.d {
            if i == leave || w[i].is_zero() {
                continue;
            }
            for (v, p) in self.binv[i].iter_mut().zip(&pivot_row) {
                v.sub_mul(&w[i], p);
            }
            self.xb[i].sub_mul(&w[i], &pivot_x);
            if self.xb[i].is_negative() && self.xb[i].abs() <= self.eps {
                self.xb[i] = Scalar::zero();
            }
        }
        self.basis[leave] = enter;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    fn run(&mut self, phase: Phase) -> Result<Outcome> {
        self.phase_costs_one = phase == Phase::One;
        let cap = 1000 * (self.m + self.d);
        let stall_limit = 10 * (self.m + self.d);
        let mut stalled = 0usize;
        let mut best = self.objective_value();
        let mut in_basis = vec![false; self.m + self.d];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        loop {
            if self.iterations >= cap {
                return Err(Error::Lp(format!(
                    "iteration cap {cap} reached without optimality"
                )));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = stalled >= stall_limit;
            let pi = self.multipliers();
            let mut enter: Option<(usize, Scalar)> = None;
            for j in 0..self.m {
                if in_basis[j] {
                    continue;
                }
                let mut r = self.cost(j);
                for (p, a) in pi.iter().zip(&self.columns[j]) {
                    r.sub_mul(p, a);
                }
                let threshold = &self.eps * &(Scalar::one() + self.cost(j).abs());
                if r >= -threshold {
                    continue;
                }
                if bland {
                    enter = Some((j, r));
                    break;
                }
                if enter.as_ref().map_or(true, |(_, best_r)| r < *best_r) {
                    enter = Some((j, r));
                }
            }
            let Some((q, _)) = enter else {
                return Ok(Outcome::Optimal);
            };
            let w = self.ftran(q);
            let mut leave: Option<(usize, Scalar)> = None;
            for i in 0..self.d {
                if w[i] <= self.eps {
                    continue;
                }
                let ratio = &self.xb[i] / &w[i];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                // Dual ray: y_q = 1, y_B = -w.
                let mut ray = vec![Scalar::zero(); self.m];
                ray[q] = self.col_scale[q].clone();
                for (i, &j) in self.basis.iter().enumerate() {
                    if !self.is_artificial(j) {
                        ray[j] = -(&w[i] * &self.col_scale[j]);
                    }
                }
                return Ok(Outcome::Unbounded(ray));
            };
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.pivot(r, q, &w);
            let obj = self.objective_value();
            if obj < best {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
    }

    /// Pivots basic artificials (all at level zero after phase one) out in
    /// favour of real columns; rows with no usable column are redundant and
    /// keep their artificial.
    fn drive_out_artificials(&mut self) {
        self.phase_costs_one = false;
        for r in 0..self.d {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let mut in_basis = vec![false; self.m];
            for &j in &self.basis {
                if j < self.m {
                    in_basis[j] = true;
                }
            }
            let mut best: Option<(usize, Vec<Scalar>)> = None;
            for j in (0..self.m).filter(|&j| !in_basis[j]) {
                let w = self.ftran(j);
                if w[r].abs() > self.eps
                    && best.as_ref().map_or(true, |(_, bw)| w[r].abs() > bw[r].abs())
                {
                    best = Some((j, w));
                }
            }
            if let Some((j, w)) = best {
                self.pivot(r, j, &w);
            }
        }
        for x in &mut self.xb {
            if x.is_negative() {
                *x = Scalar::zero();
            }
        }
    }

    fn certified_solution(&self, problem: &LpProblem) -> LpSolution {
        let z = self.multipliers();
        let m = self.m;
        let mut y = vec![Scalar::zero(); m];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < m {
                y[j] = &self.xb[i] * &self.col_scale[j];
            }
        }
        let mut primal_residual = Scalar::zero();
        let mut gap = Scalar::zero();
        for (k, (row, b)) in problem.rows().iter().zip(problem.rhs()).enumerate() {
            let mut slack = b.clone();
            for (a, zi) in row.iter().zip(&z) {
                slack.sub_mul(a, zi);
            }
            if slack.is_negative() {
                primal_residual = primal_residual.max(-&slack);
            }
            if !y[k].is_zero() {
                gap.add_mul(&y[k], &slack);
            }
        }
        let mut dual_residual = Scalar::zero();
        for (i, c) in problem.objective().iter().enumerate() {
            let mut v = c.clone();
            for (k, row) in problem.rows().iter().enumerate() {
                if !y[k].is_zero() {
                    v.add_mul(&row[i], &y[k]);
                }
            }
            dual_residual = dual_residual.max(v.abs());
        }
        for yk in &y {
            if yk.is_negative() {
                dual_residual = dual_residual.max(yk.abs());
            }
        }
        let mut objective_value = Scalar::zero();
        for (c, zi) in problem.objective().iter().zip(&z) {
            objective_value.add_mul(c, zi);
        }
        LpSolution {
            status: LpStatus::Optimal,
            z,
            objective_value,
            y,
            primal_residual,
            dual_residual,
            complementarity_gap: gap.abs(),
            ray: Vec::new(),
            basis: self.basis.iter().copied().filter(|&j| j < m).collect(),
            iterations: self.iterations,
        }
    }
}
