//! Exact LP solver for the continuous subproblem.
//!
//! Problems are brought into standard form `min cᵀz, Mz = r, z ≥ 0, r ≥ 0`
//! (free variables split as `y = y⁺ − y⁻`, one slack per inequality row)
//! and solved with a dense revised simplex: Phase I on artificial variables,
//! Phase II on the original costs, Bland's rule for both pricing and the
//! ratio test. Duals are read off the final basis and reported in the sign
//! convention of the dual subproblem: `μ ≤ 0` for `≤` rows under
//! minimization, `ν` free for equality rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::milp::SubproblemTemplate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Tolerance for primal feasibility and reduced-cost optimality.
    pub feas_tol: f64,
    pub max_pivots: usize,
    /// Rebuild the basis inverse from scratch every this many pivots.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            feas_tol: 1e-6,
            max_pivots: 50_000,
            refactor_every: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalLp {
    pub y: Vec<f64>,
    pub objective: f64,
    /// μ, one per inequality row, nonpositive.
    pub ineq_duals: Vec<f64>,
    /// ν, one per equality row.
    pub eq_duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpSolution {
    Optimal(OptimalLp),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimal(&self) -> Result<&OptimalLp> {
        match self {
            LpSolution::Optimal(o) => Ok(o),
            _ => Err(Error::NotOptimal),
        }
    }

    /// Converts non-optimal outcomes into the corresponding error.
    pub fn into_optimal(self) -> Result<OptimalLp> {
        match self {
            LpSolution::Optimal(o) => Ok(o),
            LpSolution::Infeasible => Err(Error::Infeasible),
            LpSolution::Unbounded => Err(Error::Unbounded),
        }
    }
}

/// `min costᵀy s.t. ineq·y ≤ ineq_rhs, eq·y = eq_rhs`, `y` free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub ineq: Matrix,
    pub ineq_rhs: Vec<f64>,
    pub eq: Matrix,
    pub eq_rhs: Vec<f64>,
}

impl LinearProgram {
    fn check(&self) -> Result<()> {
        let m = self.cost.len();
        let dims = [
            ("inequality columns", m, self.ineq.cols()),
            ("inequality rhs", self.ineq.rows(), self.ineq_rhs.len()),
            ("equality columns", m, self.eq.cols()),
            ("equality rhs", self.eq.rows(), self.eq_rhs.len()),
        ];
        for (what, expected, got) in dims {
            if expected != got {
                return Err(Error::Dimension {
                    what,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }
}

/// Dense revised simplex. Holds its working state, so use one per thread.
#[derive(Debug, Clone)]
pub struct SimplexSolver {
    opts: SimplexOptions,
    // standard form, column-major
    rows: usize,
    cols: usize,
    columns: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    // basis state
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
}

impl Default for SimplexSolver {
    fn default() -> Self {
        Self::new(SimplexOptions::default())
    }
}

impl SimplexSolver {
    pub fn new(opts: SimplexOptions) -> Self {
        Self {
            opts,
            rows: 0,
            cols: 0,
            columns: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            is_basic: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            pivots: 0,
        }
    }

    pub fn solve(&mut self, lp: &LinearProgram) -> Result<LpSolution> {
        lp.check()?;
        let m = lp.cost.len();
        let p = lp.ineq.rows();
        let r = lp.eq.rows();
        let rows = p + r;

        // Column layout: y⁺ (m), y⁻ (m), slacks (p), artificials (k).
        let structural = 2 * m + p;
        let mut sign = vec![1.0; rows];
        let mut rhs = Vec::with_capacity(rows);
        for k in 0..p {
            rhs.push(lp.ineq_rhs[k]);
        }
        for k in 0..r {
            rhs.push(lp.eq_rhs[k]);
        }
        for (s, v) in sign.iter_mut().zip(rhs.iter_mut()) {
            if *v < 0.0 {
                *s = -1.0;
                *v = -*v;
            }
        }
        let coef = |row: usize, j: usize| -> f64 {
            if row < p {
                lp.ineq.get(row, j)
            } else {
                lp.eq.get(row - p, j)
            }
        };

        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(structural + rows);
        for j in 0..m {
            columns.push((0..rows).map(|i| sign[i] * coef(i, j)).collect());
        }
        for j in 0..m {
            columns.push((0..rows).map(|i| -sign[i] * coef(i, j)).collect());
        }
        for k in 0..p {
            let mut col = vec![0.0; rows];
            col[k] = sign[k];
            columns.push(col);
        }
        // Initial basis: slack where it is +1, artificial elsewhere.
        let mut basis = Vec::with_capacity(rows);
        for i in 0..rows {
            if i < p && sign[i] > 0.0 {
                basis.push(2 * m + i);
            } else {
                let mut col = vec![0.0; rows];
                col[i] = 1.0;
                basis.push(columns.len());
                columns.push(col);
            }
        }
        let cols = columns.len();

        self.rows = rows;
        self.cols = cols;
        self.columns = columns;
        self.rhs = rhs;
        self.basis = basis;
        self.is_basic = vec![false; cols];
        for &b in &self.basis {
            self.is_basic[b] = true;
        }
        self.binv = identity(rows);
        self.xb = self.rhs.clone();
        self.pivots = 0;

        // Phase I
        if cols > structural {
            let phase1: Vec<f64> = (0..cols)
                .map(|j| if j >= structural { 1.0 } else { 0.0 })
                .collect();
            match self.iterate(&phase1, cols)? {
                Phase::Optimal => {}
                // cannot happen with a bounded-below Phase I objective
                Phase::Unbounded => return Ok(LpSolution::Infeasible),
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(&b, _)| b >= structural)
                .map(|(_, &v)| v)
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, &b| a.max(b));
            if infeas > self.opts.feas_tol * scale {
                return Ok(LpSolution::Infeasible);
            }
            self.drive_out_artificials(structural);
        }

        // Phase II
        let mut phase2 = vec![0.0; cols];
        phase2[..m].copy_from_slice(&lp.cost);
        for j in 0..m {
            phase2[m + j] = -lp.cost[j];
        }
        if let Phase::Unbounded = self.iterate(&phase2, structural)? {
            return Ok(LpSolution::Unbounded);
        }
        self.refactor();

        let mut z = vec![0.0; cols];
        for (i, &b) in self.basis.iter().enumerate() {
            z[b] = self.xb[i];
        }
        let y: Vec<f64> = (0..m).map(|j| z[j] - z[m + j]).collect();
        let pi = self.duals(&phase2);
        let mut ineq_duals: Vec<f64> = (0..p).map(|k| sign[k] * pi[k]).collect();
        let eq_duals: Vec<f64> = (0..r).map(|k| sign[p + k] * pi[p + k]).collect();
        for mu in &mut ineq_duals {
            // dual feasibility holds to pivot tolerance; snap residual positives
            if *mu > 0.0 {
                *mu = 0.0;
            }
        }
        let objective = dot(&lp.cost, &y);
        Ok(LpSolution::Optimal(OptimalLp {
            y,
            objective,
            ineq_duals,
            eq_duals,
        }))
    }

    /// Row vector `c_Bᵀ B⁻¹`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let n = self.rows;
        let mut pi = vec![0.0; n];
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[k * n..(k + 1) * n];
            for (p, v) in pi.iter_mut().zip(row) {
                *p += cb * v;
            }
        }
        pi
    }

    /// `B⁻¹ a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let n = self.rows;
        let col = &self.columns[j];
        (0..n)
            .map(|i| dot(&self.binv[i * n..(i + 1) * n], col))
            .collect()
    }

    /// Simplex loop over entering candidates `0..allowed`.
    fn iterate(&mut self, cost: &[f64], allowed: usize) -> Result<Phase> {
        let tol = self.opts.pivot_tol;
        loop {
            if self.pivots >= self.opts.max_pivots {
                return Err(Error::IterationLimit(self.opts.max_pivots));
            }
            let pi = self.duals(cost);
            // Bland: lowest-index improving column
            let entering = (0..allowed).find(|&j| {
                !self.is_basic[j] && cost[j] - dot(&pi, &self.columns[j]) < -tol
            });
            let Some(j) = entering else {
                return Ok(Phase::Optimal);
            };
            let u = self.ftran(j);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &ui) in u.iter().enumerate() {
                if ui <= tol {
                    continue;
                }
                let t = self.xb[i].max(0.0) / ui;
                leave = match leave {
                    None => Some((i, t)),
                    Some((li, lt)) => {
                        if t < lt - 1e-12 || (t <= lt + 1e-12 && self.basis[i] < self.basis[li]) {
                            Some((i, t))
                        } else {
                            Some((li, lt))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(row, j, &u);
        }
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[f64]) {
        let n = self.rows;
        let piv = u[row];
        {
            let r = &mut self.binv[row * n..(row + 1) * n];
            for v in r.iter_mut() {
                *v /= piv;
            }
        }
        self.xb[row] /= piv;
        let pivot_row: Vec<f64> = self.binv[row * n..(row + 1) * n].to_vec();
        let xr = self.xb[row];
        for i in 0..n {
            if i == row || u[i] == 0.0 {
                continue;
            }
            let f = u[i];
            let r = &mut self.binv[i * n..(i + 1) * n];
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.xb[i] -= f * xr;
            if self.xb[i] < 0.0 && self.xb[i] > -1e-11 {
                self.xb[i] = 0.0;
            }
        }
        self.is_basic[self.basis[row]] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.pivots += 1;
        if self.pivots.is_multiple_of(self.opts.refactor_every) {
            self.refactor();
        }
    }

    /// Recomputes `B⁻¹` by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) {
        let n = self.rows;
        if n == 0 {
            return;
        }
        let mut aug = vec![0.0; n * n];
        for (k, &b) in self.basis.iter().enumerate() {
            for i in 0..n {
                aug[i * n + k] = self.columns[b][i];
            }
        }
        let mut inv = identity(n);
        for col in 0..n {
            let (best, mag) = (col..n)
                .map(|i| (i, aug[i * n + col].abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag < 1e-14 {
                // singular basis: keep the product-form inverse
                return;
            }
            if best != col {
                for k in 0..n {
                    aug.swap(best * n + k, col * n + k);
                    inv.swap(best * n + k, col * n + k);
                }
            }
            let p = aug[col * n + col];
            for k in 0..n {
                aug[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = aug[i * n + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    aug[i * n + k] -= f * aug[col * n + k];
                    inv[i * n + k] -= f * inv[col * n + k];
                }
            }
        }
        self.binv = inv;
        self.xb = (0..n)
            .map(|i| dot(&self.binv[i * n..(i + 1) * n], &self.rhs).max(0.0))
            .collect();
    }

    /// Pivots zero-valued artificials out of the basis where possible. Rows
    /// where no structural column can replace them are redundant.
    fn drive_out_artificials(&mut self, structural: usize) {
        for row in 0..self.rows {
            if self.basis[row] < structural {
                continue;
            }
            let n = self.rows;
            let binv_row: Vec<f64> = self.binv[row * n..(row + 1) * n].to_vec();
            let candidate = (0..structural).find(|&j| {
                !self.is_basic[j] && dot(&binv_row, &self.columns[j]).abs() > 1e-7
            });
            if let Some(j) = candidate {
                let u = self.ftran(j);
                self.pivot(row, j, &u);
            }
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// The fixed-`x` subproblem as a free-variable LP.
pub fn subproblem_lp(template: &SubproblemTemplate, x_fixed: &[u8]) -> Result<LinearProgram> {
    let (ineq_rhs, eq_rhs) = template.rhs_for(x_fixed)?;
    Ok(LinearProgram {
        cost: template.c_cont.clone(),
        ineq: template.g_cont.clone(),
        ineq_rhs,
        eq: template.a_cont.clone(),
        eq_rhs,
    })
}

/// Solves `min c_contᵀy s.t. G_cont y ≤ h − Gx, A_cont y = b − Ax`.
pub fn solve_lp(template: &SubproblemTemplate, x_fixed: &[u8]) -> Result<LpSolution> {
    SimplexSolver::default().solve(&subproblem_lp(template, x_fixed)?)
}

/// Sensitivity of the subproblem value to the fixed binaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub lambda: Vec<f64>,
}

/// `λ = −Gᵀμ − Aᵀν` from an optimal subproblem solution.
pub fn compute_sensitivities(template: &SubproblemTemplate, sol: &LpSolution) -> Result<Sensitivity> {
    let opt = sol.optimal()?;
    let gm = template.g.tr_mul_vec(&opt.ineq_duals);
    let an = template.a.tr_mul_vec(&opt.eq_duals);
    let lambda = gm.iter().zip(an).map(|(g, a)| -g - a).collect();
    Ok(Sensitivity { lambda })
}

/// Dual objective `(h − Gx)ᵀμ + (b − Ax)ᵀν` of the subproblem.
pub fn dual_objective(lp: &LinearProgram, opt: &OptimalLp) -> f64 {
    dot(&lp.ineq_rhs, &opt.ineq_duals) + dot(&lp.eq_rhs, &opt.eq_duals)
}
