//! Brute-force reference optimum: one subproblem LP per binary assignment.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpSolution};
use crate::milp::{bits_to_f64, split, Assignment, MixedBinaryProgram};

/// Largest binary dimension [`reference_solve`] accepts.
pub const REFERENCE_MAX_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub objective: f64,
    /// Lexicographically smallest optimal assignment.
    pub best: Assignment,
}

fn bits_of(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect()
}

/// Objective `cᵀx + v(x)` of every `x ∈ {0,1}ⁿ`, indexed with `x_0` as the
/// most significant bit. Infeasible subproblems give `+∞`.
pub fn enumerate_objectives(prog: &MixedBinaryProgram) -> Result<Vec<f64>> {
    let n = prog.n();
    if n > REFERENCE_MAX_BITS {
        return Err(Error::TooManyVariables {
            vars: n,
            limit: REFERENCE_MAX_BITS,
        });
    }
    let (master, sub) = split(prog);
    (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            let x = bits_of(mask, n);
            let cx = crate::matrix::dot(&master.c, &bits_to_f64(&x));
            match solve_lp(&sub, &x)? {
                LpSolution::Optimal(opt) => Ok(cx + opt.objective),
                LpSolution::Infeasible => Ok(f64::INFINITY),
                LpSolution::Unbounded => Err(Error::Unbounded),
            }
        })
        .collect()
}

/// Every `x` whose objective is within `tol` (relative to `max(1, |z*|)`) of
/// the optimum.
pub fn argmin_set(objectives: &[f64], n: usize, tol: f64) -> Vec<Vec<u8>> {
    let best = objectives.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = best + tol * best.abs().max(1.0);
    objectives
        .iter()
        .enumerate()
        .filter(|(_, &z)| z <= cutoff)
        .map(|(mask, _)| bits_of(mask as u64, n))
        .collect()
}

pub fn reference_solve(prog: &MixedBinaryProgram) -> Result<Reference> {
    let n = prog.n();
    let objectives = enumerate_objectives(prog)?;
    let (mask, &objective) = objectives
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("at least one assignment");
    if !objective.is_finite() {
        return Err(Error::Infeasible);
    }
    let x = bits_of(mask as u64, n);
    let (_, sub) = split(prog);
    let y = solve_lp(&sub, &x)?.into_optimal()?.y;
    Ok(Reference {
        objective,
        best: Assignment { x, y },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn pure_binary_program() {
        let prog = MixedBinaryProgram::new(
            vec![2.0, -3.0, 1.0],
            vec![],
            Matrix::zeros(0, 3),
            Matrix::zeros(0, 0),
            vec![],
            Matrix::zeros(0, 3),
            Matrix::zeros(0, 0),
            vec![],
            None,
        )
        .unwrap();
        let r = reference_solve(&prog).unwrap();
        assert_eq!(r.objective, -3.0);
        assert_eq!(r.best.x, vec![0, 1, 0]);
    }

    #[test]
    fn no_binaries_is_a_single_lp() {
        // min y s.t. −y ≤ −2
        let prog = MixedBinaryProgram::new(
            vec![],
            vec![1.0],
            Matrix::zeros(1, 0),
            Matrix::from_rows(vec![vec![-1.0]], 1).unwrap(),
            vec![-2.0],
            Matrix::zeros(0, 0),
            Matrix::zeros(0, 1),
            vec![],
            None,
        )
        .unwrap();
        let r = reference_solve(&prog).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-9);
        assert!(r.best.x.is_empty());
    }
}
