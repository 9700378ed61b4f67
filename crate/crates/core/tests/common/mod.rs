//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use qbd_core::benders::Cut;
use qbd_core::lp::{LinearProgram, SimplexSolver};
use qbd_core::matrix::Matrix;
use qbd_core::milp::MixedBinaryProgram;
use qbd_core::qubo::Qubo;
use qbd_core::tnep::{CandidateLine, TnepInstance};
use rand::Rng;

/// Every bit vector of length `n`, `x_0` most significant.
pub fn all_bits(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u64 << n).map(move |m| (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn as_f64(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| b as f64).collect()
}

/// Minimum energy and every state attaining it within `tol`, by evaluating
/// the QUBO at all states.
pub fn qubo_argmin(q: &Qubo, tol: f64) -> (f64, Vec<Vec<u8>>) {
    let states: Vec<(Vec<u8>, f64)> = all_bits(q.num_vars())
        .map(|b| {
            let e = q.energy(&b);
            (b, e)
        })
        .collect();
    let best = states.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let set = states
        .into_iter()
        .filter(|s| s.1 <= best + tol)
        .map(|s| s.0)
        .collect();
    (best, set)
}

/// The two-bus system: all demand at bus 1, all generation at bus 0, one
/// candidate line between them.
pub fn two_bus() -> TnepInstance {
    TnepInstance {
        buses: 2,
        lines: vec![CandidateLine {
            from: 0,
            to: 1,
            capacity: 10.0,
            cost: 5.0,
        }],
        demand: vec![0.0, 10.0],
        gen_cap: vec![10.0, 0.0],
        gen_cost: vec![1.0, 1.0],
        shed_cost: vec![100.0, 100.0],
        annualization: 1.0,
        seed: 0,
    }
}

fn rand_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.gen_range(lo..hi));
        }
    }
    m
}

/// Random program whose subproblem is feasible and bounded for every `x`.
///
/// Continuous variables live in boxes `[0, 5]`; random inequality rows get a
/// right-hand side that the box centre satisfies for all `x`; each equality
/// row owns a private variable with a wide box that absorbs any imbalance.
pub fn random_program(rng: &mut impl Rng, n: usize, m: usize, p_extra: usize, r: usize) -> MixedBinaryProgram {
    let mt = m + r;
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let c_cont: Vec<f64> = (0..mt).map(|_| rng.gen_range(-3.0..3.0)).collect();

    let p = 2 * mt + p_extra;
    let mut g = Matrix::zeros(p, n);
    let mut g_cont = Matrix::zeros(p, mt);
    let mut h = vec![0.0; p];
    for j in 0..mt {
        let width = if j < m { 5.0 } else { 200.0 };
        g_cont.set(2 * j, j, 1.0);
        h[2 * j] = width;
        g_cont.set(2 * j + 1, j, -1.0);
        h[2 * j + 1] = if j < m { 0.0 } else { width };
    }
    let centre: Vec<f64> = (0..mt).map(|j| if j < m { 2.5 } else { 0.0 }).collect();
    for k in 0..p_extra {
        let row = 2 * mt + k;
        let mut worst = 0.0;
        for i in 0..n {
            let v = rng.gen_range(-2.0..2.0);
            g.set(row, i, v);
            worst += f64::max(v, 0.0);
        }
        let mut at_centre = 0.0;
        for j in 0..m {
            let v = rng.gen_range(-2.0..2.0);
            g_cont.set(row, j, v);
            at_centre += v * centre[j];
        }
        h[row] = worst + at_centre + rng.gen_range(0.1..2.0);
    }

    let a = rand_matrix(rng, r, n, -2.0, 2.0);
    let mut a_cont = Matrix::zeros(r, mt);
    let mut b = vec![0.0; r];
    for k in 0..r {
        for j in 0..m {
            a_cont.set(k, j, rng.gen_range(-2.0..2.0));
        }
        a_cont.set(k, m + k, 1.0);
        b[k] = rng.gen_range(-3.0..3.0);
    }
    MixedBinaryProgram::new(c, c_cont, g, g_cont, h, a, a_cont, b, None).unwrap()
}

/// Sensitivity obtained from the subproblem with `x` as continuous variables
/// pinned by explicit rows `x = x_fixed`: the duals of those rows.
pub fn explicit_fixing_lambda(prog: &MixedBinaryProgram, x_fixed: &[u8]) -> (f64, Vec<f64>) {
    let (n, m) = (prog.n(), prog.m());
    let cols = m + n;
    // variables (y, x)
    let widen = |left: &Matrix, right: &Matrix| {
        let mut out = Matrix::zeros(left.rows(), cols);
        for i in 0..left.rows() {
            for j in 0..m {
                out.set(i, j, left.get(i, j));
            }
            for j in 0..n {
                out.set(i, m + j, right.get(i, j));
            }
        }
        out
    };
    let ineq = widen(&prog.g_cont, &prog.g);
    let eq_top = widen(&prog.a_cont, &prog.a);
    let mut eq = Matrix::zeros(prog.r() + n, cols);
    for i in 0..prog.r() {
        for j in 0..cols {
            eq.set(i, j, eq_top.get(i, j));
        }
    }
    for i in 0..n {
        eq.set(prog.r() + i, m + i, 1.0);
    }
    let mut eq_rhs = prog.b.clone();
    eq_rhs.extend(as_f64(x_fixed));
    let mut cost = prog.c_cont.clone();
    cost.extend(std::iter::repeat_n(0.0, n));
    let lp = LinearProgram {
        cost,
        ineq,
        ineq_rhs: prog.h.clone(),
        eq,
        eq_rhs,
    };
    let sol = SimplexSolver::default().solve(&lp).unwrap().into_optimal().unwrap();
    (sol.objective, sol.eq_duals[prog.r()..].to_vec())
}

/// `⌊v⌋` with values within 1e-9 (relative) of an integer taken as that
/// integer, matching the declared rounding of cut bounds.
pub fn snapped_floor(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * (1.0 + v.abs()) {
        r as i64
    } else {
        v.floor() as i64
    }
}

pub fn snapped_ceil(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * (1.0 + v.abs()) {
        r as i64
    } else {
        v.ceil() as i64
    }
}

/// Bits of a binary expansion of `K` grid steps: `⌊log₂K⌋ + 1`, or 0.
pub fn expansion_bits(k: i64) -> usize {
    assert!(k >= 0);
    if k == 0 {
        0
    } else {
        64 - (k as u64).leading_zeros() as usize
    }
}

/// Expected master QUBO size for a cut list, recomputed from the bound
/// formulas with the default headroom and `p = 1`.
pub fn expected_master_size(n: usize, cuts: &[Cut]) -> usize {
    if cuts.is_empty() {
        return n;
    }
    let neg = |c: &Cut| c.lambda.iter().filter(|v| **v < 0.0).sum::<f64>();
    let pos = |c: &Cut| c.lambda.iter().filter(|v| **v > 0.0).sum::<f64>();
    let lo = cuts.iter().map(|c| snapped_floor(c.raw_bound + neg(c))).min().unwrap();
    let hi_raw = cuts.iter().map(|c| snapped_ceil(c.raw_bound + pos(c))).max().unwrap();
    let quarter = ((hi_raw - lo) as f64 / 4.0).ceil().max(1.0) as u64;
    let hi = hi_raw + quarter.next_power_of_two() as i64;
    let mut size = n + expansion_bits(hi - lo);
    for c in cuts {
        let eta = snapped_floor(c.raw_bound);
        size += c.penalty_multiplier as usize * expansion_bits(hi - eta - snapped_floor(neg(c)));
    }
    size
}

/// Random cut system with integer sensitivities and bounds.
pub fn random_integer_cuts(rng: &mut impl Rng, n: usize, count: usize) -> Vec<Cut> {
    (0..count)
        .map(|_| {
            let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
            let raw = rng.gen_range(0..=8) as f64;
            Cut {
                lambda,
                raw_bound: raw,
                eta: raw as i64,
                origin_x: vec![0; n],
                penalty_multiplier: 1,
            }
        })
        .collect()
}
