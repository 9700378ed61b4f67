mod common;

use common::{all_bits, qubo_argmin};
use proptest::prelude::*;
use qbd_core::anneal;
use qbd_core::qubo::{encode_bounds, inequality_to_equality, normalize, LinearExpr, PenaltySpec, Qubo, VarId};

fn small_qubo(n: usize, entries: &[(usize, usize, i32)]) -> Qubo {
    let mut q = Qubo::new();
    let vars: Vec<VarId> = (0..n).map(|i| q.add_variable(format!("v{i}"))).collect();
    for &(i, j, v) in entries {
        let (i, j) = (i % n, j % n);
        if i == j {
            q.add_linear(vars[i], v as f64).unwrap();
        } else {
            q.add_quadratic(vars[i], vars[j], v as f64).unwrap();
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn encoding_covers_grid(lo_steps in -500i64..500, k in 0i64..300, p in prop::sample::select(vec![1u32, 2, 3, 4, 8])) {
        let lo = lo_steps as f64 / p as f64;
        let hi = (lo_steps + k) as f64 / p as f64;
        let enc = encode_bounds(lo, hi, p).unwrap();
        let expected_bits = if k == 0 { 0 } else { 64 - (k as u64).leading_zeros() as usize };
        prop_assert_eq!(enc.bit_count, expected_bits);
        let mut seen: Vec<i64> = all_bits(enc.bit_count)
            .map(|b| {
                let steps = (enc.decode(&b) - lo) * p as f64;
                assert!((steps - steps.round()).abs() < 1e-9);
                steps.round() as i64
            })
            .collect();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen, (0..=k).collect::<Vec<_>>());
    }

    #[test]
    fn energy_matches_source_expression(
        coefs in prop::collection::vec(-5.0f64..5.0, 1..6),
        constant in -5.0f64..5.0,
        rhs in -5.0f64..5.0,
        weight in 0.1f64..10.0,
        linear in prop::collection::vec(-3.0f64..3.0, 6),
        state in prop::collection::vec(0u8..=1, 6),
    ) {
        let n = coefs.len();
        let mut q = Qubo::new();
        let vars: Vec<VarId> = (0..n).map(|i| q.add_variable(format!("x{i}"))).collect();
        let mut row = LinearExpr::constant(constant);
        for (&v, &c) in vars.iter().zip(&coefs) {
            row.add_term(v, c);
        }
        for (&v, &c) in vars.iter().zip(&linear) {
            q.add_linear(v, c).unwrap();
        }
        q.penalize_equality(&row, rhs, &PenaltySpec::new(weight, "row").unwrap()).unwrap();
        let t = &state[..n];
        let resid = constant + coefs.iter().zip(t).map(|(c, &b)| c * b as f64).sum::<f64>() - rhs;
        let direct = linear.iter().zip(t).map(|(c, &b)| c * b as f64).sum::<f64>() + weight * resid * resid;
        prop_assert!((q.energy(t) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn normalize_preserves_argmin(entries in prop::collection::vec((0usize..10, 0usize..10, -9i32..9), 1..40)) {
        let q = small_qubo(10, &entries);
        prop_assume!(q.max_abs_coefficient() > 0.0);
        let (nq, scale) = normalize(&q).unwrap();
        prop_assert!((nq.max_abs_coefficient() - 1.0).abs() < 1e-12);
        prop_assert!(scale > 0.0);
        // integer data: ties are exact before scaling and within round-off after
        let (_, before) = qubo_argmin(&q, 1e-9);
        let (_, after) = qubo_argmin(&nq, 1e-9 / scale);
        prop_assert_eq!(before, after);
    }

    /// Small ILPs `min cᵀx s.t. A x ≤ b, E x = e`: the exact QUBO minimum with
    /// a penalty above `Σ|c| + 1` decodes to an ILP optimum.
    #[test]
    fn penalty_reformulation_is_exact(
        n in 1usize..5,
        c in prop::collection::vec(-4i32..=4, 5),
        ineq in prop::collection::vec(prop::collection::vec(-3i32..=3, 5), 0..3),
        eq in prop::collection::vec(prop::collection::vec(-1i32..=1, 5), 0..2),
        anchor in prop::collection::vec(0u8..=1, 5),
        loose in prop::collection::vec(0i32..=2, 3),
    ) {
        let c: Vec<f64> = c[..n].iter().map(|&v| v as f64).collect();
        let x0 = &anchor[..n];
        let row_at = |row: &[i32], x: &[u8]| row[..n].iter().zip(x).map(|(&a, &b)| a as i64 * b as i64).sum::<i64>();
        // right-hand sides chosen so that x0 is feasible
        let ineq: Vec<(Vec<i32>, i64)> = ineq.iter().enumerate().map(|(k, r)| (r.clone(), row_at(r, x0) + loose[k] as i64)).collect();
        let eq: Vec<(Vec<i32>, i64)> = eq.iter().map(|r| (r.clone(), row_at(r, x0))).collect();

        let feasible = |x: &[u8]| ineq.iter().all(|(r, b)| row_at(r, x) <= *b) && eq.iter().all(|(r, e)| row_at(r, x) == *e);
        let obj = |x: &[u8]| c.iter().zip(x).map(|(a, &b)| a * b as f64).sum::<f64>();
        let best = all_bits(n).filter(|x| feasible(x)).map(|x| obj(&x)).fold(f64::INFINITY, f64::min);

        let mut q = Qubo::new();
        let xs: Vec<VarId> = (0..n).map(|i| q.add_variable(format!("x{i}"))).collect();
        for (&v, &ci) in xs.iter().zip(&c) {
            q.add_linear(v, ci).unwrap();
        }
        let weight = c.iter().map(|v| v.abs()).sum::<f64>() + 1.5;
        let pen = PenaltySpec::new(weight, "constraint").unwrap();
        let expr = |row: &[i32]| {
            let mut e = LinearExpr::new();
            for (&v, &a) in xs.iter().zip(&row[..n]) {
                e.add_term(v, a as f64);
            }
            e
        };
        for (k, (row, b)) in ineq.iter().enumerate() {
            let e = expr(row);
            let row_min = e.range().0;
            let (eqrow, _) = inequality_to_equality(&mut q, &e, *b as f64, 0.0, *b as f64 - row_min, 1, &format!("s{k}")).unwrap();
            q.penalize_equality(&eqrow, 0.0, &pen).unwrap();
        }
        for (row, e) in &eq {
            q.penalize_equality(&expr(row), *e as f64, &pen).unwrap();
        }
        prop_assume!(q.num_vars() <= 12);
        let set = anneal::solve_exact(&q, 24).unwrap();
        let (bits, energy) = anneal::pick_best(&set).unwrap();
        let x: Vec<u8> = bits[..n].to_vec();
        prop_assert!(feasible(&x), "decoded {:?} infeasible", x);
        prop_assert!((obj(&x) - best).abs() < 1e-9);
        prop_assert!((energy - best).abs() < 1e-9);
    }
}

#[test]
fn slack_examples() {
    // x ≤ 1 over one binary: both states reach zero energy
    let mut q = Qubo::new();
    let x = q.add_variable("x");
    let row = LinearExpr::new().term(x, 1.0);
    let (eq, enc) = inequality_to_equality(&mut q, &row, 1.0, 0.0, 1.0, 1, "s").unwrap();
    assert_eq!(enc.bit_count, 1);
    q.penalize_equality(&eq, 0.0, &PenaltySpec::new(1.0, "x<=1").unwrap()).unwrap();
    let (min, set) = qubo_argmin(&q, 1e-12);
    assert_eq!(min, 0.0);
    assert_eq!(set, vec![vec![0, 1], vec![1, 0]]);

    // 2x₁ + x₂ ≤ 0: point slack, only the origin is feasible
    let mut q = Qubo::new();
    let a = q.add_variable("a");
    let b = q.add_variable("b");
    let row = LinearExpr::new().term(a, 2.0).term(b, 1.0);
    let (eq, enc) = inequality_to_equality(&mut q, &row, 0.0, 0.0, 0.0, 1, "s").unwrap();
    assert_eq!(enc.bit_count, 0);
    q.penalize_equality(&eq, 0.0, &PenaltySpec::new(1.0, "row").unwrap()).unwrap();
    let (min, set) = qubo_argmin(&q, 1e-12);
    assert_eq!(min, 0.0);
    assert_eq!(set, vec![vec![0, 0]]);

    // slack too narrow for the attainable range is rejected
    let mut q = Qubo::new();
    let a = q.add_variable("a");
    let row = LinearExpr::new().term(a, -3.0);
    assert!(inequality_to_equality(&mut q, &row, 0.0, 0.0, 2.0, 1, "s").is_err());
}

#[test]
fn repeated_penalty_doubles_contribution() {
    let build = |times: usize| {
        let mut q = Qubo::new();
        let a = q.add_variable("a");
        let b = q.add_variable("b");
        let row = LinearExpr::new().term(a, 1.0).term(b, 1.0);
        for _ in 0..times {
            q.penalize_equality(&row, 1.0, &PenaltySpec::new(3.0, "r").unwrap()).unwrap();
        }
        q
    };
    let (once, twice) = (build(1), build(2));
    for bits in all_bits(2) {
        assert!((twice.energy(&bits) - 2.0 * once.energy(&bits)).abs() < 1e-12);
    }
}
