//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use qbd_core::anneal::{self, SamplerConfig};
use qbd_core::bench::{run_bench, write_csv, BenchConfig, SolverConfig};
use qbd_core::benders::{
    alpha_and_slack_bounds, build_master_qubo, run, solve_master_exact, Cut, MasterSolver, RunConfig, StopReason,
};
use qbd_core::lp::{compute_sensitivities, solve_lp};
use qbd_core::milp::{check_feasibility, evaluate, split};
use qbd_core::qubo::encode_bounds;
use qbd_core::reference::{argmin_set, enumerate_objectives, reference_solve};
use qbd_core::tnep::{generate, generate_with, scale_units, to_milp, GeneratorParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 20 instances with 3 to 8 buses, ExactMaster Benders against brute force.
fn exact_chain() -> Outcome {
    let mut benders_time = 0.0;
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let buses = 3 + (k % 6) as usize;
        let prog = to_milp(&generate(buses, 100 + k).unwrap()).unwrap();
        let reference = reference_solve(&prog).unwrap().objective;
        let t = Instant::now();
        let res = run(&prog, &RunConfig::default()).unwrap();
        benders_time += t.elapsed().as_secs_f64();
        ensure(res.stop_reason == StopReason::GapClosed, || {
            format!("{buses} buses seed {}: stopped with {:?}", 100 + k, res.stop_reason)
        })?;
        let objective = evaluate(&prog, &res.best).unwrap();
        let err = (objective - reference).abs() / reference.abs();
        worst = worst.max(err);
        ensure(err <= 0.05, || format!("{buses} buses: objective {objective} vs {reference}"))?;
    }
    ensure(benders_time < 10.0, || format!("took {benders_time:.2} s"))?;
    Ok(format!("20/20 GapClosed, max relative error {worst:.1e}, {benders_time:.2} s"))
}

/// Exact minimizer of the master QUBO, with `P` doubled until its ground
/// state satisfies every cut, against enumeration of the master problem.
fn qubo_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut systems = 0;
    let mut max_penalty = 0.0f64;
    let mut attempts = 0;
    while systems < 100 {
        attempts += 1;
        assert!(attempts < 100_000, "could not draw enough small cut systems");
        let n = rng.gen_range(1..=6);
        let count = rng.gen_range(1..=3);
        let cuts = random_integer_cuts(&mut rng, n, count);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let mut cfg = RunConfig {
            relax_headroom: Some(rng.gen_range(0..=2)),
            ..RunConfig::default()
        };
        let (bounds, _) = alpha_and_slack_bounds(&cuts, &cfg).unwrap();
        cfg.penalty = Some(1.0);
        let size = build_master_qubo(&cuts, Some(&bounds), &c, &cfg).unwrap().size.total();
        if size > 16 {
            continue;
        }
        let (_, _, optimum) = solve_master_exact(&cuts, &c, bounds.lo as f64).unwrap();

        let mut penalty = 1.0 / 64.0;
        let decoded = loop {
            cfg.penalty = Some(penalty);
            let mq = build_master_qubo(&cuts, Some(&bounds), &c, &cfg).unwrap();
            let set = anneal::solve_exact(&mq.qubo, 24).unwrap();
            let (bits, _) = anneal::pick_best(&set).unwrap();
            let (x, alpha) = mq.decode(bits);
            let alpha = alpha.unwrap();
            let satisfied = cuts.iter().all(|cut| alpha >= cut.value_at(&x) - 1e-9);
            if satisfied {
                break dot(&c, &as_f64(&x)) + alpha;
            }
            penalty *= 2.0;
            ensure(penalty < 1e6, || format!("no stable penalty for {cuts:?}"))?;
        };
        max_penalty = max_penalty.max(penalty);
        ensure((decoded - optimum).abs() < 1e-9, || {
            format!("system {systems}: QUBO gives {decoded}, enumeration {optimum}; cuts {cuts:?}, c {c:?}")
        })?;
        systems += 1;
    }
    Ok(format!("100/100 agree, largest stable P = {max_penalty}"))
}

/// Enumerated encodings cover exactly the target grid.
fn encoding_coverage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..500 {
        let p = [1u32, 2, 4][rng.gen_range(0..3)];
        let lo_steps: i64 = rng.gen_range(-200..200);
        let k: i64 = rng.gen_range(0..=64 * p as i64);
        let lo = lo_steps as f64 / p as f64;
        let hi = (lo_steps + k) as f64 / p as f64;
        let enc = encode_bounds(lo, hi, p).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for bits in all_bits(enc.bit_count) {
            let v = enc.decode(&bits);
            let steps = (v - lo) * p as f64;
            ensure((steps - steps.round()).abs() < 1e-9, || format!("case {case}: off-grid value {v}"))?;
            seen.insert(steps.round() as i64);
        }
        let expected: std::collections::BTreeSet<i64> = (0..=k).collect();
        ensure(seen == expected, || format!("case {case}: ({lo}, {hi}, {p}) covers {seen:?}"))?;
    }
    Ok("500/500 grids covered exactly".into())
}

/// `−Gᵀμ − Aᵀν` against the duals of explicit fixing rows.
fn sensitivity_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut by_duals = 0;
    let mut by_cut_values = 0;
    for case in 0..100 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let r = rng.gen_range(0..=1);
        let extra = rng.gen_range(1..=3);
        let prog = random_program(&mut rng, n, m, extra, r);
        let (_, sub) = split(&prog);
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let sol = solve_lp(&sub, &x).unwrap();
        let lambda = compute_sensitivities(&sub, &sol).unwrap().lambda;
        let v = sol.optimal().unwrap().objective;
        let (v_fix, lambda_fix) = explicit_fixing_lambda(&prog, &x);
        ensure((v - v_fix).abs() < 1e-6, || format!("case {case}: values {v} vs {v_fix}"))?;
        if lambda.iter().zip(&lambda_fix).all(|(a, b)| (a - b).abs() < 1e-6) {
            by_duals += 1;
            continue;
        }
        for xp in all_bits(n) {
            let d: Vec<f64> = xp.iter().zip(&x).map(|(a, b)| *a as f64 - *b as f64).collect();
            let (c1, c2) = (v + dot(&lambda, &d), v_fix + dot(&lambda_fix, &d));
            ensure((c1 - c2).abs() < 1e-6, || {
                format!("case {case}: λ {lambda:?} vs {lambda_fix:?} give cut values {c1} and {c2} at {xp:?}")
            })?;
        }
        by_cut_values += 1;
    }
    Ok(format!("100/100 ({by_duals} identical duals, {by_cut_values} identical cut values)"))
}

/// Every ExactMaster lower bound is below the optimum.
fn lower_bound_soundness() -> Outcome {
    let mut checked = 0;
    for buses in 3..=6 {
        for s in 0..4u64 {
            let prog = to_milp(&generate(buses, 200 + s).unwrap()).unwrap();
            let optimum = reference_solve(&prog).unwrap().objective;
            let res = run(&prog, &RunConfig::default()).unwrap();
            for rec in &res.records {
                if let Some(lb) = rec.lower_bound {
                    ensure(lb <= optimum + 1e-6, || {
                        format!("{buses} buses seed {s} iteration {}: z_lo {lb} > {optimum}", rec.iteration)
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} lower bounds on 16 instances, none above the optimum"))
}

/// SA-driven Benders with 100 reads and 100 sweeps on small instances.
fn sa_success() -> Outcome {
    let cfg = BenchConfig {
        buses: vec![3, 4],
        instance_seeds: vec![0, 1],
        runs: 100,
        master_seed: 6,
        configurations: vec![SolverConfig {
            name: "sa".into(),
            sampler: MasterSolver::Sa(SamplerConfig {
                reads: 100,
                sweeps: 100,
                seed: 0,
                beta_range: None,
            }),
            runs: None,
            penalty_scale: None,
        }],
        ..BenchConfig::default()
    };
    let out = run_bench(&cfg).unwrap();
    let mut lines = Vec::new();
    let mut worst: f64 = 1.0;
    for buses in [3usize, 4] {
        for s in [0u64, 1] {
            let recs: Vec<_> = out
                .records
                .iter()
                .filter(|r| r.buses == buses && r.instance_seed == s)
                .collect();
            ensure(recs.len() == 100, || format!("{} records", recs.len()))?;
            let rate = recs.iter().filter(|r| r.success).count() as f64 / recs.len() as f64;
            worst = worst.min(rate);
            lines.push(format!("{buses}b/s{s}: {rate:.2}"));
        }
    }
    ensure(worst >= 0.7, || format!("success rates {}", lines.join(", ")))?;
    Ok(format!("success rates {}", lines.join(", ")))
}

/// With `q_max = n + αbits` the second master QUBO never fits.
fn qubo_budget_gate() -> Outcome {
    let mut runs = 0;
    for buses in [3usize, 4, 5] {
        for s in 0..3u64 {
            let prog = to_milp(&generate(buses, 300 + s).unwrap()).unwrap();
            let probe = run(
                &prog,
                &RunConfig {
                    max_iterations: 1,
                    ..RunConfig::default()
                },
            )
            .unwrap();
            let (bounds, _) = alpha_and_slack_bounds(&probe.cuts, &RunConfig::default()).unwrap();
            let alpha_bits = expansion_bits(bounds.hi - bounds.lo);
            let q_max = prog.n() + alpha_bits;
            let samplers = [
                MasterSolver::Sa(SamplerConfig::default()),
                MasterSolver::Exact { max_bits: 24 },
            ];
            for sampler in samplers {
                let res = run(
                    &prog,
                    &RunConfig {
                        q_max,
                        sampler,
                        seed: s,
                        ..RunConfig::default()
                    },
                )
                .unwrap();
                ensure(
                    res.stop_reason == StopReason::QuboBudget && res.records.len() == 1 && res.last_iteration == 2,
                    || {
                        format!(
                            "{buses} buses seed {s}: {:?} after {} records",
                            res.stop_reason,
                            res.records.len()
                        )
                    },
                )?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs}/{runs} runs stopped with QuboBudget at iteration 2"))
}

/// Unit scaling keeps the set of optimal line selections.
fn scaling_invariance() -> Outcome {
    let mut rescaled = 0;
    for k in 0..20u64 {
        let params = GeneratorParams {
            line_unit_cost: if k % 2 == 0 { (3.0, 30.0) } else { (300.0, 3000.0) },
            ..GeneratorParams::default()
        };
        let prog = to_milp(&generate_with(3 + (k % 4) as usize, 400 + k, &params).unwrap()).unwrap();
        let (scaled, s) = scale_units(&prog, 4.0).unwrap();
        if s.energy != 1.0 {
            rescaled += 1;
        }
        let before = argmin_set(&enumerate_objectives(&prog).unwrap(), prog.n(), 1e-9);
        let after = argmin_set(&enumerate_objectives(&scaled).unwrap(), prog.n(), 1e-9);
        ensure(before == after, || format!("instance {k}: {before:?} vs {after:?}"))?;
    }
    Ok(format!("20/20 argmin sets equal ({rescaled} instances rescaled)"))
}

/// Two benchmark executions with the same master seed.
fn bench_determinism() -> Outcome {
    let cfg = BenchConfig {
        buses: vec![3, 4],
        instance_seeds: vec![0, 1],
        runs: 5,
        master_seed: 42,
        ..BenchConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for k in 0..2 {
        let out = run_bench(&cfg).unwrap();
        let path = dir.path().join(format!("results{k}.csv"));
        write_csv(&path, &out.records).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    ensure(files[0] == files[1], || "results.csv differs between executions".into())?;
    Ok(format!("results.csv identical ({} bytes)", files[0].len()))
}

/// Recorded sizes match the bit-count formula on the cuts present at each
/// iteration and never shrink.
fn qubo_growth() -> Outcome {
    let mut runs = 0;
    let mut iterations = 0;
    for buses in [3usize, 4, 5] {
        for s in 0..3u64 {
            let prog = to_milp(&generate(buses, 500 + s).unwrap()).unwrap();
            for sampler in [
                MasterSolver::ExactMaster,
                MasterSolver::Exact { max_bits: 24 },
                MasterSolver::Sa(SamplerConfig::default()),
            ] {
                let res = run(
                    &prog,
                    &RunConfig {
                        sampler,
                        seed: s,
                        ..RunConfig::default()
                    },
                )
                .unwrap();
                // replay the cut list: each new x adds the next cut, a revisit
                // bumps the multiplier of its cut
                let mut cuts: Vec<Cut> = Vec::new();
                let mut next = 0;
                let mut prev = 0;
                for rec in &res.records {
                    let expected = expected_master_size(prog.n(), &cuts);
                    ensure(rec.qubo_size == expected, || {
                        format!("{buses} buses seed {s} iteration {}: size {} vs {expected}", rec.iteration, rec.qubo_size)
                    })?;
                    ensure(rec.qubo_size == rec.x.len() + rec.alpha_bits + rec.slack_bits, || {
                        "size does not add up".into()
                    })?;
                    ensure(rec.qubo_size >= prev, || format!("size shrank at iteration {}", rec.iteration))?;
                    prev = rec.qubo_size;
                    if rec.duplicate {
                        let j = cuts.iter().position(|c| c.origin_x == rec.x).unwrap();
                        cuts[j].penalty_multiplier += 1;
                    } else {
                        let mut cut = res.cuts[next].clone();
                        cut.penalty_multiplier = 1;
                        cuts.push(cut);
                        next += 1;
                    }
                    iterations += 1;
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs, {iterations} iterations checked"))
}

/// Sanity check of the 2-bus fixture so the suite also covers the smallest case.
fn two_bus_fixture() -> Outcome {
    let prog = to_milp(&two_bus()).unwrap();
    let res = run(&prog, &RunConfig::default()).unwrap();
    let z = evaluate(&prog, &res.best).unwrap();
    ensure((z - 15.0).abs() < 1e-9 && res.records.len() <= 3, || format!("objective {z}"))?;
    ensure(check_feasibility(&prog, &res.best, 1e-9).unwrap().feasible, || "infeasible".into())?;
    Ok(format!("objective {z} after {} iterations", res.records.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1  exact-chain correctness", exact_chain),
        ("2  QUBO reformulation exactness", qubo_exactness),
        ("3  encoding coverage", encoding_coverage),
        ("4  sensitivity equivalence", sensitivity_equivalence),
        ("5  lower-bound soundness", lower_bound_soundness),
        ("6  SA success rate", sa_success),
        ("7  QUBO budget gate", qubo_budget_gate),
        ("8  scaling invariance", scaling_invariance),
        ("9  benchmark determinism", bench_determinism),
        ("10 monotone QUBO growth", qubo_growth),
        ("-- two-bus fixture", two_bus_fixture),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
