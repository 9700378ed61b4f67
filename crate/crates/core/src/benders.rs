//! Benders decomposition with a QUBO master problem.
//!
//! Each iteration compiles the master problem (binaries `x`, the surrogate
//! `α` for the continuous cost, and every optimality cut so far) into a QUBO,
//! samples it, fixes the sampled `x` in the LP subproblem and turns the
//! subproblem duals into a new cut `α − λᵀx ≥ η`. Cut right-hand sides are
//! floored to integers, `α` and each cut's slack are encoded on integer grids
//! whose bounds are recomputed from the worst case of all cuts every
//! iteration, and a revisited `x` re-adds its cut with a fresh slack register.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anneal::{self, SamplerConfig, EXACT_MAX_BITS};
use crate::error::{Error, Result};
use crate::lp::{compute_sensitivities, solve_lp, LpSolution, OptimalLp, Sensitivity};
use crate::matrix::dot;
use crate::milp::{bits_to_f64, split, Assignment, MixedBinaryProgram};
use crate::qubo::{encode_bounds, inequality_to_equality, BinaryEncoding, LinearExpr, PenaltySpec, Qubo, VarId};
use crate::seed;

/// Tolerance under which a cut bound is treated as its nearest integer
/// before flooring, so that LP round-off does not cost a whole unit.
const ROUNDING_SNAP: f64 = 1e-9;

/// One optimality cut `α ≥ raw_bound + λᵀx`, encoded as `α − λᵀx ≥ eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub lambda: Vec<f64>,
    /// `c_contᵀy^j − λᵀx^j`
    pub raw_bound: f64,
    /// `⌊raw_bound⌋`
    pub eta: i64,
    pub origin_x: Vec<u8>,
    /// Number of times this cut has been added; each copy owns a slack register.
    pub penalty_multiplier: u32,
}

impl Cut {
    /// Right-hand side `C_j(x)` of the cut.
    pub fn value_at(&self, x: &[u8]) -> f64 {
        self.raw_bound + dot(&self.lambda, &bits_to_f64(x))
    }

    /// Sum of the negative entries of λ.
    pub fn lambda_neg(&self) -> f64 {
        self.lambda.iter().map(|v| v.min(0.0)).sum()
    }

    /// Sum of the positive entries of λ.
    pub fn lambda_pos(&self) -> f64 {
        self.lambda.iter().map(|v| v.max(0.0)).sum()
    }
}

fn floor_snapped(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= ROUNDING_SNAP * (1.0 + v.abs()) {
        r as i64
    } else {
        v.floor() as i64
    }
}

fn ceil_snapped(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= ROUNDING_SNAP * (1.0 + v.abs()) {
        r as i64
    } else {
        v.ceil() as i64
    }
}

pub fn make_cut(sol: &LpSolution, lambda: &Sensitivity, x_i: &[u8]) -> Result<Cut> {
    let opt = sol.optimal()?;
    if lambda.lambda.len() != x_i.len() {
        return Err(Error::Dimension {
            what: "sensitivity",
            expected: x_i.len(),
            got: lambda.lambda.len(),
        });
    }
    if lambda.lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sensitivity"));
    }
    let raw_bound = opt.objective - dot(&lambda.lambda, &bits_to_f64(x_i));
    Ok(Cut {
        lambda: lambda.lambda.clone(),
        raw_bound,
        eta: floor_snapped(raw_bound),
        origin_x: x_i.to_vec(),
        penalty_multiplier: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub lo: i64,
    /// Upper bound including `relax_headroom`.
    pub hi: i64,
    pub relax_headroom: i64,
}

/// Integer slack range of one cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackInterval {
    pub lo: i64,
    pub hi: i64,
}

/// Which master solver drives the iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MasterSolver {
    /// Exhaustive enumeration of the master QUBO.
    Exact {
        #[serde(default = "default_exact_bits")]
        max_bits: usize,
    },
    /// Simulated annealing on the master QUBO.
    #[serde(rename = "SA")]
    Sa(SamplerConfig),
    /// Classical enumeration of the master problem itself, no QUBO.
    ExactMaster,
}

fn default_exact_bits() -> usize {
    EXACT_MAX_BITS
}

impl MasterSolver {
    pub fn uses_qubo(&self) -> bool {
        !matches!(self, MasterSolver::ExactMaster)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub epsilon_rel: f64,
    /// Optional absolute gap; either criterion stops the run.
    pub epsilon_abs: Option<f64>,
    pub q_max: usize,
    pub precision_p: u32,
    /// Fixed penalty weight. When absent, `penalty_scale / max(1, |v¹|)` with
    /// `v¹` the first subproblem value.
    pub penalty: Option<f64>,
    pub penalty_scale: f64,
    pub alpha_init: Option<(i64, i64)>,
    /// Headroom above the worst-case `α` bound; default is the next power of
    /// two above a quarter of the bound width.
    pub relax_headroom: Option<i64>,
    pub max_iterations: usize,
    pub sampler: MasterSolver,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon_rel: 0.05,
            epsilon_abs: None,
            q_max: 160,
            precision_p: 1,
            penalty: None,
            penalty_scale: 1.0,
            alpha_init: None,
            relax_headroom: None,
            max_iterations: 100,
            sampler: MasterSolver::ExactMaster,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.epsilon_rel > 0.0) {
            return bad(format!("epsilon_rel must be positive, got {}", self.epsilon_rel));
        }
        if self.precision_p == 0 {
            return bad("precision_p must be positive".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0) {
                return bad(format!("penalty must be positive, got {p}"));
            }
        }
        if !(self.penalty_scale > 0.0) {
            return bad("penalty_scale must be positive".into());
        }
        if let Some(h) = self.relax_headroom {
            if h < 0 {
                return bad("relax_headroom must be nonnegative".into());
            }
        }
        let mut budget = n;
        if let Some((lo, hi)) = self.alpha_init {
            if lo > hi {
                return bad(format!("alpha_init ({lo}, {hi}) is empty"));
            }
            budget += encode_bounds(lo as f64, hi as f64, self.precision_p)?.bit_count;
        }
        if self.q_max < budget {
            return bad(format!("q_max {} below the {budget} bits needed at iteration 1", self.q_max));
        }
        if let MasterSolver::Sa(s) = &self.sampler {
            s.validate()?;
        }
        Ok(())
    }
}

fn default_headroom(span: i64) -> i64 {
    let quarter = (span.max(0) as u64).div_ceil(4).max(1);
    quarter.next_power_of_two() as i64
}

/// Worst-case `α` bounds over all cuts and the slack range of each cut.
///
/// `α̲ = min_j ⌊s̲_j + λ_−^j⌋`, `ᾱ = max_j ⌈s̲_j + λ_+^j⌉ + headroom`, and cut
/// `j` gets slack `[0, ᾱ − η_j − ⌊λ_−^j⌋]`. A configured `alpha_init` widens
/// the bounds.
pub fn alpha_and_slack_bounds(cuts: &[Cut], cfg: &RunConfig) -> Result<(AlphaBounds, Vec<SlackInterval>)> {
    let from_cuts = cuts.iter().fold(None, |acc: Option<(i64, i64)>, cut| {
        let lo = floor_snapped(cut.raw_bound + cut.lambda_neg());
        let hi = ceil_snapped(cut.raw_bound + cut.lambda_pos());
        Some(match acc {
            None => (lo, hi),
            Some((a, b)) => (a.min(lo), b.max(hi)),
        })
    });
    let (lo, hi_raw) = match (from_cuts, cfg.alpha_init) {
        (Some((a, b)), Some((c, d))) => (a.min(c), b.max(d)),
        (Some(ab), None) => ab,
        (None, Some((c, d))) => {
            return Ok((
                AlphaBounds {
                    lo: c,
                    hi: d,
                    relax_headroom: 0,
                },
                vec![],
            ))
        }
        (None, None) => return Err(Error::NoCuts),
    };
    let headroom = cfg
        .relax_headroom
        .unwrap_or_else(|| default_headroom(hi_raw - lo));
    let hi = hi_raw + headroom;
    let slacks = cuts
        .iter()
        .map(|cut| SlackInterval {
            lo: 0,
            hi: hi - cut.eta - floor_snapped(cut.lambda_neg()),
        })
        .collect();
    Ok((
        AlphaBounds {
            lo,
            hi,
            relax_headroom: headroom,
        },
        slacks,
    ))
}

/// Bit accounting of a master QUBO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboSize {
    pub n: usize,
    pub alpha_bits: usize,
    pub slack_bits: usize,
}

impl QuboSize {
    pub fn total(&self) -> usize {
        self.n + self.alpha_bits + self.slack_bits
    }
}

/// Size of the master QUBO without building it.
pub fn master_size(n: usize, cuts: &[Cut], bounds: Option<&AlphaBounds>, p: u32) -> Result<QuboSize> {
    let Some(bounds) = bounds else {
        return Ok(QuboSize {
            n,
            alpha_bits: 0,
            slack_bits: 0,
        });
    };
    let alpha_bits = encode_bounds(bounds.lo as f64, bounds.hi as f64, p)?.bit_count;
    let mut slack_bits = 0;
    for cut in cuts {
        let hi = bounds.hi - cut.eta - floor_snapped(cut.lambda_neg());
        let bits = encode_bounds(0.0, hi.max(0) as f64, p)?.bit_count;
        slack_bits += bits * cut.penalty_multiplier as usize;
    }
    Ok(QuboSize {
        n,
        alpha_bits,
        slack_bits,
    })
}

/// A master QUBO with the variable layout needed to decode samples.
#[derive(Debug, Clone)]
pub struct MasterQubo {
    pub qubo: Qubo,
    pub x_vars: Vec<VarId>,
    pub alpha: Option<(Vec<VarId>, BinaryEncoding)>,
    pub size: QuboSize,
}

impl MasterQubo {
    /// `(x, α)` from a sample over this QUBO.
    pub fn decode(&self, bits: &[u8]) -> (Vec<u8>, Option<f64>) {
        let x = self.x_vars.iter().map(|v| bits[v.0]).collect();
        let alpha = self.alpha.as_ref().map(|(vars, enc)| {
            let b: Vec<u8> = vars.iter().map(|v| bits[v.0]).collect();
            enc.decode(&b)
        });
        (x, alpha)
    }

    /// Master objective `cᵀx + α` without penalty terms.
    pub fn objective(&self, c: &[f64], bits: &[u8]) -> f64 {
        let (x, alpha) = self.decode(bits);
        dot(c, &bits_to_f64(&x)) + alpha.unwrap_or(0.0)
    }
}

/// Builds `cᵀx + α(β) + Σ_j Σ_copies P·(α(β) − λ_jᵀx − η_j − σ_j(t))²`.
///
/// `bounds = None` leaves `α` out (first iteration without an initial `α`
/// range) and requires an empty cut list. `penalty` must be set when cuts are
/// present.
pub fn build_master_qubo(
    cuts: &[Cut],
    bounds: Option<&AlphaBounds>,
    c: &[f64],
    cfg: &RunConfig,
) -> Result<MasterQubo> {
    let p = cfg.precision_p;
    let size = master_size(c.len(), cuts, bounds, p)?;
    if size.total() > cfg.q_max {
        return Err(Error::TooManyVariables {
            vars: size.total(),
            limit: cfg.q_max,
        });
    }
    let mut q = Qubo::new();
    let x_vars: Vec<VarId> = (0..c.len()).map(|i| q.add_variable(format!("x[{i}]"))).collect();
    for (&v, &ci) in x_vars.iter().zip(c) {
        q.add_linear(v, ci)?;
    }
    let Some(bounds) = bounds else {
        if !cuts.is_empty() {
            return Err(Error::InvalidArgument("cuts need an alpha range".into()));
        }
        return Ok(MasterQubo {
            qubo: q,
            x_vars,
            alpha: None,
            size,
        });
    };

    let enc = encode_bounds(bounds.lo as f64, bounds.hi as f64, p)?;
    let alpha_vars = q.add_register("alpha", enc.bit_count);
    let mut alpha_expr = LinearExpr::new();
    alpha_expr.add_encoding(&alpha_vars, &enc, 1.0);
    q.add_expr(&alpha_expr)?;

    if !cuts.is_empty() {
        let weight = cfg
            .penalty
            .ok_or_else(|| Error::InvalidArgument("penalty weight not resolved".into()))?;
        for (j, cut) in cuts.iter().enumerate() {
            // α − λᵀx ≥ η  ⇔  −α + λᵀx ≤ −η
            let mut row = LinearExpr::new();
            row.add_encoding(&alpha_vars, &enc, -1.0);
            for (&v, &l) in x_vars.iter().zip(&cut.lambda) {
                row.add_term(v, l);
            }
            let slack_hi = bounds.hi - cut.eta - floor_snapped(cut.lambda_neg());
            let pen = PenaltySpec::new(weight, format!("cut {j}"))?;
            for copy in 0..cut.penalty_multiplier {
                let (eq, _) = inequality_to_equality(
                    &mut q,
                    &row,
                    -(cut.eta as f64),
                    0.0,
                    slack_hi as f64,
                    p,
                    &format!("s{j}.{copy}"),
                )?;
                q.penalize_equality(&eq, 0.0, &pen)?;
            }
        }
    }
    debug_assert_eq!(q.num_vars(), size.total());
    Ok(MasterQubo {
        qubo: q,
        x_vars,
        alpha: Some((alpha_vars, enc)),
        size,
    })
}

/// Enumerates `x ∈ {0,1}ⁿ` with `α(x) = max(alpha_lo, max_j C_j(x))` and
/// returns the minimizer of `cᵀx + α(x)` as `(x, α, cᵀx + α)`. Ties go to the
/// lexicographically smallest `x`.
pub fn solve_master_exact(cuts: &[Cut], c: &[f64], alpha_lo: f64) -> Result<(Vec<u8>, f64, f64)> {
    let n = c.len();
    if n > EXACT_MAX_BITS {
        return Err(Error::TooManyVariables {
            vars: n,
            limit: EXACT_MAX_BITS,
        });
    }
    let mut best: Option<(Vec<u8>, f64, f64)> = None;
    let mut x = vec![0u8; n];
    for mask in 0..(1u64 << n) {
        // x_0 is the most significant bit, so masks ascend lexicographically
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ((mask >> (n - 1 - i)) & 1) as u8;
        }
        let alpha = cuts
            .iter()
            .map(|cut| cut.value_at(&x))
            .fold(alpha_lo, f64::max);
        let obj = dot(c, &bits_to_f64(&x)) + alpha;
        let better = match &best {
            None => true,
            Some((_, _, b)) => obj < b - 1e-9 * (1.0 + b.abs()),
        };
        if better {
            best = Some((x.clone(), alpha, obj));
        }
    }
    Ok(best.expect("at least one point enumerated"))
}

/// Re-adds the cut first generated at `x_i`, with its own slack register.
/// Returns the index of that cut.
pub fn handle_duplicate(x_i: &[u8], cuts: &mut [Cut], history: &HashMap<Vec<u8>, usize>) -> Result<usize> {
    let &j = history
        .get(x_i)
        .ok_or_else(|| Error::InvalidArgument(format!("{x_i:?} was not visited before")))?;
    cuts[j].penalty_multiplier += 1;
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    GapClosed,
    QuboBudget,
    IterationBudget,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::GapClosed => "GapClosed",
            StopReason::QuboBudget => "QuboBudget",
            StopReason::IterationBudget => "IterationBudget",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub x: Vec<u8>,
    /// Decoded `α`; absent when the master ignored it.
    pub alpha: Option<f64>,
    /// `cᵀx + α`, without penalty terms.
    pub lower_bound: Option<f64>,
    /// `cᵀx + c_contᵀy`
    pub upper_bound: f64,
    pub qubo_size: usize,
    pub alpha_bits: usize,
    pub slack_bits: usize,
    pub master_time: f64,
    pub sp_time: f64,
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_x: Vec<u8>,
    pub objective: f64,
    pub gap: Option<f64>,
    pub stop_reason: StopReason,
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Best feasible assignment seen over all iterations.
    pub best: Assignment,
    pub best_objective: f64,
    /// `z̄` of the last completed iteration.
    pub upper_bound: f64,
    /// `z̲` of the last completed iteration.
    pub lower_bound: Option<f64>,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Iteration index at which the loop stopped; one past the last record
    /// when the QUBO budget was hit.
    pub last_iteration: usize,
    pub cuts: Vec<Cut>,
    pub penalty: Option<f64>,
    pub total_time: f64,
}

impl RunResult {
    pub fn gap(&self) -> Option<f64> {
        self.lower_bound.map(|lb| relative_gap(self.upper_bound, lb))
    }

    /// Accumulated sampler and subproblem time.
    pub fn solve_time(&self) -> f64 {
        self.records.iter().map(|r| r.master_time + r.sp_time).sum()
    }

    pub fn trace(&self) -> RunTrace {
        RunTrace {
            iterations: self.records.clone(),
            summary: RunSummary {
                best_x: self.best.x.clone(),
                objective: self.best_objective,
                gap: self.gap(),
                stop_reason: self.stop_reason,
                total_time: self.total_time,
            },
        }
    }
}

pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    (upper - lower) / upper.abs().max(1.0)
}

struct SubproblemOutcome {
    opt: OptimalLp,
    sens: Sensitivity,
}

pub fn run(prog: &MixedBinaryProgram, cfg: &RunConfig) -> Result<RunResult> {
    prog.validate()?;
    cfg.validate(prog.n())?;
    let started = Instant::now();
    let (master, sub) = split(prog);
    let c = &master.c;
    let n = master.n();

    let mut cfg = cfg.clone();
    let mut cuts: Vec<Cut> = Vec::new();
    let mut history: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut cache: HashMap<Vec<u8>, SubproblemOutcome> = HashMap::new();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut incumbent: Option<(f64, Assignment)> = None;
    let mut upper = f64::INFINITY;
    let mut lower: Option<f64> = None;
    let mut stop = StopReason::IterationBudget;
    let mut last_iteration = 0;

    for i in 1..=cfg.max_iterations {
        last_iteration = i;
        let bounds = if cuts.is_empty() && cfg.alpha_init.is_none() {
            None
        } else {
            Some(alpha_and_slack_bounds(&cuts, &cfg)?.0)
        };
        let size = master_size(n, &cuts, bounds.as_ref(), cfg.precision_p)?;
        let capacity = match cfg.sampler {
            MasterSolver::ExactMaster => usize::MAX,
            MasterSolver::Exact { max_bits } => cfg.q_max.min(max_bits),
            MasterSolver::Sa(_) => cfg.q_max,
        };
        if size.total() > capacity {
            stop = StopReason::QuboBudget;
            break;
        }

        let t_master = Instant::now();
        let (x, alpha, master_time) = match cfg.sampler {
            MasterSolver::ExactMaster => {
                let alpha_lo = bounds.map_or(0.0, |b| b.lo as f64);
                let (x, alpha, _) = solve_master_exact(&cuts, c, alpha_lo)?;
                let alpha = bounds.map(|_| alpha);
                (x, alpha, t_master.elapsed().as_secs_f64())
            }
            MasterSolver::Exact { max_bits } => {
                let mq = build_master_qubo(&cuts, bounds.as_ref(), c, &cfg)?;
                let set = anneal::solve_exact(&mq.qubo, max_bits)?;
                let (bits, _) = anneal::pick_best(&set)?;
                let (x, alpha) = mq.decode(bits);
                (x, alpha, set.sampler_time)
            }
            MasterSolver::Sa(sa) => {
                let mq = build_master_qubo(&cuts, bounds.as_ref(), c, &cfg)?;
                let sa = SamplerConfig {
                    seed: seed::derive(cfg.seed, &[sa.seed, i as u64]),
                    ..sa
                };
                let set = anneal::solve_sa(&mq.qubo, &sa)?;
                let (bits, _) = anneal::pick_best(&set)?;
                let (x, alpha) = mq.decode(bits);
                (x, alpha, set.sampler_time)
            }
        };

        let duplicate = history.contains_key(&x);
        let t_sp = Instant::now();
        if !cache.contains_key(&x) {
            let sol = solve_lp(&sub, &x)?;
            let sens = match &sol {
                LpSolution::Optimal(_) => compute_sensitivities(&sub, &sol)?,
                LpSolution::Infeasible => return Err(Error::InfeasibleSubproblem(x)),
                LpSolution::Unbounded => return Err(Error::Unbounded),
            };
            let opt = sol.into_optimal()?;
            cache.insert(x.clone(), SubproblemOutcome { opt, sens });
        }
        let outcome = &cache[&x];
        let sp_time = t_sp.elapsed().as_secs_f64();

        let cx = dot(c, &bits_to_f64(&x));
        let z_up = cx + outcome.opt.objective;
        // without binaries the subproblem is the whole problem
        let z_lo = if n == 0 { Some(z_up) } else { alpha.map(|a| cx + a) };
        if incumbent.as_ref().is_none_or(|(best, _)| z_up < *best) {
            incumbent = Some((
                z_up,
                Assignment {
                    x: x.clone(),
                    y: outcome.opt.y.clone(),
                },
            ));
        }
        if cfg.penalty.is_none() {
            cfg.penalty = Some(cfg.penalty_scale / outcome.opt.objective.abs().max(1.0));
        }

        if duplicate {
            handle_duplicate(&x, &mut cuts, &history)?;
        } else {
            let cut = make_cut(
                &LpSolution::Optimal(outcome.opt.clone()),
                &outcome.sens,
                &x,
            )?;
            history.insert(x.clone(), cuts.len());
            cuts.push(cut);
        }

        log::debug!(
            "iteration {i}: x={x:?} z_up={z_up:.6} z_lo={z_lo:?} size={}",
            size.total()
        );
        records.push(IterationRecord {
            iteration: i,
            x,
            alpha,
            lower_bound: z_lo,
            upper_bound: z_up,
            qubo_size: size.total(),
            alpha_bits: size.alpha_bits,
            slack_bits: size.slack_bits,
            master_time,
            sp_time,
            duplicate,
        });
        upper = z_up;
        lower = z_lo;

        if let Some(lb) = lower {
            let closed_rel = relative_gap(upper, lb) <= cfg.epsilon_rel;
            let closed_abs = cfg.epsilon_abs.is_some_and(|e| upper - lb <= e);
            if closed_rel || closed_abs {
                stop = StopReason::GapClosed;
                break;
            }
        }
    }

    let (best_objective, best) = incumbent.ok_or(Error::InvalidArgument(
        "run stopped before the first iteration completed".into(),
    ))?;
    Ok(RunResult {
        best,
        best_objective,
        upper_bound: upper,
        lower_bound: lower,
        records,
        stop_reason: stop,
        last_iteration,
        cuts,
        penalty: cfg.penalty,
        total_time: started.elapsed().as_secs_f64(),
    })
}
