//! Benchmark harness: solver configurations × instances × runs, success
//! judged on the original program against a brute-force reference.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::SamplerConfig;
use crate::benders::{run, MasterSolver, RunConfig};
use crate::error::{Error, Result};
use crate::milp::{check_feasibility, evaluate, MixedBinaryProgram, FEASIBILITY_TOL};
use crate::reference::{reference_solve, REFERENCE_MAX_BITS};
use crate::seed;
use crate::tnep::{generate_with, scale_units, to_milp, GeneratorParams, UnitScale};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "QBD_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub name: String,
    pub sampler: MasterSolver,
    /// Overrides [`BenchConfig::runs`], e.g. 1 for deterministic solvers.
    #[serde(default)]
    pub runs: Option<usize>,
    #[serde(default)]
    pub penalty_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub buses: Vec<usize>,
    pub instance_seeds: Vec<u64>,
    pub configurations: Vec<SolverConfig>,
    pub runs: usize,
    pub success_threshold: f64,
    pub success_quantile: f64,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    /// Shared engine settings; the sampler and seed fields are replaced per run.
    pub engine: RunConfig,
    pub generator: GeneratorParams,
    /// Rescale units before solving (objectives are reported in original units).
    pub scale_units: Option<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            buses: vec![3, 4],
            instance_seeds: vec![0],
            configurations: vec![
                SolverConfig {
                    name: "exact-master".into(),
                    sampler: MasterSolver::ExactMaster,
                    runs: Some(1),
                    penalty_scale: None,
                },
                SolverConfig {
                    name: "sa".into(),
                    sampler: MasterSolver::Sa(SamplerConfig::default()),
                    runs: None,
                    penalty_scale: None,
                },
            ],
            runs: 10,
            success_threshold: 0.05,
            success_quantile: 0.10,
            output_dir: PathBuf::from("bench-out"),
            master_seed: 0,
            engine: RunConfig::default(),
            generator: GeneratorParams::default(),
            scale_units: None,
        }
    }
}

impl BenchConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(std::io::BufReader::new(fs::File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.runs == 0 || self.configurations.iter().any(|c| c.runs == Some(0)) {
            return bad("runs must be at least 1");
        }
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return bad("success_threshold must lie in (0, 1)");
        }
        if !(self.success_quantile > 0.0 && self.success_quantile < 1.0) {
            return bad("success_quantile must lie in (0, 1)");
        }
        if self.buses.is_empty() || self.instance_seeds.is_empty() {
            return bad("no instances configured");
        }
        if self.configurations.is_empty() {
            return bad("no solver configurations");
        }
        let mut names: Vec<&str> = self.configurations.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("configuration names must be unique");
        }
        if names.iter().any(|n| n.contains(',') || n.contains('"') || n.contains('\n')) {
            return bad("configuration names may not contain commas, quotes or newlines");
        }
        Ok(())
    }

    fn runs_for(&self, c: &SolverConfig) -> usize {
        c.runs.unwrap_or(self.runs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Brute-force optimum.
    Exact,
    /// Best objective over all runs; the instance is too large to enumerate.
    BestKnown,
}

/// One benchmark run. Field order is the column order of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub config: String,
    pub buses: usize,
    pub instance_seed: u64,
    pub run: usize,
    pub success: bool,
    /// Objective of the best assignment, evaluated in the original program.
    pub objective: f64,
    pub reference: f64,
    pub reference_kind: ReferenceKind,
    pub relative_error: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub qubo_size: usize,
    pub stop_reason: String,
}

/// Wall-clock measurements of one run, kept apart from [`BenchRecord`] so
/// that `results.csv` is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub config: String,
    pub buses: usize,
    pub instance_seed: u64,
    pub run: usize,
    /// Sampler plus subproblem time accumulated over iterations.
    pub solve_time: f64,
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub timings: Vec<TimingRecord>,
}

struct Instance {
    buses: usize,
    seed: u64,
    prog: MixedBinaryProgram,
    solve_prog: MixedBinaryProgram,
    scale: UnitScale,
    reference: Option<f64>,
}

fn relative_error(objective: f64, reference: f64) -> f64 {
    (objective - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

/// Worker count from [`WORKERS_ENV`], falling back to the available cores.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| bench_in_pool(cfg))
}

fn bench_in_pool(cfg: &BenchConfig) -> Result<BenchOutput> {
    let mut instances = Vec::new();
    for &buses in &cfg.buses {
        for &s in &cfg.instance_seeds {
            let prog = to_milp(&generate_with(buses, s, &cfg.generator)?)?;
            let (solve_prog, scale) = match cfg.scale_units {
                Some(ratio) => scale_units(&prog, ratio)?,
                None => (prog.clone(), UnitScale::IDENTITY),
            };
            let reference = if prog.n() <= REFERENCE_MAX_BITS {
                Some(reference_solve(&prog)?.objective)
            } else {
                log::warn!("{buses} buses, seed {s}: too many lines for a reference, using best known");
                None
            };
            instances.push(Instance {
                buses,
                seed: s,
                prog,
                solve_prog,
                scale,
                reference,
            });
        }
    }

    let jobs: Vec<(usize, usize, usize)> = cfg
        .configurations
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            let runs = cfg.runs_for(c);
            (0..instances.len()).flat_map(move |ii| (0..runs).map(move |r| (ci, ii, r)))
        })
        .collect();

    struct Raw {
        ci: usize,
        ii: usize,
        run: usize,
        objective: f64,
        feasible: bool,
        iterations: usize,
        qubo_size: usize,
        stop_reason: String,
        solve_time: f64,
        total_time: f64,
    }

    let raws: Vec<Raw> = jobs
        .into_par_iter()
        .map(|(ci, ii, r)| {
            let started = Instant::now();
            let solver = &cfg.configurations[ci];
            let inst = &instances[ii];
            let run_seed = seed::derive(cfg.master_seed, &[ci as u64, inst.buses as u64, inst.seed, r as u64]);
            let sampler = match solver.sampler {
                MasterSolver::Sa(s) => MasterSolver::Sa(SamplerConfig {
                    seed: seed::derive(run_seed, &[s.seed]),
                    ..s
                }),
                other => other,
            };
            let engine = RunConfig {
                sampler,
                seed: run_seed,
                penalty_scale: solver.penalty_scale.unwrap_or(cfg.engine.penalty_scale),
                ..cfg.engine.clone()
            };
            let res = run(&inst.solve_prog, &engine)?;
            // binaries carry over unchanged; the continuous part is re-solved in original units
            let (_, sub) = crate::milp::split(&inst.prog);
            let y = crate::lp::solve_lp(&sub, &res.best.x)?.into_optimal()?.y;
            let assignment = crate::milp::Assignment {
                x: res.best.x.clone(),
                y,
            };
            let objective = evaluate(&inst.prog, &assignment)?;
            let feasible = check_feasibility(&inst.prog, &assignment, FEASIBILITY_TOL)?.feasible;
            log::debug!(
                "{} buses={} seed={} run={r}: objective {objective:.6} ({:?}, scaled objective {:.6})",
                solver.name,
                inst.buses,
                inst.seed,
                res.stop_reason,
                res.best_objective * inst.scale.objective_factor()
            );
            Ok(Raw {
                ci,
                ii,
                run: r,
                objective,
                feasible,
                iterations: res.records.len(),
                qubo_size: res.records.iter().map(|r| r.qubo_size).max().unwrap_or(0),
                stop_reason: res.stop_reason.to_string(),
                solve_time: res.solve_time(),
                total_time: started.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    // best known objective for instances without a reference
    let mut best_known = vec![f64::INFINITY; instances.len()];
    for r in raws.iter().filter(|r| r.feasible) {
        best_known[r.ii] = best_known[r.ii].min(r.objective);
    }

    let mut records = Vec::with_capacity(raws.len());
    let mut timings = Vec::with_capacity(raws.len());
    for r in raws {
        let inst = &instances[r.ii];
        let name = cfg.configurations[r.ci].name.clone();
        let (reference, reference_kind) = match inst.reference {
            Some(v) => (v, ReferenceKind::Exact),
            None => (best_known[r.ii], ReferenceKind::BestKnown),
        };
        let err = relative_error(r.objective, reference);
        records.push(BenchRecord {
            config: name.clone(),
            buses: inst.buses,
            instance_seed: inst.seed,
            run: r.run,
            success: r.feasible && err < cfg.success_threshold,
            objective: r.objective,
            reference,
            reference_kind,
            relative_error: err,
            feasible: r.feasible,
            iterations: r.iterations,
            qubo_size: r.qubo_size,
            stop_reason: r.stop_reason,
        });
        timings.push(TimingRecord {
            config: name,
            buses: inst.buses,
            instance_seed: inst.seed,
            run: r.run,
            solve_time: r.solve_time,
            total_time: r.total_time,
        });
    }
    let key = |c: &str, b: usize, s: u64, r: usize| (c.to_string(), b, s, r);
    records.sort_by_key(|r| key(&r.config, r.buses, r.instance_seed, r.run));
    timings.sort_by_key(|r| key(&r.config, r.buses, r.instance_seed, r.run));
    Ok(BenchOutput { records, timings })
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stat {
            mean,
            std: var.sqrt(),
        })
    }
}

/// Aggregate over one group of runs. Means use the first
/// `⌈quantile · runs⌉` successful runs by run index, or all successes if fewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub config: String,
    pub buses: usize,
    /// Present for per-instance aggregates.
    pub instance_seed: Option<u64>,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub selected: usize,
    pub objective: Option<Stat>,
    pub relative_error: Option<Stat>,
    pub iterations: Option<Stat>,
    pub qubo_size: Option<Stat>,
    pub solve_time: Option<Stat>,
    pub total_time: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub success_threshold: f64,
    pub success_quantile: f64,
    pub per_instance: Vec<Aggregate>,
    pub per_size: Vec<Aggregate>,
}

fn aggregate(
    group: &[(&BenchRecord, Option<&TimingRecord>)],
    quantile: f64,
    per_instance: bool,
) -> Aggregate {
    let first = group[0].0;
    let runs = group.len();
    let mut ordered: Vec<_> = group.to_vec();
    ordered.sort_by_key(|(r, _)| (r.instance_seed, r.run));
    let successes: Vec<_> = ordered.iter().filter(|(r, _)| r.success).collect();
    let take = ((quantile * runs as f64).ceil() as usize).max(1);
    let selected: Vec<_> = successes.iter().take(take).collect();
    let stat = |f: &dyn Fn(&BenchRecord) -> f64| {
        Stat::of(&selected.iter().map(|(r, _)| f(r)).collect::<Vec<_>>())
    };
    let timing = |f: &dyn Fn(&TimingRecord) -> f64| {
        let v: Vec<f64> = selected.iter().filter_map(|(_, t)| t.map(f)).collect();
        if v.len() == selected.len() {
            Stat::of(&v)
        } else {
            None
        }
    };
    Aggregate {
        config: first.config.clone(),
        buses: first.buses,
        instance_seed: per_instance.then_some(first.instance_seed),
        runs,
        successes: successes.len(),
        success_rate: successes.len() as f64 / runs as f64,
        selected: selected.len(),
        objective: stat(&|r| r.objective),
        relative_error: stat(&|r| r.relative_error),
        iterations: stat(&|r| r.iterations as f64),
        qubo_size: stat(&|r| r.qubo_size as f64),
        solve_time: timing(&|t| t.solve_time),
        total_time: timing(&|t| t.total_time),
    }
}

/// Per-(config, instance) and per-(config, size) aggregates. For a size, the
/// quantile applies to the pooled runs of all its instances.
pub fn summarize(records: &[BenchRecord], timings: &[TimingRecord], quantile: f64, threshold: f64) -> Summary {
    let tmap: BTreeMap<(&str, usize, u64, usize), &TimingRecord> = timings
        .iter()
        .map(|t| ((t.config.as_str(), t.buses, t.instance_seed, t.run), t))
        .collect();
    let mut by_instance: BTreeMap<(&str, usize, u64), Vec<_>> = BTreeMap::new();
    let mut by_size: BTreeMap<(&str, usize), Vec<_>> = BTreeMap::new();
    for r in records {
        let t = tmap.get(&(r.config.as_str(), r.buses, r.instance_seed, r.run)).copied();
        by_instance
            .entry((r.config.as_str(), r.buses, r.instance_seed))
            .or_default()
            .push((r, t));
        by_size.entry((r.config.as_str(), r.buses)).or_default().push((r, t));
    }
    Summary {
        success_threshold: threshold,
        success_quantile: quantile,
        per_instance: by_instance.values().map(|g| aggregate(g, quantile, true)).collect(),
        per_size: by_size.values().map(|g| aggregate(g, quantile, false)).collect(),
    }
}

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `results.csv`, `timings.csv` (when timings are given), `summary.json`
/// and one SVG per metric into `outdir`. Returns the written paths.
pub fn report(
    records: &[BenchRecord],
    timings: &[TimingRecord],
    quantile: f64,
    threshold: f64,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to report".into()));
    }
    fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    let results = outdir.join(RESULTS_FILE);
    write_csv(&results, records)?;
    written.push(results);
    if !timings.is_empty() {
        let path = outdir.join(TIMINGS_FILE);
        write_csv(&path, timings)?;
        written.push(path);
    }
    let summary = summarize(records, timings, quantile, threshold);
    let path = outdir.join(SUMMARY_FILE);
    serde_json::to_writer_pretty(std::io::BufWriter::new(fs::File::create(&path)?), &summary)?;
    written.push(path);
    for (name, svg) in crate::plot::metric_plots(&summary.per_size) {
        let path = outdir.join(format!("{name}.svg"));
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}
