use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qbd_core::bench::{self, BenchConfig, BenchRecord, TimingRecord};
use qbd_core::benders::{self, RunConfig};
use qbd_core::milp::MixedBinaryProgram;
use qbd_core::tnep::{self, TnepInstance};

#[derive(Parser)]
#[command(name = "qbd", version, about = "Benders decomposition with QUBO master problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random transmission expansion instance.
    Generate {
        #[arg(long)]
        buses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance (expansion instance or program JSON).
    Solve {
        instance: PathBuf,
        /// Engine configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the iteration trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Rescale units so the objective blocks are within this ratio.
        #[arg(long)]
        scale_units: Option<f64>,
    },
    /// Run a benchmark sweep and write its reports.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild summary and plots from a results file.
    Report {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.10)]
        quantile: f64,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_program(path: &Path) -> Result<MixedBinaryProgram> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("lines").is_some() {
        let inst: TnepInstance = serde_json::from_value(value)?;
        inst.validate()?;
        Ok(tnep::to_milp(&inst)?)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

fn solve(instance: &Path, config: Option<&Path>, trace: Option<&Path>, scale: Option<f64>) -> Result<()> {
    let prog = load_program(instance)?;
    let cfg: RunConfig = match config {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    let (solve_prog, units) = match scale {
        Some(ratio) => tnep::scale_units(&prog, ratio)?,
        None => (prog.clone(), tnep::UnitScale::IDENTITY),
    };
    let res = benders::run(&solve_prog, &cfg)?;
    let mut tr = res.trace();
    tr.summary.objective *= units.objective_factor();
    let text = serde_json::to_string_pretty(&tr)?;
    match trace {
        Some(p) => {
            std::fs::write(p, text)?;
            println!(
                "objective {:.6}  gap {}  stop {}  iterations {}",
                tr.summary.objective,
                tr.summary.gap.map_or("-".into(), |g| format!("{g:.4}")),
                tr.summary.stop_reason,
                tr.iterations.len()
            );
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn bench_cmd(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = BenchConfig::read(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    log::info!("running with {} workers", bench::worker_count());
    let output = bench::run_bench(&cfg)?;
    let written = bench::report(
        &output.records,
        &output.timings,
        cfg.success_quantile,
        cfg.success_threshold,
        &cfg.output_dir,
    )?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn report_cmd(results: &Path, out: Option<PathBuf>, quantile: f64, threshold: f64) -> Result<()> {
    let records: Vec<BenchRecord> = bench::read_csv(results)?;
    if records.is_empty() {
        bail!("{} holds no records", results.display());
    }
    let dir = results.parent().unwrap_or(Path::new("."));
    let timings_path = dir.join(bench::TIMINGS_FILE);
    let timings: Vec<TimingRecord> = if timings_path.exists() {
        bench::read_csv(&timings_path)?
    } else {
        Vec::new()
    };
    let outdir = out.unwrap_or_else(|| dir.to_path_buf());
    for p in bench::report(&records, &timings, quantile, threshold, &outdir)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Generate { buses, seed, out } => {
            let inst = tnep::generate(buses, seed)?;
            inst.write(&out)?;
            println!("{} buses, {} candidate lines → {}", inst.buses, inst.lines.len(), out.display());
        }
        Command::Solve {
            instance,
            config,
            trace,
            scale_units,
        } => solve(&instance, config.as_deref(), trace.as_deref(), scale_units)?,
        Command::Bench { config, out } => bench_cmd(&config, out)?,
        Command::Report {
            results,
            out,
            quantile,
            threshold,
        } => report_cmd(&results, out, quantile, threshold)?,
    }
    Ok(())
}
