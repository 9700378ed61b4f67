//! Synthetic greenfield transmission expansion instances.
//!
//! Each bus has a demand, a generator and load shedding; candidate lines form
//! a random connected graph. Compiled to a mixed-binary program with one
//! binary per candidate line and continuous `y = (f, g, u)`:
//!
//! ```text
//! min  Σ a·c_kl x_kl + Σ o_k g_k + Σ l_k u_k
//! s.t. B f + g + u = d
//!      f ≤ f̄ x,  −f ≤ f̄ x,  g ≤ ḡ,  u ≤ d,  −g ≤ 0,  −u ≤ 0
//! ```
//!
//! Shedding is always allowed, so every line selection has a feasible
//! dispatch.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::milp::MixedBinaryProgram;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLine {
    pub from: usize,
    pub to: usize,
    /// MW
    pub capacity: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnepInstance {
    pub buses: usize,
    pub lines: Vec<CandidateLine>,
    pub demand: Vec<f64>,
    pub gen_cap: Vec<f64>,
    pub gen_cost: Vec<f64>,
    pub shed_cost: Vec<f64>,
    pub annualization: f64,
    pub seed: u64,
}

/// Knobs of [`generate_with`]. Defaults are arbitrary but keep investment
/// costs an order of magnitude above operating costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub total_demand: f64,
    /// Total generation capacity as a multiple of total demand.
    pub capacity_margin: f64,
    pub renewable_fraction: f64,
    pub renewable_cost: (f64, f64),
    pub gas_cost: (f64, f64),
    pub shed_cost: f64,
    /// Line cost per MW of capacity.
    pub line_unit_cost: (f64, f64),
    pub line_capacity: (f64, f64),
    /// Target number of candidate lines per bus.
    pub line_density: f64,
    pub annualization: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            total_demand: 100.0,
            capacity_margin: 1.5,
            renewable_fraction: 0.4,
            renewable_cost: (1.0, 3.0),
            gas_cost: (8.0, 15.0),
            shed_cost: 100.0,
            line_unit_cost: (3.0, 30.0),
            line_capacity: (20.0, 60.0),
            line_density: 1.5,
            annualization: 1.0,
        }
    }
}

pub fn generate(buses: usize, seed: u64) -> Result<TnepInstance> {
    generate_with(buses, seed, &GeneratorParams::default())
}

pub fn generate_with(buses: usize, seed: u64, params: &GeneratorParams) -> Result<TnepInstance> {
    if buses < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 buses, got {buses}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // random spanning tree: each bus in a shuffled order attaches to an earlier one
    let mut order: Vec<usize> = (0..buses).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for k in 1..buses {
        let parent = order[rng.gen_range(0..k)];
        edges.push(ordered(order[k], parent));
    }
    let max_edges = buses * (buses - 1) / 2;
    let target = ((params.line_density * buses as f64).round() as usize).clamp(buses - 1, max_edges);
    let mut chords: Vec<(usize, usize)> = (0..buses)
        .flat_map(|i| (i + 1..buses).map(move |j| (i, j)))
        .filter(|e| !edges.contains(e))
        .collect();
    chords.shuffle(&mut rng);
    edges.extend(chords.into_iter().take(target - edges.len()));

    let lines = edges
        .into_iter()
        .map(|(a, b)| {
            let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let capacity = rng.gen_range(params.line_capacity.0..=params.line_capacity.1).round();
            let unit = rng.gen_range(params.line_unit_cost.0..=params.line_unit_cost.1);
            CandidateLine {
                from,
                to,
                capacity,
                cost: (unit * capacity).round(),
            }
        })
        .collect();

    let weights: Vec<f64> = (0..buses).map(|_| rng.gen_range(0.2..1.0)).collect();
    let wsum: f64 = weights.iter().sum();
    let mut demand: Vec<f64> = weights.iter().map(|w| params.total_demand * w / wsum).collect();
    // make the total exact despite rounding in the division
    let drift = params.total_demand - demand.iter().sum::<f64>();
    demand[0] += drift;

    let renewable_count = ((params.renewable_fraction * buses as f64).round() as usize).clamp(1, buses);
    let mut kinds: Vec<bool> = (0..buses).map(|k| k < renewable_count).collect();
    kinds.shuffle(&mut rng);
    let cap_weights: Vec<f64> = kinds
        .iter()
        .map(|&renewable| rng.gen_range(0.5..1.5) * if renewable { 2.0 } else { 1.0 })
        .collect();
    let cap_sum: f64 = cap_weights.iter().sum();
    let total_cap = params.capacity_margin * params.total_demand;
    let gen_cap = cap_weights.iter().map(|w| (total_cap * w / cap_sum).round()).collect();
    let gen_cost = kinds
        .iter()
        .map(|&renewable| {
            let (lo, hi) = if renewable { params.renewable_cost } else { params.gas_cost };
            (rng.gen_range(lo..=hi) * 100.0).round() / 100.0
        })
        .collect();

    let inst = TnepInstance {
        buses,
        lines,
        demand,
        gen_cap,
        gen_cost,
        shed_cost: vec![params.shed_cost; buses],
        annualization: params.annualization,
        seed,
    };
    inst.validate()?;
    Ok(inst)
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TnepInstance {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let nb = self.buses;
        for (what, v) in [
            ("demand", &self.demand),
            ("gen_cap", &self.gen_cap),
            ("gen_cost", &self.gen_cost),
            ("shed_cost", &self.shed_cost),
        ] {
            if v.len() != nb {
                return Err(Error::Dimension {
                    what,
                    expected: nb,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(what));
            }
        }
        if self.demand.iter().chain(&self.gen_cap).any(|&v| v < 0.0) {
            return bad("demand and generation capacity must be nonnegative".into());
        }
        for (k, line) in self.lines.iter().enumerate() {
            if line.from >= nb || line.to >= nb || line.from == line.to {
                return bad(format!("line {k} has invalid endpoints {}→{}", line.from, line.to));
            }
            if !(line.capacity >= 0.0) || !line.cost.is_finite() {
                return bad(format!("line {k} has invalid capacity or cost"));
            }
        }
        if !(self.annualization > 0.0) {
            return bad("annualization must be positive".into());
        }
        Ok(())
    }

    /// Whether the candidate lines connect all buses.
    pub fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.buses).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut components = self.buses;
        for line in &self.lines {
            let (a, b) = (find(&mut parent, line.from), find(&mut parent, line.to));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components <= 1
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let inst: Self = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

/// Compiles an instance. Continuous variables are ordered `f` (one per line),
/// then `g`, then `u`; inequality rows are grouped by family in the order
/// listed in the module docs.
pub fn to_milp(inst: &TnepInstance) -> Result<MixedBinaryProgram> {
    inst.validate()?;
    let n = inst.lines.len();
    let nb = inst.buses;
    let m = n + 2 * nb;
    let (gi, ui) = (n, n + nb);

    let c = inst.lines.iter().map(|l| inst.annualization * l.cost).collect();
    let mut c_cont = vec![0.0; m];
    c_cont[gi..gi + nb].copy_from_slice(&inst.gen_cost);
    c_cont[ui..ui + nb].copy_from_slice(&inst.shed_cost);

    // power balance: incidence +1 at the origin bus, −1 at the end bus
    let mut a_cont = Matrix::zeros(nb, m);
    for (k, line) in inst.lines.iter().enumerate() {
        a_cont.set(line.from, k, 1.0);
        a_cont.set(line.to, k, -1.0);
    }
    for bus in 0..nb {
        a_cont.set(bus, gi + bus, 1.0);
        a_cont.set(bus, ui + bus, 1.0);
    }
    let a = Matrix::zeros(nb, n);
    let b = inst.demand.clone();

    let p = 2 * n + 4 * nb;
    let mut g = Matrix::zeros(p, n);
    let mut g_cont = Matrix::zeros(p, m);
    let mut h = vec![0.0; p];
    let mut row = 0;
    for sign in [1.0, -1.0] {
        for (k, line) in inst.lines.iter().enumerate() {
            g_cont.set(row, k, sign);
            g.set(row, k, -line.capacity);
            row += 1;
        }
    }
    for (offset, bound) in [(gi, &inst.gen_cap), (ui, &inst.demand)] {
        for bus in 0..nb {
            g_cont.set(row, offset + bus, 1.0);
            h[row] = bound[bus];
            row += 1;
        }
    }
    for offset in [gi, ui] {
        for bus in 0..nb {
            g_cont.set(row, offset + bus, -1.0);
            row += 1;
        }
    }
    debug_assert_eq!(row, p);

    let names = inst
        .lines
        .iter()
        .map(|l| format!("x[{}-{}]", l.from, l.to))
        .chain(inst.lines.iter().map(|l| format!("f[{}-{}]", l.from, l.to)))
        .chain((0..nb).map(|k| format!("g[{k}]")))
        .chain((0..nb).map(|k| format!("u[{k}]")))
        .collect();
    MixedBinaryProgram::new(c, c_cont, g, g_cont, h, a, a_cont, b, Some(names))
}

/// Scale factors applied by [`scale_units`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    pub money: f64,
    pub energy: f64,
}

impl UnitScale {
    pub const IDENTITY: UnitScale = UnitScale {
        money: 1.0,
        energy: 1.0,
    };

    /// Factor by which objective values of the scaled program must be
    /// multiplied to recover original units.
    pub fn objective_factor(&self) -> f64 {
        1.0 / self.money
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Changes the energy unit by `E` and the money unit by `M`.
///
/// Continuous quantities are measured in units of `E`, so `c_cont` becomes
/// `M·E·c_cont` and all constraint data is divided by `E`; `c` becomes `M·c`.
pub fn apply_scale(prog: &MixedBinaryProgram, s: UnitScale) -> Result<MixedBinaryProgram> {
    let e = s.energy;
    let div = |v: f64| v / e;
    MixedBinaryProgram::new(
        prog.c.iter().map(|v| v * s.money).collect(),
        prog.c_cont.iter().map(|v| v * s.money * e).collect(),
        prog.g.map(div),
        prog.g_cont.clone(),
        prog.h.iter().copied().map(div).collect(),
        prog.a.map(div),
        prog.a_cont.clone(),
        prog.b.iter().copied().map(div).collect(),
        prog.names.clone(),
    )
}

/// Rescales units so that `max|c| / max|c_cont|` lies in
/// `[1/target_ratio, target_ratio]`.
///
/// The energy unit is a power of ten when that reaches the band, otherwise
/// the exact ratio; the money unit is its inverse, which leaves the
/// continuous cost coefficients unchanged and divides the objective by `E`.
pub fn scale_units(prog: &MixedBinaryProgram, target_ratio: f64) -> Result<(MixedBinaryProgram, UnitScale)> {
    if !(target_ratio >= 1.0) {
        return Err(Error::InvalidArgument(format!("target ratio must be at least 1, got {target_ratio}")));
    }
    let (cb, cc) = (max_abs(&prog.c), max_abs(&prog.c_cont));
    if cb == 0.0 || cc == 0.0 {
        return Err(Error::InvalidArgument("objective block is all zero".into()));
    }
    let ratio = cb / cc;
    let in_band = |r: f64| (1.0 / target_ratio..=target_ratio).contains(&r);
    if in_band(ratio) {
        return Ok((prog.clone(), UnitScale::IDENTITY));
    }
    let decade = 10f64.powi(ratio.log10().round() as i32);
    let energy = if in_band(ratio / decade) { decade } else { ratio };
    let scale = UnitScale {
        money: 1.0 / energy,
        energy,
    };
    Ok((apply_scale(prog, scale)?, scale))
}

pub fn unscale_units(prog: &MixedBinaryProgram, s: UnitScale) -> Result<MixedBinaryProgram> {
    apply_scale(
        prog,
        UnitScale {
            money: 1.0 / s.money,
            energy: 1.0 / s.energy,
        },
    )
}
