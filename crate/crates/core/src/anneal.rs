//! QUBO samplers: exhaustive enumeration and single-flip Metropolis
//! simulated annealing.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;
use crate::seed;

/// Default variable limit for [`solve_exact`].
pub const EXACT_MAX_BITS: usize = 24;
/// Number of lowest-energy states kept by [`solve_exact`].
pub const EXACT_KEEP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub reads: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub beta_range: Option<(f64, f64)>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            reads: 100,
            sweeps: 100,
            seed: 0,
            beta_range: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 || self.sweeps == 0 {
            return Err(Error::InvalidArgument(
                "reads and sweeps must be at least 1".into(),
            ));
        }
        if let Some((b0, b1)) = self.beta_range {
            if !(b0 > 0.0 && b0 < b1 && b1.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "beta range ({b0}, {b1}) must satisfy 0 < start < end"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub occurrences: usize,
}

/// Samples sorted by ascending energy; states within `1e-9` relative energy
/// of each other are ordered lexicographically by bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    /// Wall-clock seconds spent in the sampling loop.
    pub sampler_time: f64,
}

impl SampleSet {
    fn canonical(mut samples: Vec<Sample>, sampler_time: f64) -> Self {
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
        // float noise can separate states of equal energy; order such runs by bits
        let mut start = 0;
        while start < samples.len() {
            let base = samples[start].energy;
            let mut end = start + 1;
            while end < samples.len() && energy_tie(base, samples[end].energy) {
                end += 1;
            }
            samples[start..end].sort_by(|a, b| a.bits.cmp(&b.bits));
            start = end;
        }
        Self {
            samples,
            sampler_time,
        }
    }

    pub fn total_occurrences(&self) -> usize {
        self.samples.iter().map(|s| s.occurrences).sum()
    }
}

fn energy_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

impl Serialize for SampleSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.samples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampleSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let samples = Vec::<Sample>::deserialize(d)?;
        Ok(SampleSet::canonical(samples, 0.0))
    }
}

/// Lowest-energy sample.
pub fn pick_best(s: &SampleSet) -> Result<(&[u8], f64)> {
    s.samples
        .first()
        .map(|b| (b.bits.as_slice(), b.energy))
        .ok_or(Error::EmptySampleSet)
}

/// Adjacency form of a QUBO for incremental single-flip updates.
struct Compiled {
    n: usize,
    diag: Vec<f64>,
    // CSR over the symmetric off-diagonal couplings
    start: Vec<usize>,
    nbr: Vec<usize>,
    weight: Vec<f64>,
    upper: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl Compiled {
    fn new(q: &Qubo) -> Self {
        let n = q.num_vars();
        let mut diag = vec![0.0; n];
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut upper = Vec::new();
        for (i, j, v) in q.terms() {
            upper.push((i, j, v));
            if i == j {
                diag[i] += v;
            } else {
                lists[i].push((j, v));
                lists[j].push((i, v));
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut nbr = Vec::new();
        let mut weight = Vec::new();
        start.push(0);
        for l in lists {
            for (j, w) in l {
                nbr.push(j);
                weight.push(w);
            }
            start.push(nbr.len());
        }
        Self {
            n,
            diag,
            start,
            nbr,
            weight,
            upper,
            offset: q.offset(),
        }
    }

    fn energy(&self, bits: &[u8]) -> f64 {
        self.offset
            + self
                .upper
                .iter()
                .filter(|&&(i, j, _)| bits[i] == 1 && bits[j] == 1)
                .map(|t| t.2)
                .sum::<f64>()
    }

    fn fields(&self, bits: &[u8]) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                (self.start[k]..self.start[k + 1])
                    .filter(|&e| bits[self.nbr[e]] == 1)
                    .map(|e| self.weight[e])
                    .sum()
            })
            .collect()
    }

    #[inline]
    fn flip(&self, k: usize, bits: &mut [u8], field: &mut [f64]) {
        bits[k] ^= 1;
        let s = if bits[k] == 1 { 1.0 } else { -1.0 };
        for e in self.start[k]..self.start[k + 1] {
            field[self.nbr[e]] += s * self.weight[e];
        }
    }

    /// Largest and smallest nonzero single-flip magnitudes at the all-zero
    /// state, falling back to all coefficient magnitudes if the diagonal is empty.
    fn flip_scales(&self) -> Option<(f64, f64)> {
        let scan = |it: &mut dyn Iterator<Item = f64>| {
            it.map(f64::abs)
                .filter(|v| *v > 0.0)
                .fold(None, |acc: Option<(f64, f64)>, v| match acc {
                    None => Some((v, v)),
                    Some((hi, lo)) => Some((hi.max(v), lo.min(v))),
                })
        };
        scan(&mut self.diag.iter().copied()).or_else(|| scan(&mut self.upper.iter().map(|t| t.2)))
    }
}

#[derive(PartialEq)]
struct Ranked {
    energy: f64,
    lexkey: u64,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.lexkey.cmp(&other.lexkey))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exhaustive enumeration keeping the [`EXACT_KEEP`] best states.
pub fn solve_exact(q: &Qubo, max_bits: usize) -> Result<SampleSet> {
    solve_exact_keep(q, max_bits, EXACT_KEEP)
}

/// Exhaustive Gray-code enumeration keeping the `keep` lowest-energy states.
pub fn solve_exact_keep(q: &Qubo, max_bits: usize, keep: usize) -> Result<SampleSet> {
    let n = q.num_vars();
    if n > max_bits || n > 40 {
        return Err(Error::TooManyVariables {
            vars: n,
            limit: max_bits.min(40),
        });
    }
    let keep = keep.max(1);
    let started = Instant::now();
    let c = Compiled::new(q);
    // lexicographic order with t_0 as most significant bit
    let lexkey = |mask: u64| -> u64 {
        if n == 0 {
            0
        } else {
            mask.reverse_bits() >> (64 - n)
        }
    };
    let mut heap: BinaryHeap<Ranked> = BinaryHeap::with_capacity(keep + 1);
    let push = |heap: &mut BinaryHeap<Ranked>, energy: f64, mask: u64| {
        let r = Ranked {
            energy,
            lexkey: lexkey(mask),
        };
        if heap.len() < keep {
            heap.push(r);
        } else if let Some(top) = heap.peek() {
            if r < *top {
                heap.pop();
                heap.push(r);
            }
        }
    };

    let mut bits = vec![0u8; n];
    let mut field = vec![0.0; n];
    let mut energy = c.offset;
    let mut mask = 0u64;
    push(&mut heap, energy, mask);
    for g in 1..(1u64 << n) {
        let k = g.trailing_zeros() as usize;
        let local = c.diag[k] + field[k];
        energy += if bits[k] == 0 { local } else { -local };
        c.flip(k, &mut bits, &mut field);
        mask ^= 1 << k;
        push(&mut heap, energy, mask);
    }

    let samples = heap
        .into_iter()
        .map(|r| {
            let bits: Vec<u8> = (0..n).map(|i| ((r.lexkey >> (n - 1 - i)) & 1) as u8).collect();
            Sample {
                energy: c.energy(&bits),
                bits,
                occurrences: 1,
            }
        })
        .collect();
    Ok(SampleSet::canonical(samples, started.elapsed().as_secs_f64()))
}

/// Geometric schedule from `b0` to `b1` over `sweeps` points.
pub fn geometric_schedule(b0: f64, b1: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![b1];
    }
    let (l0, l1) = (b0.ln(), b1.ln());
    let step = (l1 - l0) / (sweeps - 1) as f64;
    (0..sweeps).map(|i| (l0 + step * i as f64).exp()).collect()
}

/// Default `(β_start, β_end) = (ln 2 / ΔE_max, ln(100·reads) / ΔE_min)`.
pub fn default_beta_range(q: &Qubo, reads: usize) -> (f64, f64) {
    let c = Compiled::new(q);
    match c.flip_scales() {
        Some((hi, lo)) => {
            let b0 = std::f64::consts::LN_2 / hi;
            let b1 = (100.0 * reads as f64).ln() / lo;
            (b0, b1.max(b0 * (1.0 + 1e-12)))
        }
        None => (0.1, 1.0),
    }
}

/// Runs `reads` independent annealing chains, each from a random state,
/// sweeping variables in index order with Metropolis acceptance.
pub fn solve_sa(q: &Qubo, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let n = q.num_vars();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "simulated annealing needs at least one variable".into(),
        ));
    }
    let started = Instant::now();
    let c = Compiled::new(q);
    let (b0, b1) = cfg
        .beta_range
        .unwrap_or_else(|| default_beta_range(q, cfg.reads));
    let schedule = geometric_schedule(b0, b1, cfg.sweeps);

    let finals: Vec<Vec<u8>> = (0..cfg.reads)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, &[r as u64]));
            let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
            let mut field = c.fields(&bits);
            for &beta in &schedule {
                for k in 0..n {
                    let local = c.diag[k] + field[k];
                    let delta = if bits[k] == 0 { local } else { -local };
                    if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                        c.flip(k, &mut bits, &mut field);
                    }
                }
            }
            bits
        })
        .collect();

    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for b in finals {
        *counts.entry(b).or_insert(0) += 1;
    }
    let samples = counts
        .into_iter()
        .map(|(bits, occurrences)| Sample {
            energy: c.energy(&bits),
            bits,
            occurrences,
        })
        .collect();
    Ok(SampleSet::canonical(samples, started.elapsed().as_secs_f64()))
}
