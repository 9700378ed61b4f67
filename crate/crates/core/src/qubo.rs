//! QUBO construction: bounded binary expansions, slack variables, squared
//! penalties and coefficient normalization.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INTEGRAL_TOL: f64 = 1e-9;

/// Value `offset + coefficientsᵀt` over `t ∈ {0,1}^bit_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryEncoding {
    pub coefficients: Vec<f64>,
    pub offset: f64,
    pub precision_p: u32,
    pub bit_count: usize,
}

impl BinaryEncoding {
    /// Encoded value for the given bits.
    pub fn decode(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.bit_count);
        self.offset
            + self
                .coefficients
                .iter()
                .zip(bits)
                .filter(|(_, &b)| b == 1)
                .map(|(c, _)| c)
                .sum::<f64>()
    }

    /// Largest representable value.
    pub fn upper(&self) -> f64 {
        self.offset + self.coefficients.iter().sum::<f64>()
    }
}

/// Encodes `lo ≤ s ≤ hi` on the grid `lo + i/p` with
/// `K = p(hi − lo)`, `k = ⌊log₂K⌋` and weights `(1/p)[2⁰, …, 2^{k−1}, K − 2^k + 1]`.
pub fn encode_bounds(lo: f64, hi: f64, p: u32) -> Result<BinaryEncoding> {
    if !(lo <= hi) {
        return Err(Error::InvalidBounds { lo, hi });
    }
    if p == 0 {
        return Err(Error::InvalidArgument("precision p must be positive".into()));
    }
    let pf = f64::from(p);
    let span = pf * (hi - lo);
    let k_big = span.round();
    if (span - k_big).abs() > INTEGRAL_TOL || k_big > 2f64.powi(52) {
        return Err(Error::NonIntegralRange(span));
    }
    let k_big = k_big as u64;
    if k_big == 0 {
        return Ok(BinaryEncoding {
            coefficients: vec![],
            offset: lo,
            precision_p: p,
            bit_count: 0,
        });
    }
    let k = 63 - k_big.leading_zeros() as usize;
    let mut coefficients: Vec<f64> = (0..k).map(|i| (1u64 << i) as f64 / pf).collect();
    coefficients.push((k_big - (1u64 << k) + 1) as f64 / pf);
    Ok(BinaryEncoding {
        bit_count: coefficients.len(),
        coefficients,
        offset: lo,
        precision_p: p,
    })
}

/// Index of a QUBO variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Affine expression `Σ coef·t_var + constant` over QUBO variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(mut self, v: VarId, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) {
        self.terms.push((v, coef));
    }

    /// Adds `scale · enc(vars)`, including the encoding offset.
    pub fn add_encoding(&mut self, vars: &[VarId], enc: &BinaryEncoding, scale: f64) {
        debug_assert_eq!(vars.len(), enc.bit_count);
        for (&v, &c) in vars.iter().zip(&enc.coefficients) {
            self.terms.push((v, scale * c));
        }
        self.constant += scale * enc.offset;
    }

    /// Same expression with repeated variables merged and zeros dropped.
    pub fn merged(&self) -> Self {
        let mut acc: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *acc.entry(v).or_insert(0.0) += c;
        }
        Self {
            terms: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, bits: &[u8]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .filter(|(v, _)| bits[v.0] == 1)
                .map(|(_, c)| c)
                .sum::<f64>()
    }

    /// `(min, max)` over all binary assignments.
    pub fn range(&self) -> (f64, f64) {
        let merged = self.merged();
        let neg: f64 = merged.terms.iter().map(|t| t.1.min(0.0)).sum();
        let pos: f64 = merged.terms.iter().map(|t| t.1.max(0.0)).sum();
        (self.constant + neg, self.constant + pos)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub weight: f64,
    pub label: String,
}

impl PenaltySpec {
    pub fn new(weight: f64, label: impl Into<String>) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "penalty weight must be positive, got {weight}"
            )));
        }
        Ok(Self {
            weight,
            label: label.into(),
        })
    }
}

/// Upper-triangular QUBO: `energy(t) = Σ_{i≤j} Q_ij t_i t_j + offset`, with
/// linear terms on the diagonal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qubo {
    order: Vec<String>,
    index: HashMap<String, VarId>,
    upper: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl Qubo {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a variable, returning the existing id for a known label.
    pub fn add_variable(&mut self, label: impl Into<String>) -> VarId {
        let label = label.into();
        if let Some(&id) = self.index.get(&label) {
            return id;
        }
        let id = VarId(self.order.len());
        self.index.insert(label.clone(), id);
        self.order.push(label);
        id
    }

    /// Registers `count` variables named `prefix[0]`, `prefix[1]`, ...
    pub fn add_register(&mut self, prefix: &str, count: usize) -> Vec<VarId> {
        (0..count)
            .map(|k| self.add_variable(format!("{prefix}[{k}]")))
            .collect()
    }

    pub fn var(&self, label: &str) -> Option<VarId> {
        self.index.get(label).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.order
    }

    pub fn num_vars(&self) -> usize {
        self.order.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.upper.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.upper.get(&key).copied().unwrap_or(0.0)
    }

    fn check(&self, v: VarId) -> Result<()> {
        if v.0 < self.order.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(v.0))
        }
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    pub fn add_linear(&mut self, v: VarId, coef: f64) -> Result<()> {
        self.add_quadratic(v, v, coef)
    }

    pub fn add_quadratic(&mut self, a: VarId, b: VarId, coef: f64) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if coef == 0.0 {
            return Ok(());
        }
        let key = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        *self.upper.entry(key).or_insert(0.0) += coef;
        Ok(())
    }

    /// Adds `Σ coef·t` of an affine expression, constant into the offset.
    pub fn add_expr(&mut self, e: &LinearExpr) -> Result<()> {
        for &(v, c) in &e.terms {
            self.add_linear(v, c)?;
        }
        self.offset += e.constant;
        Ok(())
    }

    /// Adds `P·(rowᵀt − rhs)²`, expanded with `t² = t`.
    pub fn penalize_equality(&mut self, row: &LinearExpr, rhs: f64, penalty: &PenaltySpec) -> Result<()> {
        for &(v, _) in &row.terms {
            self.check(v)?;
        }
        let w = penalty.weight;
        let row = row.merged();
        let d = row.constant - rhs;
        for (k, &(vi, ci)) in row.terms.iter().enumerate() {
            self.add_linear(vi, w * (ci * ci + 2.0 * d * ci))?;
            for &(vj, cj) in &row.terms[k + 1..] {
                self.add_quadratic(vi, vj, 2.0 * w * ci * cj)?;
            }
        }
        self.offset += w * d * d;
        Ok(())
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.num_vars());
        self.offset
            + self
                .upper
                .iter()
                .filter(|(&(i, j), _)| bits[i] == 1 && bits[j] == 1)
                .map(|(_, v)| v)
                .sum::<f64>()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.upper.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy with every coefficient and the offset multiplied by `f`.
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            order: self.order.clone(),
            index: self.index.clone(),
            upper: self.upper.iter().map(|(&k, &v)| (k, v * f)).collect(),
            offset: self.offset * f,
        }
    }
}

/// Converts `row ≤ rhs` into `row + s = rhs` with `s ∈ [slack_lo, slack_hi]`
/// encoded on fresh variables `prefix[k]`. Penalizing the returned equality
/// row against zero yields the squared slack penalty.
pub fn inequality_to_equality(
    q: &mut Qubo,
    row: &LinearExpr,
    rhs: f64,
    slack_lo: f64,
    slack_hi: f64,
    p: u32,
    prefix: &str,
) -> Result<(LinearExpr, BinaryEncoding)> {
    for &(v, _) in &row.terms {
        q.check(v)?;
    }
    // slack values reachable by feasible assignments
    let (row_min, row_max) = row.range();
    let need_hi = rhs - row_min;
    let need_lo = (rhs - row_max).max(0.0);
    let tol = 1e-9 * (1.0 + need_hi.abs());
    if slack_lo > need_lo + tol || slack_hi < need_hi - tol || slack_lo < -tol {
        return Err(Error::SlackRange {
            lo: slack_lo,
            hi: slack_hi,
            need_lo,
            need_hi: need_hi.max(0.0),
        });
    }
    let enc = encode_bounds(slack_lo, slack_hi, p)?;
    let vars = q.add_register(prefix, enc.bit_count);
    let mut eq = row.clone();
    eq.add_encoding(&vars, &enc, 1.0);
    eq.constant -= rhs;
    Ok((eq, enc))
}

/// Divides all coefficients and the offset by the largest coefficient magnitude.
pub fn normalize(q: &Qubo) -> Result<(Qubo, f64)> {
    let scale = q.max_abs_coefficient();
    if scale == 0.0 {
        return Err(Error::ZeroQubo);
    }
    Ok((q.scaled(1.0 / scale), scale))
}

#[derive(Serialize, Deserialize)]
struct QuboFile {
    offset: f64,
    variables: Vec<String>,
    terms: Vec<(usize, usize, f64)>,
}

impl Serialize for Qubo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuboFile {
            offset: self.offset,
            variables: self.order.clone(),
            terms: self.terms().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Qubo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = QuboFile::deserialize(d)?;
        let mut q = Qubo::new();
        for v in f.variables {
            q.add_variable(v);
        }
        q.offset = f.offset;
        for (i, j, v) in f.terms {
            q.add_quadratic(VarId(i), VarId(j), v)
                .map_err(D::Error::custom)?;
        }
        Ok(q)
    }
}
