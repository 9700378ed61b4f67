//! Mixed-binary linear programs
//!
//! ```text
//! min  cᵀx + c_contᵀy
//! s.t. G x + G_cont y ≤ h
//!      A x + A_cont y = b
//!      x ∈ {0,1}ⁿ, y ∈ ℝᵐ
//! ```
//!
//! together with solution evaluation and the split into a binary master part
//! and a continuous subproblem in which `x` is a fixed parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Default absolute tolerance for [`check_feasibility`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram", into = "RawProgram")]
pub struct MixedBinaryProgram {
    pub c: Vec<f64>,
    pub c_cont: Vec<f64>,
    pub g: Matrix,
    pub g_cont: Matrix,
    pub h: Vec<f64>,
    pub a: Matrix,
    pub a_cont: Matrix,
    pub b: Vec<f64>,
    pub names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawProgram {
    c: Vec<f64>,
    c_cont: Vec<f64>,
    #[serde(rename = "G")]
    g: Matrix,
    #[serde(rename = "G_cont")]
    g_cont: Matrix,
    h: Vec<f64>,
    #[serde(rename = "A")]
    a: Matrix,
    #[serde(rename = "A_cont")]
    a_cont: Matrix,
    b: Vec<f64>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

impl TryFrom<RawProgram> for MixedBinaryProgram {
    type Error = Error;

    fn try_from(raw: RawProgram) -> Result<Self> {
        let n = raw.c.len();
        let m = raw.c_cont.len();
        // empty JSON matrices carry no column count
        let fix = |mat: Matrix, cols: usize| {
            if mat.rows() == 0 {
                Matrix::zeros(0, cols)
            } else {
                mat
            }
        };
        Self::new(
            raw.c,
            raw.c_cont,
            fix(raw.g, n),
            fix(raw.g_cont, m),
            raw.h,
            fix(raw.a, n),
            fix(raw.a_cont, m),
            raw.b,
            raw.names,
        )
    }
}

impl From<MixedBinaryProgram> for RawProgram {
    fn from(p: MixedBinaryProgram) -> Self {
        RawProgram {
            c: p.c,
            c_cont: p.c_cont,
            g: p.g,
            g_cont: p.g_cont,
            h: p.h,
            a: p.a,
            a_cont: p.a_cont,
            b: p.b,
            names: p.names,
        }
    }
}

fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}

fn check_finite(what: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl MixedBinaryProgram {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: Vec<f64>,
        c_cont: Vec<f64>,
        g: Matrix,
        g_cont: Matrix,
        h: Vec<f64>,
        a: Matrix,
        a_cont: Matrix,
        b: Vec<f64>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        let prog = Self {
            c,
            c_cont,
            g,
            g_cont,
            h,
            a,
            a_cont,
            b,
            names,
        };
        prog.validate()?;
        Ok(prog)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, p, r) = (self.n(), self.m(), self.p(), self.r());
        check_dim("G rows", p, self.g.rows())?;
        check_dim("G cols", n, self.g.cols())?;
        check_dim("G_cont rows", p, self.g_cont.rows())?;
        check_dim("G_cont cols", m, self.g_cont.cols())?;
        check_dim("A rows", r, self.a.rows())?;
        check_dim("A cols", n, self.a.cols())?;
        check_dim("A_cont rows", r, self.a_cont.rows())?;
        check_dim("A_cont cols", m, self.a_cont.cols())?;
        if let Some(names) = &self.names {
            check_dim("names", n + m, names.len())?;
        }
        check_finite("c", &self.c)?;
        check_finite("c_cont", &self.c_cont)?;
        check_finite("h", &self.h)?;
        check_finite("b", &self.b)?;
        for (what, mat) in [
            ("G", &self.g),
            ("G_cont", &self.g_cont),
            ("A", &self.a),
            ("A_cont", &self.a_cont),
        ] {
            if !mat.is_finite() {
                return Err(Error::NonFinite(what));
            }
        }
        Ok(())
    }

    /// Number of binary variables.
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Number of continuous variables.
    pub fn m(&self) -> usize {
        self.c_cont.len()
    }

    /// Number of inequality rows.
    pub fn p(&self) -> usize {
        self.h.len()
    }

    /// Number of equality rows.
    pub fn r(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub x: Vec<u8>,
    pub y: Vec<f64>,
}

impl Assignment {
    pub fn zeros(prog: &MixedBinaryProgram) -> Self {
        Self {
            x: vec![0; prog.n()],
            y: vec![0.0; prog.m()],
        }
    }

    fn check(&self, prog: &MixedBinaryProgram) -> Result<()> {
        check_dim("assignment x", prog.n(), self.x.len())?;
        check_dim("assignment y", prog.m(), self.y.len())?;
        if let Some(i) = self.x.iter().position(|&v| v > 1) {
            return Err(Error::NotBinary(i));
        }
        Ok(())
    }
}

pub(crate) fn bits_to_f64(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&v| f64::from(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_equality_violation: f64,
    pub max_inequality_violation: f64,
}

/// Objective value `cᵀx + c_contᵀy`.
pub fn evaluate(prog: &MixedBinaryProgram, a: &Assignment) -> Result<f64> {
    a.check(prog)?;
    Ok(evaluate_relaxed(prog, &bits_to_f64(&a.x), &a.y))
}

/// Objective for real-valued `x`; callers are responsible for dimensions.
pub fn evaluate_relaxed(prog: &MixedBinaryProgram, x: &[f64], y: &[f64]) -> f64 {
    dot(&prog.c, x) + dot(&prog.c_cont, y)
}

pub fn check_feasibility(
    prog: &MixedBinaryProgram,
    a: &Assignment,
    tol: f64,
) -> Result<FeasibilityReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} < 0")));
    }
    a.check(prog)?;
    let x = bits_to_f64(&a.x);
    let gx = prog.g.mul_vec(&x);
    let gy = prog.g_cont.mul_vec(&a.y);
    let max_ineq = (0..prog.p())
        .map(|k| (gx[k] + gy[k] - prog.h[k]).max(0.0))
        .fold(0.0, f64::max);
    let ax = prog.a.mul_vec(&x);
    let ay = prog.a_cont.mul_vec(&a.y);
    let max_eq = (0..prog.r())
        .map(|k| (ax[k] + ay[k] - prog.b[k]).abs())
        .fold(0.0, f64::max);
    Ok(FeasibilityReport {
        feasible: max_eq <= tol && max_ineq <= tol,
        max_equality_violation: max_eq,
        max_inequality_violation: max_ineq,
    })
}

/// Binary side of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSkeleton {
    pub c: Vec<f64>,
}

impl MasterSkeleton {
    pub fn n(&self) -> usize {
        self.c.len()
    }
}

/// Continuous subproblem with `x` treated as a parameter:
/// `min c_contᵀy s.t. G_cont y ≤ h − Gx, A_cont y = b − Ax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemTemplate {
    pub c_cont: Vec<f64>,
    pub g: Matrix,
    pub g_cont: Matrix,
    pub h: Vec<f64>,
    pub a: Matrix,
    pub a_cont: Matrix,
    pub b: Vec<f64>,
    /// No continuous variables: the subproblem is a pure feasibility check.
    pub degenerate: bool,
}

impl SubproblemTemplate {
    pub fn n(&self) -> usize {
        self.g.cols()
    }

    pub fn m(&self) -> usize {
        self.c_cont.len()
    }

    /// Right-hand sides `(h − Gx, b − Ax)` for a fixed binary vector.
    pub fn rhs_for(&self, x: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dim("fixed x", self.n(), x.len())?;
        let xf = bits_to_f64(x);
        let gx = self.g.mul_vec(&xf);
        let ax = self.a.mul_vec(&xf);
        let h = self.h.iter().zip(gx).map(|(h, g)| h - g).collect();
        let b = self.b.iter().zip(ax).map(|(b, a)| b - a).collect();
        Ok((h, b))
    }
}

pub fn split(prog: &MixedBinaryProgram) -> (MasterSkeleton, SubproblemTemplate) {
    let master = MasterSkeleton { c: prog.c.clone() };
    let sub = SubproblemTemplate {
        c_cont: prog.c_cont.clone(),
        g: prog.g.clone(),
        g_cont: prog.g_cont.clone(),
        h: prog.h.clone(),
        a: prog.a.clone(),
        a_cont: prog.a_cont.clone(),
        b: prog.b.clone(),
        degenerate: prog.m() == 0,
    };
    (master, sub)
}

/// Inverse of [`split`].
pub fn recombine(master: &MasterSkeleton, sub: &SubproblemTemplate) -> Result<MixedBinaryProgram> {
    MixedBinaryProgram::new(
        master.c.clone(),
        sub.c_cont.clone(),
        sub.g.clone(),
        sub.g_cont.clone(),
        sub.h.clone(),
        sub.a.clone(),
        sub.a_cont.clone(),
        sub.b.clone(),
        None,
    )
}
