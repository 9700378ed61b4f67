use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("assignment entry x[{0}] is not binary")]
    NotBinary(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded, so is the original program")]
    Unbounded,
    #[error("linear program was not solved to optimality")]
    NotOptimal,
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("invalid bounds: lower {lo} exceeds upper {hi}")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("encoding range {0} is not an integer multiple of the precision")]
    NonIntegralRange(f64),
    #[error("variable {0} is not registered in the QUBO")]
    UnknownVariable(usize),
    #[error("slack interval [{lo}, {hi}] does not cover attainable range [{need_lo}, {need_hi}]")]
    SlackRange {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },
    #[error("QUBO has no nonzero coefficient")]
    ZeroQubo,

    #[error("QUBO with {vars} variables exceeds the {limit}-variable limit")]
    TooManyVariables { vars: usize, limit: usize },
    #[error("empty sample set")]
    EmptySampleSet,

    #[error("no cuts available")]
    NoCuts,
    #[error("subproblem infeasible for x = {0:?}; feasibility cuts are not supported")]
    InfeasibleSubproblem(Vec<u8>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
