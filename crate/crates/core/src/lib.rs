//! Hybrid Benders decomposition for mixed-binary linear programs with the
//! master problem compiled to a QUBO.

pub mod anneal;
pub mod bench;
pub mod benders;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod milp;
pub mod plot;
pub mod qubo;
pub mod reference;
pub mod seed;
pub mod tnep;

pub use error::{Error, Result};
