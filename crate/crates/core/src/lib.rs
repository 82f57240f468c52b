//! Certified extremal constants for rigidity of cosine sequences.
//!
//! The crate computes `sup_n |cos(na) - cos(nb)|` exactly over finite cyclic
//! groups, certified real suprema of `|cos(px) - cos(qx)|`, the constant
//! `k(a)`, the sets `Gamma(a, m)` and `Omega(m)`, and ships a matrix-scale
//! simulator for algebra-valued cosine sequences.

pub mod algebra;
pub mod angle;
pub mod certified;
pub mod cyclic;
pub mod error;
pub mod k_constant;
pub mod par;
pub mod real_sup;
pub mod verify;

pub use angle::{canonicalize, order_of, RationalAngle, SymbolicAngle};
pub use certified::{CertOrdering, CertScalar, ClosedForm};
pub use error::{Error, Result};
pub use par::Execution;

/// Precision policy and execution mode shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Starting working precision.
    pub precision_bits: u32,
    /// Escalation stops here with [`Error::PrecisionExhausted`].
    pub precision_cap: u32,
    pub execution: Execution,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision_bits: 128,
            precision_cap: 4096,
            execution: Execution::default(),
        }
    }
}

impl Config {
    pub fn sequential(self) -> Self {
        Config {
            execution: Execution::Sequential,
            ..self
        }
    }
}
