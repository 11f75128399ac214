use thiserror::Error;

use crate::sylvester::ConsistencyReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid involution axis {0:?}: expected a nonzero finite 3-vector")]
    InvalidAxis([f64; 3]),

    #[error("invalid window (m={m}, n={n}) for a system of {k} equations")]
    BadWindow { m: usize, n: usize, k: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("a system needs at least one equation")]
    EmptySystem,

    #[error("equation {index} is inconsistent (projector residuals {residuals:?})")]
    InconsistentEquation { index: usize, residuals: [f64; 4] },

    #[error("{0}")]
    InconsistentSystem(Box<Inconsistency>),

    #[error("equation {equation}: residual {residual:e} exceeds {bound:e}")]
    Verification { equation: usize, residual: f64, bound: f64 },

    #[error("E_{index} is not phi-Hermitian (defect {defect:e})")]
    NotPhiHermitian { index: usize, defect: f64 },
}

/// Where the constructive solver gave up, plus the rank-condition report of
/// the original system.
#[derive(Debug, Clone)]
pub struct Inconsistency {
    /// Recursion depth at which an equation failed its projector test
    /// (0 is the input system).
    pub level: usize,
    /// 1-based equation index within that level.
    pub equation: usize,
    pub residuals: [f64; 4],
    pub report: ConsistencyReport,
}

impl std::fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "system is inconsistent: equation {} at reduction level {} fails",
            self.equation, self.level
        )?;
        if let Some(c) = self.report.first_failure() {
            write!(
                f,
                "; first failing rank condition {} (m={}, n={}): {} != {}",
                c.family, c.m, c.n, c.lhs_rank, c.rhs_rank
            )?;
        }
        Ok(())
    }
}
