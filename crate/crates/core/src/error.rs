use thiserror::Error;

use crate::dec::Cochain;

/// Everything that can go wrong in the toolkit.
#[derive(Debug, Error)]
pub enum HopfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "vector is not horizontal: contact residual {residual:.3e} exceeds tolerance {tol:.3e}"
    )]
    NonHorizontal { residual: f64, tol: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("refinement level {level} needs ~{estimated} top simplices, budget is {budget}")]
    MeshTooLarge {
        level: usize,
        estimated: usize,
        budget: usize,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degree {degree} out of range for a complex of dimension {dim}")]
    DegreeOutOfRange { degree: usize, dim: usize },

    #[error("cochains live on different complexes")]
    ComplexMismatch,

    #[error("closedness residual {residual:.3e} exceeds budget {budget:.3e}; the pulled-back form is not closed (rank hypothesis fails)")]
    NotClosed { residual: f64, budget: f64 },

    #[error("homotopy sweep aborted at t = {t}: closedness residual {residual:.3e} exceeds budget {budget:.3e}")]
    SweepAborted { t: f64, residual: f64, budget: f64 },

    #[error("least-squares primitive did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    PrimitiveNotConverged {
        residual: f64,
        iterations: usize,
        best: Box<Cochain>,
    },

    #[error("sample set is empty")]
    EmptySample,

    #[error("map is not injective: {duplicates} coincident vertex values")]
    NotInjective { duplicates: usize },

    #[error("linking quadrature {value} is {distance:.3} away from an integer")]
    OracleInconclusive { value: f64, distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HopfError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HopfError::NotClosed { .. } | HopfError::SweepAborted { .. } => 2,
            HopfError::PrimitiveNotConverged { .. } | HopfError::OracleInconclusive { .. } => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HopfError>;
