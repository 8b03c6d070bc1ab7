use thiserror::Error;

use crate::soco::ConePosition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    /// Largest violation of the arrow-head pattern, 0-based position.
    #[error("matrix is not arrow-head: entry ({row}, {col}) deviates by {deviation:e}")]
    NotArrowHead {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("vector lies outside the Lorentz cone")]
    OutsideCone,

    #[error("vector is not in the interior of the Lorentz cone")]
    NotInterior,

    #[error("invalid rank subset: {0}")]
    BadSubset(String),

    #[error("full-rank mapping failed its admissibility check for every epsilon down to {eps:e}")]
    EpsilonInvalid { eps: f64 },

    #[error("solution part `{0}` is required but absent")]
    MissingPart(&'static str),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dual slack violates the structural template at ({row}, {col}) by {deviation:e}")]
    TemplateViolation {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("dual slack recovered from S disagrees with c - A^T v by {deviation:e}")]
    InconsistentDual { deviation: f64 },

    #[error("cone {cone}: positions ({x:?}, {s:?}) are not a complementary pair")]
    InconsistentPair {
        cone: usize,
        x: ConePosition,
        s: ConePosition,
    },

    #[error("cone {cone}: rank choice is not a proper map for this block")]
    NotProper { cone: usize },

    #[error("pair is not complementary: Tr(XS) = {value:e}")]
    NotComplementary { value: f64 },

    #[error("SDO problem was not built from this SOCO problem: {0}")]
    ProvenanceMismatch(String),

    #[error("partition label does not match the solution: {0}")]
    LabelMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("random draw stayed degenerate after {0} attempts")]
    DegenerateDraw(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
