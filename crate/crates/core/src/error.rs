use thiserror::Error;

/// Errors raised by the numerical and algebraic routines of this crate.
///
/// The CLI maps each variant onto an exit code through [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient resolution: {samples} samples cannot resolve band {band}")]
    InsufficientResolution { samples: usize, band: usize },

    #[error("loop not invertible: |value| = {modulus:.3e} at angle {theta:.6}")]
    LoopNotInvertible { theta: f64, modulus: f64 },

    #[error("grid too coarse: phase step {step:.4} >= pi after refinement to {grid} points")]
    GridTooCoarse { grid: usize, step: f64 },

    #[error("no single-valued inverse symbol of winding zero (winding {winding})")]
    NonzeroWinding { winding: i64 },

    #[error("band overflow: band {band} exceeds configured maximum {max}")]
    BandOverflow { band: usize, max: usize },

    #[error("window must dominate band: window {window} < required {required}")]
    WindowTooSmallForBand { window: usize, required: usize },

    #[error("not invertible in E: index obstruction (winding {winding})")]
    IndexObstruction { winding: i64 },

    #[error("numerically singular: {0}")]
    NumericallySingular(String),

    #[error("trace undefined: nonzero symbol part (l1 mass {mass:.3e})")]
    TraceUndefined { mass: f64 },

    #[error("not determinant class: symbol deviates from 1 by {deviation:.3e}")]
    NotDeterminantClass { deviation: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("path leaves invertibles at t = {t}")]
    PathLeavesInvertibles { t: f64 },

    #[error("cocycle degree must be 2p-1 (p = {p}, chain degree {degree})")]
    CocycleDegree { p: usize, degree: usize },

    #[error("paths do not agree modulo trace class: {0}")]
    SymbolMismatch(String),

    #[error("not a 2-cycle: boundary has {terms} nonzero terms")]
    NotACycle { terms: usize },

    #[error("not in image of the cokernel map: {0}")]
    NotInImage(String),

    #[error("group too large for degree {degree}: order {order}")]
    GroupTooLarge { order: usize, degree: usize },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inputs do not commute: {0}")]
    NonCommuting(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Invariant,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InsufficientResolution { .. }
            | WindowTooSmallForBand { .. }
            | CocycleDegree { .. }
            | NotACycle { .. }
            | GroupTooLarge { .. }
            | InvalidGroup(_)
            | InvalidInput(_)
            | NonCommuting(_)
            | SymbolMismatch(_) => ErrorKind::Input,
            LoopNotInvertible { .. }
            | GridTooCoarse { .. }
            | NonzeroWinding { .. }
            | BandOverflow { .. }
            | IndexObstruction { .. }
            | NumericallySingular(_)
            | WindowTooSmall(_)
            | PathLeavesInvertibles { .. } => ErrorKind::Numerical,
            TraceUndefined { .. }
            | NotDeterminantClass { .. }
            | NotInImage(_)
            | InvariantViolation(_) => ErrorKind::Invariant,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
