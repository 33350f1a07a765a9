//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates a type invariant.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// An angle fell outside the angular span it indexes.
    #[error("{what} {value} deg outside valid span [{lo}, {hi}] deg")]
    OutOfSpan {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("mounting violation: fibre-to-reflector gap {gap_mm} mm is not positive")]
    MountingViolation { gap_mm: f64 },

    #[error("quadrature failed to converge within {budget} subintervals")]
    Quadrature { budget: usize },

    #[error("underdetermined fit: {samples} samples for {coeffs} coefficients")]
    Underdetermined { samples: usize, coeffs: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("ill-conditioned fit: diagonal ratio {ratio:e} below rank threshold")]
    Conditioning { ratio: f64 },

    /// Calibration polynomials are only evaluated inside their fit domain.
    #[error("voltage {voltage} V outside calibrated domain [{lo}, {hi}] V")]
    Extrapolation { voltage: f64, lo: f64, hi: f64 },

    #[error("no consecutive sample pair reaches the minimum slope")]
    EmptyRange,

    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("link {index}: {source}")]
    Link {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid of {cells} cells exceeds evaluation budget {budget}")]
    Budget { cells: u128, budget: u64 },

    #[error("angles not strictly increasing at sample {index}")]
    Ordering { index: usize },

    #[error("curve has no samples")]
    EmptyCurve,

    #[error("nothing to plot")]
    EmptyPlot,

    /// Malformed row or document; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used for machine-parsable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::OutOfSpan { .. } => "out-of-span",
            Error::MountingViolation { .. } => "mounting-violation",
            Error::Quadrature { .. } => "quadrature",
            Error::Underdetermined { .. } => "underdetermined",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::Conditioning { .. } => "conditioning",
            Error::Extrapolation { .. } => "extrapolation",
            Error::EmptyRange => "empty-range",
            Error::Arity { .. } => "arity",
            Error::Link { source, .. } => source.kind(),
            Error::Budget { .. } => "budget",
            Error::Ordering { .. } => "ordering",
            Error::EmptyCurve => "empty-curve",
            Error::EmptyPlot => "empty-plot",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }
}
