use thiserror::Error;

/// Errors raised by norm, psi-function and operator computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("divergent integral: {piece} (critical exponent {critical})")]
    Divergence { piece: String, critical: f64 },

    #[error("empty feasibility window at r = {at}: {detail}")]
    EmptyWindow { at: f64, detail: String },

    #[error("minimizer did not converge on [{lo}, {hi}] after {iterations} iterations")]
    NonConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("quadrature did not reach tolerance: value {value}, error estimate {abs_error}")]
    Quadrature { value: f64, abs_error: f64 },

    #[error("exact gamma path not applicable: {0}")]
    NotExact(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("norm is infinite: |f|_p diverges at p = {p}")]
    NormInfinite { p: f64 },

    #[error("function is not in the space: ratio unbounded toward p = {endpoint} (trend {trend:?})")]
    NotInSpace { endpoint: f64, trend: Vec<(f64, f64)> },

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("unbounded objective: {0}")]
    Unbounded(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Stable variant name used on the command line and in suite reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::RejectedInput(_) => "RejectedInput",
            Error::Divergence { .. } => "Divergence",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::Quadrature { .. } => "Quadrature",
            Error::NotExact(_) => "NotExact",
            Error::Unsupported(_) => "Unsupported",
            Error::NormInfinite { .. } => "NormInfinite",
            Error::NotInSpace { .. } => "NotInSpace",
            Error::Inapplicable(_) => "Inapplicable",
            Error::Unbounded(_) => "Unbounded",
            Error::InsufficientData(_) => "InsufficientData",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn rejected(msg: impl Into<String>) -> Error {
    Error::RejectedInput(msg.into())
}
