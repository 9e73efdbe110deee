use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation axis undefined at {what}")]
    AxisUndefined { what: String },
    #[error("Gibbs vector singular: |1 - k1.k2/4| = {denominator:e} (result is a pi-rotation)")]
    GibbsSingularity { denominator: f64 },
    #[error("chart singular at k = {k} ({chart})")]
    ChartSingular { chart: &'static str, k: f64 },
    #[error("grid resolution mismatch: {left:?} vs {right:?}")]
    ResolutionMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
    #[error("rank l = {l} out of range (max {max})")]
    RankOutOfRange { l: usize, max: usize },
    #[error("function not in ideal M(j={j}): projection residual {residual:e} > {tol:e}")]
    NotInIdeal { j: f64, residual: f64, tol: f64 },
    #[error("quadrature failed to converge: {reason}")]
    QuadratureFailure { reason: String },
    #[error("step unstable: speed*dt = {courant:e} exceeds grid spacing {spacing:e}")]
    StepUnstable { courant: f64, spacing: f64 },
    #[error("label out of range: {what}")]
    LabelOutOfRange { what: String },
    #[error("invalid j-window: {reason}")]
    WindowInvalid { reason: String },
    #[error("unknown subcommand `{name}`")]
    UnknownSubcommand { name: String },
    #[error("bad flag: {reason}")]
    BadFlag { reason: String },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
    #[error("io error: {reason}")]
    Io { reason: String },
}

impl Error {
    /// Short stable identifier used in machine-readable payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AxisUndefined { .. } => "AxisUndefined",
            Error::GibbsSingularity { .. } => "GibbsSingularity",
            Error::ChartSingular { .. } => "ChartSingular",
            Error::ResolutionMismatch { .. } => "ResolutionMismatch",
            Error::RankOutOfRange { .. } => "RankOutOfRange",
            Error::NotInIdeal { .. } => "NotInIdeal",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::StepUnstable { .. } => "StepUnstable",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::WindowInvalid { .. } => "WindowInvalid",
            Error::UnknownSubcommand { .. } => "UnknownSubcommand",
            Error::BadFlag { .. } => "BadFlag",
            Error::InvalidInput { .. } => "InvalidInput",
            Error::Io { .. } => "Io",
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AxisUndefined { .. }
                | Error::GibbsSingularity { .. }
                | Error::ChartSingular { .. }
                | Error::NotInIdeal { .. }
                | Error::QuadratureFailure { .. }
                | Error::StepUnstable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
