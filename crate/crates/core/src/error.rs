use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The display string always starts with the variant name so the CLI can
/// report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NotExpanding: {0}")]
    NotExpanding(String),
    #[error("NewtonDivergence: solve for target {target} did not converge in {iterations} iterations")]
    NewtonDivergence { target: f64, iterations: usize },
    #[error("TooManyPoints: {count} periodic points requested (limit {limit})")]
    TooManyPoints { count: u64, limit: u64 },
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),
    #[error("NoConvergence: {0}")]
    NoConvergence(String),
    #[error("NotPositive: value {value} at node {index}")]
    NotPositive { index: usize, value: f64 },
    #[error("FamilyNotExpanding: eps_max {eps_max} is below the step {step}")]
    FamilyNotExpanding { eps_max: f64, step: f64 },
    #[error("DegenerateVariance: sigma^2 = {0}")]
    DegenerateVariance(f64),
    #[error("NotStrictlyConvex: largest second difference {0} on the bracketing stretch")]
    NotStrictlyConvex(f64),
    #[error("SOutOfRange: s = {s} outside ({lo}, {hi})")]
    SOutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("NoHits: none of {samples} samples landed in [{a}, {b}]")]
    NoHits { a: f64, b: f64, samples: usize },
    #[error("CoboundaryObservable: sigma^2 = {0} (observable is cohomologous to a constant)")]
    CoboundaryObservable(f64),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Variant name, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotExpanding(_) => "NotExpanding",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::TooManyPoints { .. } => "TooManyPoints",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NoConvergence(_) => "NoConvergence",
            Error::NotPositive { .. } => "NotPositive",
            Error::FamilyNotExpanding { .. } => "FamilyNotExpanding",
            Error::DegenerateVariance(_) => "DegenerateVariance",
            Error::NotStrictlyConvex(_) => "NotStrictlyConvex",
            Error::SOutOfRange { .. } => "SOutOfRange",
            Error::NoHits { .. } => "NoHits",
            Error::CoboundaryObservable(_) => "CoboundaryObservable",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
