use thiserror::Error;

/// Every failure mode the solvers can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QesError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("sector is empty: {0}")]
    EmptySector(String),

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("angular momentum l = {0} hits a forbidden value -n-3/2")]
    SingularL(f64),

    #[error("homotopy continuation lost a branch: {0}")]
    ContinuationFailure(String),

    #[error("Bethe root certification failed: residual {residual:e} exceeds {tolerance:e}")]
    CertificationFailure { residual: f64, tolerance: f64 },

    #[error("coincident Bethe roots (min separation {0:e})")]
    DegenerateConfiguration(f64),

    #[error("BAE solution count {found} does not match sector dimension {expected}")]
    Incomplete { found: usize, expected: usize },

    #[error("series did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("no sign change found while bracketing: {0}")]
    BracketFailure(String),

    #[error("adjacent levels not resolved: {0}")]
    ResolutionFailure(String),

    #[error("a complex-conjugate pair of eigenvalues is indicated near E = {0}")]
    ComplexEigenvalue(f64),

    #[error("contour error: {0}")]
    ContourError(String),

    #[error("bound states need the exp(Aγ cosh x / 4) factor to decay (got Aγ = {0} along the line)")]
    DomainError(f64),

    #[error("potential is singular at x = {0}")]
    SingularPoint(String),

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("Wronskian vanishes at x = {0}")]
    WronskianZero(f64),

    #[error("{0}")]
    Mismatch(String),

    #[error("no zero mode: lowest level of the partner is {0}")]
    MissingZeroMode(f64),

    #[error("level {index} differs between partners: {left} vs {right}")]
    LevelMismatch { index: usize, left: f64, right: f64 },
}

pub type Result<T> = std::result::Result<T, QesError>;
