use thiserror::Error;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mixture weights sum to {sum}, expected 1 (tolerance 1e-12)")]
    WeightSum { sum: f64 },
    #[error("negative mixture weight {weight} at index {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not positive semidefinite (curvature {curvature:e})")]
    NonPsd { curvature: f64 },
    #[error("quadrature failed to reach abs_tol {abs_tol:e} within {evaluations} evaluations")]
    QuadratureFailure { abs_tol: f64, evaluations: usize },
    #[error("method {0} is not available for this mixture")]
    UnsupportedMethod(&'static str),
    #[error("noise scale zeta is zero")]
    ZeroNoise,
    #[error("complexity scale B(n) is zero")]
    ZeroBn,
    #[error("critical equation is degenerate (a = {a}, b = {b})")]
    Degenerate { a: f64, b: f64 },
    #[error("sample too small: rho' = {rho} >= 1")]
    SampleTooSmall { rho: f64 },
    #[error("hyperplane mixture has zero spread (delta_w = 0)")]
    DegenerateMixture,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
