use nalgebra::Complex;
use thiserror::Error;

/// Errors raised by metric evaluation, geometry and integration routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the chart's working domain")]
    OutsideDomain(f64, f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("metric tensor is degenerate (det = {det:e})")]
    DegenerateMetric { det: f64 },

    #[error("tangent vector must be nonzero")]
    ZeroVector,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("wind norm {wind_norm} violates the strong convexity bound {bound}")]
    ConvexityViolation { wind_norm: f64, bound: f64 },

    #[error("no admissible positive root of the metric quartic (candidates: {candidates:?})")]
    RootSelection { candidates: Vec<Complex<f64>> },

    #[error("nonpositive denominator {0:e} in Matsumoto-type metric")]
    NonPositiveDenominator(f64),

    #[error("|C| = {0:e} is numerically zero")]
    SingularC(f64),

    #[error("|E| = {value:e} below threshold {threshold:e} (alpha = {alpha}, F = {f_value})")]
    NearSingularE {
        value: f64,
        threshold: f64,
        alpha: f64,
        f_value: f64,
    },

    #[error("finite-difference spray oracle unavailable: {0}")]
    OracleUnavailable(&'static str),

    #[error("orthonormal wind frame undefined at a critical point")]
    FrameUndefined,

    #[error("resultant velocity vanishes")]
    DegenerateVelocity,

    #[error("operation not supported for this chart: {0}")]
    Unsupported(&'static str),

    #[error("all {0} directions of the time front failed")]
    FrontFailure(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
