//! Numeric tolerances shared by every module.
//!
//! All thresholds live in one immutable record so tests and production code
//! read the same numbers.

/// Tolerances and step sizes used across root selection, differencing and
/// integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Leading quartic coefficient is treated as zero below `degenerate_leading * max(1, |c0|)`.
    pub degenerate_leading: f64,
    /// Complex roots with `|im| <= imag_tolerance * |z|` count as real.
    pub imag_tolerance: f64,
    /// Irrational-equation residual bound, relative to `max(1, F^2)`.
    pub irrational_residual: f64,
    /// Quartic residual bound, relative to `max(1, F^4)`.
    pub quartic_residual: f64,
    /// Roots with `|y - F G|_h^2 < translation_floor * alpha^2` are spurious.
    pub translation_floor: f64,
    /// Relative step for first-order central differences of chart data.
    pub chart_fd_step: f64,
    /// Relative step for second-order central differences of the height function.
    pub chart_fd_step_second: f64,
    /// Relative step for spray differencing of the Finsler metric. Mixed
    /// second differences lose about `ε/h²` to rounding, so `1e-5` is too
    /// fine; `1e-4` balances that against Richardson truncation.
    pub metric_fd_step: f64,
    /// Relative step for the fundamental tensor. Second differences of a
    /// root-solved `F̃²` hit a rounding floor near `ε/h²`, so this is larger
    /// than `metric_fd_step`; Richardson extrapolation keeps truncation small.
    pub hessian_fd_step: f64,
    /// Minimum eigenvalue margin (relative to the trace) for positive definiteness.
    pub definiteness_margin: f64,
    /// `|C|` below this is reported as singular.
    pub singular_c: f64,
    /// `|E| / alpha^6` below this is reported as near singular.
    pub singular_e: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        degenerate_leading: 1e-12,
        imag_tolerance: 1e-10,
        irrational_residual: 1e-8,
        quartic_residual: 1e-9,
        translation_floor: 1e-12,
        chart_fd_step: 1e-6,
        chart_fd_step_second: 1e-4,
        metric_fd_step: 1e-4,
        hessian_fd_step: 1e-3,
        definiteness_margin: 1e-7,
        singular_c: 1e-12,
        singular_e: 1e-10,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}
