//! Error type shared by the whole crate.

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("matrix is not symmetric positive-definite ({reason})")]
    NotPositiveDefinite { reason: &'static str },

    #[error("matrix is not orthogonal (max |R^T R - I| = {defect:.3e})")]
    NotOrthogonal { defect: f64 },

    #[error("covariance lies outside S_kappa for kappa = {kappa} (cond = {cond:.6e}, |det - 1| = {det_defect:.3e})")]
    OutsideConstraintSet {
        kappa: f64,
        cond: f64,
        det_defect: f64,
    },

    #[error("suboptimality is not available for this objective")]
    SuboptimalityUnavailable,

    #[error("suboptimality must be exact here; Monte-Carlo estimates cannot be nested")]
    NestedEstimation,

    #[error("the mean sits at the optimum: normalized step-size is undefined")]
    AtOptimum,

    #[error("step size {sigma:.3e} left the representable range at iteration {iteration}")]
    StepSizeOutOfRange { sigma: f64, iteration: u64 },

    #[error("process does not satisfy the drift condition: {reason}")]
    InadmissibleProcess { reason: &'static str },

    #[error("not enough data: {what}")]
    NotEnoughData { what: &'static str },
}
