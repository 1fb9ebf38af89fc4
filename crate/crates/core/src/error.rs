use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{bits} bits is insufficient for {what}: need at least {needed}")]
    InsufficientPrecision { bits: usize, needed: usize, what: String },

    #[error("fixed-point iteration is not contracting: ratio {ratio:.6} at step {step}")]
    NonContraction { step: usize, ratio: f64 },

    #[error("moment validation failed: |k| = {k} has residual {residual:e} > {tol:e}")]
    MomentValidation { k: i32, residual: f64, tol: f64 },

    #[error("taylor coefficient paths disagree at index {index} by {diff:e}")]
    TaylorMismatch { index: usize, diff: f64 },

    #[error("duplicate node b = {0}")]
    DuplicateNode(f64),

    #[error("ill-conditioned system: residual {residual:e} exceeds {tol:e}")]
    IllConditioned { residual: f64, tol: f64 },

    #[error("value overflows the exponent range: {0}")]
    Overflow(String),

    #[error("function evaluation failed at {0}")]
    Evaluation(String),

    #[error("tail certificate {bound:e} exceeds target {target:e}")]
    TailCertificate { bound: f64, target: f64 },

    #[error("ray point x_n = {point} lies beyond the sampled range [0, {max}]")]
    OutOfRange { point: f64, max: f64 },

    #[error("grid too coarse: need {needed} nodes per axis, have {have}")]
    GridTooCoarse { needed: usize, have: usize },

    #[error("decomposition witness inconsistent: mismatch {mismatch:e} > {tol:e}")]
    WitnessInconsistent { mismatch: f64, tol: f64 },

    #[error("shift by {shift} leaves the validated moment range")]
    RangeExit { shift: i32 },

    #[error("t_max = {t_max} is not below the estimated reach {reach:.6}")]
    ReachExceeded { t_max: f64, reach: f64 },

    #[error("invalid boundary curve: {0}")]
    InvalidCurve(String),

    #[error("point ({0}, {1}) is outside the tubular neighbourhood")]
    OutsideTube(f64, f64),

    #[error("nearest-point projection did not converge at ({0}, {1})")]
    ProjectionFailed(f64, f64),

    #[error("bump violates the disjointness precondition: clearance {clearance:.3e} < margin {margin:.3e}")]
    BumpNotDisjoint { clearance: f64, margin: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
