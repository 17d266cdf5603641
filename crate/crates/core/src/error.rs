use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by an operand of modulus {modulus:e} (below the division guard)")]
    DivisionNearZero { modulus: f64 },

    #[error("variable x{} referenced but the point has dimension {dim}", .index + 1)]
    VariableIndexOutOfRange { index: usize, dim: usize },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("metric is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    MetricNotSpd { min_eigenvalue: f64 },

    #[error("hermitian metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    MetricNotPd { min_eigenvalue: f64 },

    #[error("hermitian metric components are not hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("metric components are not symmetric at ({row}, {col})")]
    AsymmetricMetric { row: usize, col: usize },

    #[error("metric component ({row}, {col}) has imaginary part {imag:e}")]
    ComplexMetricComponent { row: usize, col: usize, imag: f64 },

    #[error("metric inverse check failed: |g g^-1 - I| = {residual:e}")]
    InverseCheckFailed { residual: f64 },

    #[error("target metric is not flagged as Kaehler")]
    TargetNotKaehler,

    #[error("source chart is not flagged as Kaehler")]
    SourceNotKaehler,

    #[error("Kaehler claim violated: closedness residual {residual:e} at {point:?}")]
    KaehlerClaimViolated { residual: f64, point: Vec<f64> },

    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("map is not PHWC at this point (residual {residual:e})")]
    NotPhwcAtPoint { residual: f64 },

    #[error("rank decision ambiguous: pivot norm {pivot:e} lies in the ambiguity band below {rank_tol:e}")]
    RankDeficiencyAmbiguous { pivot: f64, rank_tol: f64 },

    #[error(
        "f-structure rank jumps on the difference stencil ({center} at centre, {neighbour} nearby)"
    )]
    RankJumpOnStencil { center: usize, neighbour: usize },

    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),

    #[error("flow stalled: step size underflow after {halvings} halvings at step {step}")]
    StepSizeUnderflow { step: usize, halvings: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
