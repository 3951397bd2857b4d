use crate::lie::GroupKind;
use thiserror::Error;

pub type Result<V> = std::result::Result<V, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: usize },

    #[error("kind mismatch: expected {expected:?}, got {got:?}")]
    KindMismatch { expected: GroupKind, got: GroupKind },

    #[error("point kind mismatch: action `{action}` does not accept {got}")]
    PointKind { action: String, got: String },

    #[error("not a group element: {0}")]
    NotInGroup(String),

    #[error("rotation angle {angle} is within the excluded band around pi; perturb the input")]
    BranchAmbiguity { angle: f64 },

    #[error("projection onto the group failed: rotation block has determinant {det}")]
    ProjectionFailure { det: f64 },

    #[error("point norm {norm} is at the excluded origin")]
    ExcludedOrigin { norm: f64 },

    #[error("output map is not one-to-one on fibers (sample {sample})")]
    NotFiberInjective { sample: usize },

    #[error("vector field failed the equivariance pre-check: residual {residual}")]
    NotEquivariant { residual: f64 },

    #[error("landmark matrix is rank deficient: condition number {condition}")]
    RankDeficiency { condition: f64 },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("non-finite value at t = {t}")]
    NumericalBlowup { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observer problem violates `{0}`")]
    InvalidProblem(String),
}
