use crate::matrix::KernelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {left} and {right}")]
    ShapeMismatch {
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("non-finite entry at linear index {index}")]
    NonFinite { index: usize },
    #[error("invalid permutation {perm:?} for a tensor of order {order}")]
    InvalidPermutation { perm: Vec<usize>, order: usize },
    #[error("{op}: expected an even-order square tensor, got {shape}")]
    NotSquare { op: &'static str, shape: String },
    #[error("weight not Hermitian: {which} (relative asymmetry {asymmetry:.3e})")]
    WeightNotHermitian { which: &'static str, asymmetry: f64 },
    #[error("weight not positive definite: {which} (min eigenvalue {min_eigenvalue:.6e})")]
    WeightNotPositiveDefinite { which: &'static str, min_eigenvalue: f64 },
    #[error("tensor is not hyperdiagonal (off-diagonal mass {mass:.3e})")]
    NotHyperdiagonal { mass: f64 },
    #[error("{0} must be a nonzero tensor")]
    ZeroTensor(&'static str),
    #[error("lambda must be positive and finite, got {0}")]
    NonPositiveLambda(f64),
    #[error("at least one point is required")]
    EmptyPointSet,
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl Error {
    /// Whether the failure came from a numerical kernel rather than from
    /// validating the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Kernel(KernelError::NoConvergence { .. } | KernelError::Singular { .. })
        )
    }
}
