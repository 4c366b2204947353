//! Negative association, Chernoff bounds, bilinear tail experiments, submatrix
//! tails and balanced 3-colorings of permutation cycle diagrams.

mod bilinear;
mod chernoff;
mod coloring;
mod na;
mod stats;
mod submatrix;

pub use bilinear::{
    bilinear_value, default_corpus, tail_experiment, BilinearSpec, CorpusEntry, MatrixDef, Sided, Stochastic,
    TailCorpus, TailReport, VectorDef,
};
pub use chernoff::{chernoff_lower, chernoff_upper, ChernoffBound};
pub use coloring::{balanced_3_coloring, ColoredCycles};
pub use na::{
    covariance_oracle, double_sided_moments, sample_na, ConsistentMatrix, CovMode, Covariance, Direction, Entry,
    MonotoneFn, MonotoneKind, Moments,
};
pub use stats::{binomial_sigma, normal_halfwidth};
pub use submatrix::{submatrix_experiment, submatrix_sample, SubmatrixReport};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("matrix is not square or rows have unequal length")]
    Shape,
    #[error("matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("rows are not consistently ordered")]
    NotConsistent,
    #[error("function index sets overlap at index {0}")]
    IndexOverlap(usize),
    #[error("function index {index} out of range for dimension {dim}")]
    IndexRange { index: usize, dim: usize },
    #[error("function is not monotone: {0}")]
    NotMonotone(String),
    #[error("functions have opposite monotonicity")]
    DirectionMismatch,
    #[error("exact covariance needs n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("gamma and mu must be positive")]
    DomainError,
    #[error("hypothesis violated: C ratio {0} < 1")]
    HypothesisViolated(f64),
    #[error("vectors must be non-negative, non-zero and of length {0}")]
    BadVector(usize),
    #[error("matrix is not doubly stochastic")]
    NotDoublyStochastic,
    #[error("K = {k} exceeds N/2 for N = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("trials must be at least 1")]
    NoTrials,
}
