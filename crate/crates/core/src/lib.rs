//! Sparse R-vine copula structure selection with Lasso regularization paths.
//!
//! The pipeline runs in three steps on z-scale data: a Lasso-based ordering
//! of the variables, tree-by-tree assignment of regressors that respects the
//! proximity condition, and a regularization-path matrix `Λ` whose entries
//! say at which penalty each pair copula drops out. Thresholding `Λ` yields
//! independence patterns, and the remaining pair copulas are fitted by
//! maximum likelihood.
//!
//! The data, regression and thresholding layers are generic over the
//! floating-point type (`f32` or `f64`). Copula evaluation and vine fitting
//! work in `f64`.

pub mod error;
pub mod linalg;
pub mod scalar;
pub mod special;

pub mod copula;
pub mod data;
pub mod dissmann;
pub mod lasso;
pub mod pipeline;
pub mod rvine;
pub mod select;
pub mod threshold;
pub mod vine;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use copula::{Family, PairCopula, Rotation};
pub use rvine::{Edge, IndependencePattern, PartialMatrix, RVineMatrix, ValidityReport};

/// Double-precision dataset.
pub type Dataset = data::Dataset<f64>;
/// Single-precision dataset.
pub type Dataset32 = data::Dataset<f32>;
pub type LassoProblem = lasso::LassoProblem<f64>;
pub type LassoProblem32 = lasso::LassoProblem<f32>;
pub type RegularizationPath = lasso::RegularizationPath<f64>;
pub type SemModel = rvine::SemModel<f64>;
pub type RegPathMatrix = select::RegPathMatrix<f64>;
pub type Selection = select::Selection<f64>;
pub type Selection32 = select::Selection<f32>;
pub use vine::{FittedVine, VineFitConfig};
