//! R-vine structure matrices, independence patterns and the linear
//! structural equation model they encode.

mod matrix;
mod pattern;
mod sem;

pub use matrix::{Edge, PartialMatrix, Property, RVineMatrix, ValidityReport, Violation};
pub use pattern::IndependencePattern;
pub use sem::{assemble_sem, regressor_sets, RegressorSets, SemModel};
