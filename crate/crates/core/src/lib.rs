//! Exact commuting-distance computations for square matrices.

pub mod census;
pub mod commute;
pub mod enumerate;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod graph;
pub mod matrix;

pub use error::{Error, Result};
pub use field::{Field, FieldSpec, FiniteField, Rationals};
pub use matrix::Matrix;
