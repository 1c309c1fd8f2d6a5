//! Exact jet-space algebra for bi-Hamiltonian pairs.

pub mod algebra;
pub mod diffop;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod json;
pub mod linalg;
pub mod pipeline;
pub mod tensor;
pub mod transform;
pub mod variational;
pub mod wdvv;

pub use error::{Error, Result};
