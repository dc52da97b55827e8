//! Combinatorial moment method for symmetric random tensors.

pub mod counting;
pub mod error;
pub mod experiments;
pub mod hypergraph;
pub mod limitlaw;
pub mod maps;
pub mod numerics;
pub mod tensor;

pub use error::{Error, Result};
