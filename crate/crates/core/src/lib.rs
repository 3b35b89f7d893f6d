//! Qubit-bus (qubus) compilation of BCS pairing Hamiltonians.
//!
//! The crate is `no_std` with `alloc`. It holds the hybrid qubit/coherent
//! state simulator, the instruction set and every sequence builder, the
//! model description and the operation-count formulas.

#![no_std]

extern crate alloc;

pub mod error;
pub mod hybrid;
pub mod linalg;
pub mod model;
pub mod resources;
pub mod sequence;

pub use error::{Error, Result};
pub use hybrid::{BranchTerm, HybridState};
pub use linalg::{CMatrix, ComplexAmp, Mat2};
pub use model::BcsModel;
