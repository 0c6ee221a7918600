//! Finite-precision laboratory for perfectoid towers, their small tilts and
//! the refined monoidal map between them.

pub mod arith;
pub mod axioms;
pub mod closure;
pub mod error;
pub mod layer;
pub mod linalg;
pub mod monoidal;
pub mod quotient;
pub mod ramified;
pub mod report;
pub mod suite;
pub mod syntax;
pub mod tilt;
pub mod torsion;
pub mod tower;

pub use error::{Error, Result};
