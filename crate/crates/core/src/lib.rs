//! Numerical supergeometry over spinor bundles: graded linear algebra,
//! Clifford and spin representations, spinor bilinear forms, Poincaré super
//! Lie algebras, model spin manifolds and a checker relating Killing vector
//! fields of the split supermanifold to twistor spinors.

pub mod error;
pub mod forms;
pub mod geometry;
pub mod graded;
pub mod killing;
pub mod clifford;
pub mod linalg;
pub mod poincare;

pub use error::{Error, Result};
