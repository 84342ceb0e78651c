//! Numerical laboratory for SU(2)²-invariant instantons and monopoles on
//! cohomogeneity-one Calabi-Yau 3-folds.

pub mod bubbling;
pub mod classify;
pub mod connections;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod local_families;
pub mod ode;
pub mod oracle;
pub mod series;

pub use error::{Error, Result};
