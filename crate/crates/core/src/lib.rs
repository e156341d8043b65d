//! Simulation workbench for a [[4,2,2]] error-detecting code compiled to a
//! neutral-atom native gateset: five-level noisy simulation, logical
//! benchmarking, a variational impurity-model study and Bell tomography.

pub mod aim;
pub mod circuit;
pub mod code;
pub mod error;
pub mod format;
pub mod gottesman;
pub mod levels;
pub mod linalg;
pub mod noise;
pub mod rng;
pub mod sim;
pub mod tomography;

pub use error::{Error, Result};
