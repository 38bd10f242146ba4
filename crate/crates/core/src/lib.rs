//! Gate synthesis for two-qubit open quantum systems with coherent and
//! incoherent piecewise-constant controls.
//!
//! Algebra is generic over [`Scalar`] (exact rationals work for the state
//! and gate constructions), numerics over [`Real`] (`f32`, `f64`). The
//! aliases below fix the usual double-precision instantiation.

pub mod annealing;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod objective;
pub mod quantum;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type Matrix = quantum::ComplexMatrix<f64>;
pub type Density = quantum::DensityMatrix<f64>;
pub type ExactMatrix = quantum::ComplexMatrix<num_rational::Ratio<i64>>;
pub type Problem = objective::GateProblem<f64>;
pub type Schedule = objective::ControlSchedule<f64>;
pub type System = dynamics::SystemSpec<f64>;
