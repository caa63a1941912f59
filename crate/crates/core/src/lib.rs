//! Transmission expansion with energy storage, solved by Benders
//! decomposition, the Bees Algorithm, or the hybrid of the two.

pub mod bees;
pub mod cuts;
pub mod error;
pub mod incumbent;
pub mod io;
pub mod lp;
pub mod model;
pub mod orchestrator;
pub mod scalar;
pub mod scout;
pub mod subproblem;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Instance64 = model::Instance<f64>;
pub type Instance32 = model::Instance<f32>;
pub type LinearProgramF64 = lp::LinearProgram<f64>;
pub type LinearProgramF32 = lp::LinearProgram<f32>;
pub type BendersCut64 = cuts::BendersCut<f64>;
pub type CutPool64 = cuts::CutPool<f64>;
