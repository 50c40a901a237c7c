pub mod collision;
pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod initial;
pub mod kernel;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
