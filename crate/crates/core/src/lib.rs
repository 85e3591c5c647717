//! Exact computation and verification of convergence-radius invariants of
//! nonarchimedean differential modules.

pub mod cli;
pub mod error;
pub mod module;
pub mod polyhedral;
pub mod pw_affine;
pub mod rational;
pub mod report;
pub mod transforms;
pub mod twisted;
pub mod valued;

pub use error::{Error, Result};
pub use rational::Q;
