//! Phase-space tools for ions in five-wire surface-electrode Paul traps.
//!
//! The crate evaluates the nondimensional trap potential, its
//! time-averaged pseudopotential, integrates exact and averaged equations
//! of motion, and measures Poincaré sections, invariant tori and
//! phase-space volumes.

pub mod cli_io;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod phase_analysis;
pub mod pseudopotential;
pub mod trap_model;

pub use error::{Error, Result};
