//! Orbit classification, invariant-torus actions and phase-space volumes.

mod action;
mod classify;
pub mod geometry;
mod scan;
mod torus;
mod volume;

pub use action::{action_quadrature, separatrix_action, turning_points};
pub use classify::{classify_orbit, curve_width, ClassifyOptions, OrbitClass};
pub use scan::{last_unbroken_torus, LastTorus, TorusScanOptions};
pub use torus::{partial_actions, scan_orbit, torus_actions, ScannedOrbit, TorusInvariants, TorusOptions};
pub use volume::*;
