//! Integration of Hamilton's equations for the rf and averaged fields,
//! stroboscopic maps, Poincaré sections and escape detection.

pub mod fields;
pub mod integrator;
mod propagator;
mod section;
pub mod splitting;

pub use fields::{
    Field, Harmonic, LinearMathieu, PseudoField1D, PseudoField2D, RfField1D, RfField2D, Tickled,
};
pub use integrator::{Dop853, OdeSystem, StepStats, Tolerances};
pub use propagator::{
    detect_escape, integrate, propagate, stroboscopic_map, Canonical, EscapeRegion,
    IntegrationOptions, Propagator, Stop,
};
pub use section::{poincare_section, trace_section, Axis, Crossing, Direction, Section, SectionOrbit, SectionPoint};

use serde::{Deserialize, Serialize};

/// Point in phase space. One-dimensional states keep y = p_y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PhaseState {
    pub y: f64,
    pub z: f64,
    pub py: f64,
    pub pz: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new_1d(z: f64, pz: f64, t: f64) -> Self {
        Self { y: 0.0, z, py: 0.0, pz, t }
    }

    pub fn new_2d(y: f64, z: f64, py: f64, pz: f64, t: f64) -> Self {
        Self { y, z, py, pz, t }
    }

    pub fn is_finite(&self) -> bool {
        [self.y, self.z, self.py, self.pz, self.t].iter().all(|v| v.is_finite())
    }

    /// Canonical coordinates: (z) for D = 1, (y, z) for D = 2.
    pub fn coords<const D: usize>(&self) -> [f64; D] {
        match D {
            1 => std::array::from_fn(|_| self.z),
            2 => std::array::from_fn(|i| if i == 0 { self.y } else { self.z }),
            _ => panic!("phase space dimension must be 1 or 2"),
        }
    }

    pub fn momenta<const D: usize>(&self) -> [f64; D] {
        match D {
            1 => std::array::from_fn(|_| self.pz),
            2 => std::array::from_fn(|i| if i == 0 { self.py } else { self.pz }),
            _ => panic!("phase space dimension must be 1 or 2"),
        }
    }

    /// Flat [q, p, extra...] vector; entries past 2D are zero.
    pub fn pack<const D: usize, const N: usize>(&self) -> [f64; N] {
        let q = self.coords::<D>();
        let p = self.momenta::<D>();
        std::array::from_fn(|i| {
            if i < D {
                q[i]
            } else if i < 2 * D {
                p[i - D]
            } else {
                0.0
            }
        })
    }

    pub fn unpack<const D: usize, const N: usize>(y: &[f64; N], t: f64) -> Self {
        match D {
            1 => Self::new_1d(y[0], y[1], t),
            2 => Self::new_2d(y[0], y[1], y[2], y[3], t),
            _ => panic!("phase space dimension must be 1 or 2"),
        }
    }

    /// H = |p|²/2 + V(q, t).
    pub fn energy<const D: usize, F: Field<D>>(&self, field: &F) -> f64 {
        let p = self.momenta::<D>();
        0.5 * p.iter().map(|v| v * v).sum::<f64>() + field.potential(self.t, &self.coords::<D>())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    Escaped { time: f64 },
    DomainError { time: f64, detail: String },
}

impl Termination {
    pub fn escape_time(&self) -> Option<f64> {
        match self {
            Termination::Escaped { time } => Some(*time),
            _ => None,
        }
    }
}

/// Sampled solution of one initial value problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub steps: u64,
    pub rejected: u64,
    /// Largest |E(t) − E(0)| / |E(0)| seen at accepted steps (autonomous fields).
    pub max_energy_drift: Option<f64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectories hold at least the initial state")
    }
}
