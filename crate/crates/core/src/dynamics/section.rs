use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::Field;
use super::propagator::{IntegrationOptions, Propagator};
use super::{PhaseState, Termination};
use crate::constants::DRIVE_PERIOD;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Coordinate increasing through the plane.
    Upward,
    Downward,
}

/// Surface of section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossing {
    /// Sample at t ≡ phase (mod π).
    Stroboscopic { phase: f64 },
    /// Sample when a coordinate crosses `value` in `direction`.
    Plane { axis: Axis, value: f64, direction: Direction },
}

impl Crossing {
    pub fn y_upward() -> Self {
        Crossing::Plane { axis: Axis::Y, value: 0.0, direction: Direction::Upward }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub state: PhaseState,
    pub t_cross: f64,
    /// Time since the previous crossing (or since launch for the first).
    pub return_time: f64,
    /// |coordinate − plane| at the refined crossing; zero for stroboscopic sections.
    pub residual: f64,
    /// Action accumulated since the previous crossing.
    pub action: f64,
}

impl SectionPoint {
    pub fn z_pz(&self) -> (f64, f64) {
        (self.state.z, self.state.pz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionOrbit {
    pub id: usize,
    pub initial: PhaseState,
    pub points: Vec<SectionPoint>,
    pub termination: Termination,
}

impl SectionOrbit {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(SectionPoint::z_pz).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub crossing: Crossing,
    pub energy: Option<f64>,
    pub orbits: Vec<SectionOrbit>,
}

/// Follow one trajectory and record its section crossings.
///
/// Stops after `max_crossings`, at `s0.t + horizon`, or on escape.
pub fn trace_section<const D: usize, F: Field<D>>(
    field: &F,
    s0: &PhaseState,
    crossing: Crossing,
    max_crossings: usize,
    horizon: f64,
    opts: &IntegrationOptions,
) -> SectionOrbit {
    match D {
        1 => trace_n::<D, 3, F>(field, s0, crossing, max_crossings, horizon, opts),
        _ => trace_n::<D, 5, F>(field, s0, crossing, max_crossings, horizon, opts),
    }
}

fn trace_n<const D: usize, const N: usize, F: Field<D>>(
    field: &F,
    s0: &PhaseState,
    crossing: Crossing,
    max_crossings: usize,
    horizon: f64,
    opts: &IntegrationOptions,
) -> SectionOrbit {
    let mut prop = Propagator::<&F, D, N>::from_state(field, s0, opts, 1.0);
    let t_end = s0.t + horizon;
    let mut points = Vec::new();
    let mut last_t = s0.t;
    let mut last_s = 0.0;
    let termination = match crossing {
        Crossing::Stroboscopic { phase } => {
            let mut k = ((s0.t - phase) / DRIVE_PERIOD).floor() + 1.0;
            if phase + k * DRIVE_PERIOD <= s0.t + 1e-12 {
                k += 1.0;
            }
            loop {
                if points.len() >= max_crossings {
                    break Termination::Horizon;
                }
                let tk = phase + k * DRIVE_PERIOD;
                if tk > t_end {
                    break Termination::Horizon;
                }
                if let Err(stop) = prop.advance_to(tk) {
                    break stop.into();
                }
                let y = *prop.state();
                points.push(SectionPoint {
                    state: PhaseState::unpack::<D, N>(&y, tk),
                    t_cross: tk,
                    return_time: tk - last_t,
                    residual: 0.0,
                    action: y[N - 1] - last_s,
                });
                last_t = tk;
                last_s = y[N - 1];
                k += 1.0;
            }
        }
        Crossing::Plane { axis, value, direction } => {
            let idx = match (axis, D) {
                (Axis::Z, _) => D - 1,
                (Axis::Y, 2) => 0,
                (Axis::Y, _) => {
                    return SectionOrbit {
                        id: 0,
                        initial: *s0,
                        points,
                        termination: Termination::DomainError {
                            time: s0.t,
                            detail: "y plane requested for a one-dimensional field".into(),
                        },
                    }
                }
            };
            let sign = match direction {
                Direction::Upward => 1.0,
                Direction::Downward => -1.0,
            };
            let g = move |y: &[f64; N]| sign * (y[idx] - value);
            loop {
                if points.len() >= max_crossings || prop.time() >= t_end {
                    break Termination::Horizon;
                }
                if let Err(stop) = prop.step(t_end) {
                    break stop.into();
                }
                let g0 = g(&prop.previous_state());
                let g1 = g(prop.state());
                if g0 < 0.0 && g1 >= 0.0 {
                    let (tc, yc, res) = prop.locate(g, 1e-10);
                    points.push(SectionPoint {
                        state: PhaseState::unpack::<D, N>(&yc, tc),
                        t_cross: tc,
                        return_time: tc - last_t,
                        residual: res.abs(),
                        action: yc[N - 1] - last_s,
                    });
                    last_t = tc;
                    last_s = yc[N - 1];
                }
            }
        }
    };
    SectionOrbit { id: 0, initial: *s0, points, termination }
}

/// Section of every ensemble member, computed in parallel with results
/// in ensemble order.
///
/// When `energy` is given for an autonomous field, every member must lie
/// on that shell to 1e-10.
pub fn poincare_section<const D: usize, F: Field<D>>(
    field: &F,
    ensemble: &[PhaseState],
    crossing: Crossing,
    energy: Option<f64>,
    max_crossings: usize,
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<Section> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::validation("section horizon must be positive"));
    }
    if let Some(e) = energy {
        if field.autonomous() {
            for (i, s) in ensemble.iter().enumerate() {
                let h = s.energy::<D, F>(field);
                if (h - e).abs() > 1e-10 * e.abs().max(1.0) {
                    return Err(Error::validation(format!(
                        "ensemble member {i} has energy {h}, not on the shell {e}"
                    )));
                }
            }
        }
    }
    let orbits = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut o = trace_section(field, s, crossing, max_crossings, horizon, opts);
            o.id = i;
            o
        })
        .collect();
    Ok(Section { crossing, energy, orbits })
}
