use serde::{Deserialize, Serialize};

use super::fields::{Field, RfField1D, RfField2D};
use super::integrator::{Dop853, OdeSystem, StepFailure, Tolerances};
use super::{PhaseState, Termination, Trajectory};
use crate::constants::DRIVE_PERIOD;
use crate::trap_model::TrapParams;
use crate::{Error, Result};

/// Hamilton's equations for H = |p|²/2 + V as a first-order system.
///
/// With N = 2D + 1 the last component accumulates the Lagrangian
/// |p|²/2 − V, the extended phase space action density.
pub struct Canonical<F, const D: usize, const N: usize> {
    pub field: F,
}

impl<F: Field<D>, const D: usize, const N: usize> Canonical<F, D, N> {
    pub fn new(field: F) -> Self {
        assert!(N == 2 * D || N == 2 * D + 1, "state must hold q, p and optionally an action");
        Self { field }
    }
}

impl<F: Field<D>, const D: usize, const N: usize> OdeSystem<N> for Canonical<F, D, N> {
    #[inline]
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        let q: [f64; D] = std::array::from_fn(|i| y[i]);
        let mut out = [0.0; N];
        for i in 0..D {
            out[i] = y[D + i];
        }
        if N > 2 * D {
            let p2: f64 = (0..D).map(|i| y[D + i] * y[D + i]).sum();
            let (v, f) = self.field.evaluate(t, &q);
            out[D..2 * D].copy_from_slice(&f);
            out[2 * D] = 0.5 * p2 - v;
        } else {
            let f = self.field.force(t, &q);
            out[D..2 * D].copy_from_slice(&f);
        }
        out
    }
}

/// Region of configuration space counted as lost from the trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeRegion {
    pub z_max: f64,
    pub z_min: f64,
    pub y_max: f64,
}

impl Default for EscapeRegion {
    fn default() -> Self {
        Self { z_max: 4.0, z_min: 0.02, y_max: 4.0 }
    }
}

impl EscapeRegion {
    /// Positive inside the escape region, negative in the trap domain.
    pub fn margin<const D: usize>(&self, q: &[f64]) -> f64 {
        let z = q[D - 1];
        let mut m = (z - self.z_max).max(self.z_min - z);
        if D == 2 {
            m = m.max(q[0].abs() - self.y_max);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub tol: Tolerances,
    pub h_max: Option<f64>,
    pub escape: Option<EscapeRegion>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { tol: Tolerances::new(1e-10, 1e-12), h_max: None, escape: Some(EscapeRegion::default()) }
    }
}

impl IntegrationOptions {
    /// rtol = `tol`, atol = `tol`/100; valid range [1e-14, 1e-6].
    ///
    /// Scaled momenta are typically 1e-3..1e-1, so an absolute tolerance
    /// equal to the relative one would dominate the error norm.
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(Error::validation(format!("tolerance {tol} outside [1e-14, 1e-6]")));
        }
        Ok(Self { tol: Tolerances::new(tol, tol * 1e-2), ..Default::default() })
    }

    pub fn without_escape(mut self) -> Self {
        self.escape = None;
        self
    }

    pub fn escape(mut self, region: EscapeRegion) -> Self {
        self.escape = Some(region);
        self
    }
}

/// Why a propagation stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    Escaped { time: f64 },
    Domain { time: f64, detail: String },
}

impl From<Stop> for Termination {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Escaped { time } => Termination::Escaped { time },
            Stop::Domain { time, detail } => Termination::DomainError { time, detail },
        }
    }
}

impl From<Stop> for Error {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Escaped { time } => Error::Escaped { time },
            Stop::Domain { time, detail } => Error::Domain(format!("{detail} at t = {time}")),
        }
    }
}

/// Stepper bound to a field with escape monitoring.
pub struct Propagator<F, const D: usize, const N: usize> {
    sys: Canonical<F, D, N>,
    stepper: Dop853<N>,
    escape: Option<EscapeRegion>,
}

impl<F: Field<D>, const D: usize, const N: usize> Propagator<F, D, N> {
    pub fn new(field: F, t0: f64, y0: [f64; N], opts: &IntegrationOptions, direction: f64) -> Self {
        let sys = Canonical::new(field);
        let mut stepper = Dop853::new(&sys, t0, y0, opts.tol, direction);
        if let Some(h) = opts.h_max {
            stepper = stepper.with_max_step(h);
        }
        Self { sys, stepper, escape: opts.escape }
    }

    pub fn from_state(field: F, s: &PhaseState, opts: &IntegrationOptions, direction: f64) -> Self {
        Self::new(field, s.t, s.pack::<D, N>(), opts, direction)
    }

    pub fn time(&self) -> f64 {
        self.stepper.time()
    }

    pub fn state(&self) -> &[f64; N] {
        self.stepper.state()
    }

    pub fn phase_state(&self) -> PhaseState {
        PhaseState::unpack::<D, N>(self.stepper.state(), self.time())
    }

    pub fn previous_time(&self) -> f64 {
        self.stepper.previous_time()
    }

    pub fn previous_state(&self) -> [f64; N] {
        self.stepper.previous_state()
    }

    pub fn field(&self) -> &F {
        &self.sys.field
    }

    pub fn stats(&self) -> super::integrator::StepStats {
        self.stepper.stats()
    }

    /// Dense output inside the last accepted step.
    pub fn dense(&mut self, t: f64) -> [f64; N] {
        self.stepper.dense(&self.sys, t)
    }

    /// Bisect a sign change of `g` over the last step to |g| < `tol`.
    /// `g` must be negative at the start of the step and non-negative at
    /// its end. Returns (time, state, residual).
    pub fn locate<G: Fn(&[f64; N]) -> f64>(&mut self, g: G, tol: f64) -> (f64, [f64; N], f64) {
        let (mut a, mut b) = (self.previous_time(), self.time());
        let mut best = (b, *self.state(), g(self.state()));
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            let y = self.dense(m);
            let gm = g(&y);
            if gm.abs() < best.2.abs() || gm.abs() < tol {
                best = (m, y, gm);
            }
            if gm.abs() < tol {
                break;
            }
            if gm < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        best
    }

    /// One accepted step, not beyond `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> std::result::Result<(), Stop> {
        if let Err(e) = self.stepper.step(&self.sys, t_stop) {
            let (time, detail) = match e {
                StepFailure::Underflow { t, h } => (t, format!("step size underflow (h = {h:e})")),
                StepFailure::Diverged { t } => (t, "integration diverged".to_string()),
            };
            return Err(Stop::Domain { time, detail });
        }
        if let Some(region) = self.escape {
            if region.margin::<D>(&self.state()[..D]) >= 0.0 {
                let (time, _, _) = self.locate(|y| region.margin::<D>(&y[..D]), 1e-10);
                return Err(Stop::Escaped { time });
            }
        }
        Ok(())
    }

    pub fn advance_to(&mut self, t_end: f64) -> std::result::Result<(), Stop> {
        let dir = (t_end - self.time()).signum();
        while (t_end - self.time()) * dir > 0.0 {
            self.step(t_end)?;
        }
        Ok(())
    }
}

fn check_start(s0: &PhaseState) -> Result<()> {
    if !s0.is_finite() {
        return Err(Error::validation("initial state must be finite"));
    }
    Ok(())
}

/// Integrate from `s0` for `horizon` (negative for backward time).
///
/// Samples are taken every `sample_every` time units when given and at
/// every accepted step otherwise. Integration failures end the
/// trajectory with a recorded termination reason.
pub fn integrate<const D: usize, F: Field<D>>(
    field: &F,
    s0: PhaseState,
    horizon: f64,
    opts: &IntegrationOptions,
    sample_every: Option<f64>,
) -> Result<Trajectory> {
    check_start(&s0)?;
    if !horizon.is_finite() || horizon == 0.0 {
        return Err(Error::validation("horizon must be finite and non-zero"));
    }
    if let Some(dt) = sample_every {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation("sample interval must be positive"));
        }
    }
    Ok(match D {
        1 => integrate_n::<D, 2, F>(field, s0, horizon, opts, sample_every),
        _ => integrate_n::<D, 4, F>(field, s0, horizon, opts, sample_every),
    })
}

fn integrate_n<const D: usize, const N: usize, F: Field<D>>(
    field: &F,
    s0: PhaseState,
    horizon: f64,
    opts: &IntegrationOptions,
    sample_every: Option<f64>,
) -> Trajectory {
    let dir = horizon.signum();
    let t_end = s0.t + horizon;
    let mut prop = Propagator::<&F, D, N>::from_state(field, &s0, opts, dir);
    let autonomous = field.autonomous();
    let e0 = s0.energy::<D, F>(field);
    let e_scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let mut max_drift: f64 = 0.0;
    let mut samples = vec![s0];
    let mut k = 1_u64;
    let termination = loop {
        if (t_end - prop.time()) * dir <= 0.0 {
            break Termination::Horizon;
        }
        match prop.step(t_end) {
            Ok(()) => {
                match sample_every {
                    Some(dt) => loop {
                        let ts = s0.t + dir * dt * k as f64;
                        if (ts - prop.time()) * dir > 0.0 {
                            break;
                        }
                        let y = prop.dense(ts);
                        samples.push(PhaseState::unpack::<D, N>(&y, ts));
                        k += 1;
                    },
                    None => samples.push(prop.phase_state()),
                }
                if autonomous {
                    let e = prop.phase_state().energy::<D, F>(field);
                    max_drift = max_drift.max((e - e0).abs() / e_scale);
                }
            }
            Err(stop) => {
                if let Stop::Escaped { time } = stop {
                    let y = prop.dense(time);
                    samples.push(PhaseState::unpack::<D, N>(&y, time));
                }
                break stop.into();
            }
        }
    };
    if termination == Termination::Horizon && samples.last().map(|s| s.t) != Some(t_end) {
        samples.push(prop.phase_state());
    }
    let stats = prop.stats();
    Trajectory {
        samples,
        steps: stats.accepted,
        rejected: stats.rejected,
        max_energy_drift: autonomous.then_some(max_drift),
        termination,
    }
}

/// State after integrating from `s0` to time `t_end`.
pub fn propagate<const D: usize, F: Field<D>>(
    field: &F,
    s0: &PhaseState,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<PhaseState> {
    check_start(s0)?;
    let dir = if t_end < s0.t { -1.0 } else { 1.0 };
    match D {
        1 => {
            let mut p = Propagator::<&F, D, 2>::from_state(field, s0, opts, dir);
            p.advance_to(t_end)?;
            Ok(p.phase_state())
        }
        _ => {
            let mut p = Propagator::<&F, D, 4>::from_state(field, s0, opts, dir);
            p.advance_to(t_end)?;
            Ok(p.phase_state())
        }
    }
}

/// Advance one drive period of the full rf field.
///
/// `s.t` must equal `phase` modulo π. States with y = p_y = 0 stay on
/// the symmetry line and use the 1D equations.
pub fn stroboscopic_map(s: &PhaseState, params: &TrapParams, phase: f64) -> Result<PhaseState> {
    let k = ((s.t - phase) / DRIVE_PERIOD).round();
    if ((s.t - phase) - k * DRIVE_PERIOD).abs() > 1e-9 * s.t.abs().max(1.0) {
        return Err(Error::validation(format!(
            "state time {} is not at drive phase {phase} (mod pi)",
            s.t
        )));
    }
    let opts = IntegrationOptions { tol: Tolerances::new(1e-12, 1e-14), ..Default::default() };
    let t_end = s.t + DRIVE_PERIOD;
    if s.y == 0.0 && s.py == 0.0 {
        propagate(&RfField1D(*params), s, t_end, &opts)
    } else {
        propagate(&RfField2D(*params), s, t_end, &opts)
    }
}

/// Earliest time at which the trajectory enters `region`, if before
/// `s0.t + horizon`. Integration breakdown (step underflow near the
/// electrodes) counts as escape at the time it happens.
pub fn detect_escape<const D: usize, F: Field<D>>(
    field: &F,
    s0: &PhaseState,
    horizon: f64,
    region: EscapeRegion,
    tol: Tolerances,
) -> Option<f64> {
    let opts = IntegrationOptions { tol, h_max: None, escape: Some(region) };
    if region.margin::<D>(&s0.coords::<D>()) >= 0.0 {
        return Some(s0.t);
    }
    let r = match D {
        1 => Propagator::<&F, D, 2>::from_state(field, s0, &opts, 1.0).advance_to(s0.t + horizon),
        _ => Propagator::<&F, D, 4>::from_state(field, s0, &opts, 1.0).advance_to(s0.t + horizon),
    };
    match r {
        Ok(()) => None,
        Err(Stop::Escaped { time }) | Err(Stop::Domain { time, .. }) => Some(time),
    }
}
