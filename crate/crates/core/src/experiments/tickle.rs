//! Survival of a thermal ensemble under a resonant tickle drive.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::thermal::thermal_member;
use crate::dynamics::{detect_escape, EscapeRegion, Field, PseudoField2D, RfField2D, Tickled};
use crate::trap_model::{linearize, nondimensionalize, PhysicalTrap, TrapParams};
use crate::dynamics::Tolerances;
use crate::{Error, Result};

/// Field used for the tickle runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    Rf,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TickleSpec {
    /// Tickle amplitudes U₀, V.
    pub amplitudes: Vec<f64>,
    /// Drive angular frequency, rad/s; 1.1·ω_z when absent.
    pub omega_d: Option<f64>,
    /// Field at the ion per volt of tickle, V/m per V.
    pub kappa: f64,
    /// Relative (y, z) force components.
    pub components: [f64; 2],
    /// Horizon, s.
    pub duration: f64,
    pub ensemble: usize,
    /// Ensemble temperature, K.
    pub temperature: f64,
    pub seed: u64,
    /// Points of the output time grid.
    pub time_points: usize,
    pub tol: f64,
    pub escape: EscapeRegion,
}

impl Default for TickleSpec {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.0],
            omega_d: None,
            kappa: 4.0e3,
            components: [1.0, 1.0],
            duration: 0.4e-3,
            ensemble: 200,
            temperature: 0.5e-3,
            seed: 1,
            time_points: 201,
            tol: 1e-9,
            escape: EscapeRegion::default(),
        }
    }
}

impl TickleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation(m.to_string()));
        if self.amplitudes.is_empty() || self.amplitudes.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
            return bad("tickle amplitudes must be a non-empty list of values >= 0");
        }
        if let Some(w) = self.omega_d {
            if !(w.is_finite() && w > 0.0) {
                return bad("omega_d must be positive");
            }
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad("duration must be positive");
        }
        if self.ensemble == 0 || self.time_points < 2 {
            return bad("ensemble and time_points must be positive (time_points >= 2)");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be >= 0");
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad("kappa must be >= 0");
        }
        if !(self.tol >= 1e-14 && self.tol <= 1e-6) {
            return bad("tol must lie in [1e-14, 1e-6]");
        }
        Ok(())
    }
}

/// Empirical survival probability of one ensemble at one amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub u0_volts: f64,
    pub model: FieldModel,
    /// Time grid, s.
    pub times: Vec<f64>,
    pub p_survive: Vec<f64>,
    /// Escape time per member, s; `None` when it survived the horizon.
    pub escape_times: Vec<Option<f64>>,
    pub n_ensemble: usize,
    pub seed: u64,
}

impl SurvivalCurve {
    fn from_escapes(u0: f64, model: FieldModel, duration: f64, points: usize, escapes: Vec<Option<f64>>, seed: u64) -> Self {
        let n = escapes.len();
        let mut sorted: Vec<f64> = escapes.iter().flatten().cloned().collect();
        sorted.sort_by(f64::total_cmp);
        let times: Vec<f64> = (0..points).map(|k| duration * k as f64 / (points - 1) as f64).collect();
        let p_survive = times
            .iter()
            .map(|&t| {
                let gone = sorted.partition_point(|&tau| tau <= t);
                (n - gone) as f64 / n as f64
            })
            .collect();
        Self { u0_volts: u0, model, times, p_survive, escape_times: escapes, n_ensemble: n, seed }
    }

    pub fn escaped(&self) -> usize {
        self.escape_times.iter().filter(|t| t.is_some()).count()
    }

    /// P_s in [0, 1], P_s(0) = 1 and non-increasing.
    pub fn check(&self) -> Result<()> {
        let ok_range = self.p_survive.iter().all(|p| (0.0..=1.0).contains(p));
        let mono = self.p_survive.windows(2).all(|w| w[1] <= w[0]);
        let start = self.p_survive.first() == Some(&1.0);
        if ok_range && mono && start {
            Ok(())
        } else {
            Err(Error::Numerical(format!("survival curve at U0 = {} violates its invariants", self.u0_volts)))
        }
    }
}

/// Scaled context shared by every member of a tickle run.
#[derive(Debug, Clone, Copy)]
pub struct TickleSetup {
    pub params: TrapParams,
    pub kt: f64,
    /// Scaled drive angular frequency.
    pub omega: f64,
    /// Scaled force per volt of tickle.
    pub force_per_volt: f64,
    /// Scaled horizon.
    pub horizon: f64,
    pub time_unit: f64,
}

pub fn tickle_setup(trap: &PhysicalTrap, spec: &TickleSpec) -> Result<TickleSetup> {
    spec.validate()?;
    let params = nondimensionalize(trap)?;
    let modes = linearize(&params)?;
    let sc = trap.scales();
    let omega_z = modes.z.omega(trap.omega_rf).ok_or_else(|| Error::validation("z mode is unstable"))?;
    let omega_d = spec.omega_d.unwrap_or(1.1 * omega_z);
    Ok(TickleSetup {
        params,
        kt: sc.thermal_energy(spec.temperature),
        omega: sc.frequency(omega_d),
        force_per_volt: 4.0 * trap.charge * spec.kappa / (trap.mass * trap.width * trap.omega_rf.powi(2)),
        horizon: spec.duration / sc.time,
        time_unit: sc.time,
    })
}

fn member_escape<F: Field<2>>(inner: F, setup: &TickleSetup, spec: &TickleSpec, u0: f64, index: u64) -> Result<Option<f64>> {
    let modes = linearize(&setup.params)?;
    let (s0, mut rng) = thermal_member(&modes, setup.kt, spec.seed, index)?;
    let phase = rng.gen::<f64>() * TAU;
    let a = setup.force_per_volt * u0;
    let field = Tickled { inner, amplitude: [a * spec.components[0], a * spec.components[1]], omega: setup.omega, phase };
    let tol = Tolerances::new(spec.tol, spec.tol * 1e-2);
    Ok(detect_escape(&field, &s0, setup.horizon, spec.escape, tol).map(|t| t * setup.time_unit))
}

/// Escape times of the ensemble at amplitude `u0`, in member order.
pub fn ensemble_escapes(setup: &TickleSetup, spec: &TickleSpec, model: FieldModel, u0: f64) -> Result<Vec<Option<f64>>> {
    let pseudo = PseudoField2D::matching(&setup.params)
        .ok_or_else(|| Error::validation("averaged model needs q5 > 0"))?;
    (0..spec.ensemble as u64)
        .into_par_iter()
        .map(|i| match model {
            FieldModel::Rf => member_escape(RfField2D(setup.params), setup, spec, u0, i),
            FieldModel::Pseudo => member_escape(pseudo, setup, spec, u0, i),
        })
        .collect()
}

/// Survival curve at one amplitude.
pub fn tickle_curve(trap: &PhysicalTrap, spec: &TickleSpec, model: FieldModel, u0: f64) -> Result<SurvivalCurve> {
    let setup = tickle_setup(trap, spec)?;
    let esc = ensemble_escapes(&setup, spec, model, u0)?;
    let c = SurvivalCurve::from_escapes(u0, model, spec.duration, spec.time_points, esc, spec.seed);
    c.check()?;
    Ok(c)
}

/// One survival curve per amplitude in `spec.amplitudes`.
pub fn tickle_survival(trap: &PhysicalTrap, spec: &TickleSpec, model: FieldModel) -> Result<Vec<SurvivalCurve>> {
    spec.amplitudes.iter().map(|&u| tickle_curve(trap, spec, model, u)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSurvival {
    pub rf: Vec<SurvivalCurve>,
    pub pseudo: Vec<SurvivalCurve>,
    /// max over amplitudes and times of |P_s,rf − P_s,pseudo|.
    pub max_delta: f64,
}

/// rf and averaged-model curves on identical ensembles.
pub fn rf_vs_pseudo_survival(trap: &PhysicalTrap, spec: &TickleSpec) -> Result<PairedSurvival> {
    let rf = tickle_survival(trap, spec, FieldModel::Rf)?;
    let pseudo = tickle_survival(trap, spec, FieldModel::Pseudo)?;
    let max_delta = rf
        .iter()
        .zip(&pseudo)
        .flat_map(|(a, b)| a.p_survive.iter().zip(&b.p_survive).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    Ok(PairedSurvival { rf, pseudo, max_delta })
}

/// Located escape threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Largest probed amplitude with no escapes.
    pub u0_star: f64,
    /// Smallest probed amplitude with an escape.
    pub u0_upper: f64,
    pub at_star: SurvivalCurve,
    /// Curve at 1.3·U₀*.
    pub above: SurvivalCurve,
}

impl Threshold {
    pub fn escape_fraction_above(&self) -> f64 {
        self.above.escaped() as f64 / self.above.n_ensemble as f64
    }
}

/// Bracket the amplitude where the first ensemble member escapes.
///
/// `grid` is scanned upward for the first amplitude with any escape; the
/// bracket is then bisected until its relative width is below `rel_tol`.
pub fn find_threshold(trap: &PhysicalTrap, spec: &TickleSpec, model: FieldModel, grid: &[f64], rel_tol: f64) -> Result<Threshold> {
    let setup = tickle_setup(trap, spec)?;
    let run = |u: f64| -> Result<SurvivalCurve> {
        let esc = ensemble_escapes(&setup, spec, model, u)?;
        Ok(SurvivalCurve::from_escapes(u, model, spec.duration, spec.time_points, esc, spec.seed))
    };
    let mut lo: Option<SurvivalCurve> = None;
    let mut hi: Option<f64> = None;
    for &u in grid {
        let c = run(u)?;
        if c.escaped() == 0 {
            lo = Some(c);
        } else {
            hi = Some(u);
            break;
        }
    }
    let (mut lo, mut hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => return Err(Error::Numerical("amplitude grid does not bracket an escape threshold".into())),
    };
    while (hi - lo.u0_volts) > rel_tol * lo.u0_volts {
        let m = 0.5 * (hi + lo.u0_volts);
        let c = run(m)?;
        if c.escaped() == 0 {
            lo = c;
        } else {
            hi = m;
        }
    }
    let above = run(1.3 * lo.u0_volts)?;
    Ok(Threshold { u0_star: lo.u0_volts, u0_upper: hi, at_star: lo, above })
}
