//! Run configuration files.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::constants::{be9_ion_mass, ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
use crate::dynamics::{Axis, Crossing, Direction, EscapeRegion};
use crate::experiments::{FieldModel, SweepGrid, TickleSpec};
use crate::phase_analysis::TorusScanOptions;
use crate::trap_model::{nondimensionalize, AxialConfinement, PhysicalTrap, TrapParams};
use crate::{Error, Result};

/// Axial DC confinement in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxialDc {
    /// Volts.
    pub u_dc: f64,
    /// Curvature length², m².
    pub c_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrapSpec {
    /// Laboratory parameters.
    Physical {
        /// Ion mass in u; ⁹Be⁺ when absent.
        mass_u: Option<f64>,
        #[serde(default = "one")]
        charge_e: f64,
        width_um: f64,
        /// Drive frequency Ω/2π, MHz.
        rf_mhz: f64,
        u_rf: f64,
        #[serde(default)]
        u_bias: f64,
        /// Axial frequency ω_x/2π, MHz.
        axial_mhz: Option<f64>,
        axial_dc: Option<AxialDc>,
    },
    /// Mathieu-style parameters of the scaled model.
    Nondimensional {
        a_x: f64,
        q5: f64,
        #[serde(default)]
        a5: f64,
    },
    /// Averaged-potential parameters λ and λ_b with the rf amplitude q5.
    Scaled {
        sqrt_lambda: f64,
        #[serde(default)]
        sqrt_lambda_b: f64,
        q5: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl TrapSpec {
    /// Laboratory description, when the trap is given in laboratory units.
    pub fn physical(&self) -> Result<Option<PhysicalTrap>> {
        let TrapSpec::Physical { mass_u, charge_e, width_um, rf_mhz, u_rf, u_bias, axial_mhz, axial_dc } = self else {
            return Ok(None);
        };
        let omega_rf = std::f64::consts::TAU * rf_mhz * 1e6;
        let axial = match (axial_mhz, axial_dc) {
            (Some(f), None) => AxialConfinement::Frequency { omega_x: std::f64::consts::TAU * f * 1e6 },
            (None, Some(d)) => AxialConfinement::Dc { u_dc: d.u_dc, c_x: d.c_x },
            _ => return Err(Error::validation("trap: give exactly one of `axial_mhz` or `axial_dc`")),
        };
        let t = PhysicalTrap {
            mass: mass_u.map_or_else(be9_ion_mass, |m| m * ATOMIC_MASS_UNIT),
            charge: charge_e * ELEMENTARY_CHARGE,
            width: width_um * 1e-6,
            omega_rf,
            u_rf: *u_rf,
            u_bias: *u_bias,
            axial,
        };
        t.validate()?;
        Ok(Some(t))
    }

    pub fn params(&self) -> Result<TrapParams> {
        match self {
            TrapSpec::Physical { .. } => nondimensionalize(&self.physical()?.expect("physical spec")),
            TrapSpec::Nondimensional { a_x, q5, a5 } => TrapParams::new(*a_x, *q5, *a5),
            TrapSpec::Scaled { sqrt_lambda, sqrt_lambda_b, q5 } => {
                TrapParams::from_lambda(sqrt_lambda.powi(2), sqrt_lambda_b.powi(2), *q5)
            }
        }
    }
}

/// Launch condition of a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default)]
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub py: f64,
    #[serde(default)]
    pub pz: f64,
}

/// Section flavour in config form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrossingSpec {
    Stroboscopic {
        #[serde(default)]
        phase: f64,
    },
    /// y = 0 crossed upward.
    Plane,
}

impl CrossingSpec {
    pub fn crossing(&self) -> Crossing {
        match *self {
            CrossingSpec::Stroboscopic { phase } => Crossing::Stroboscopic { phase },
            CrossingSpec::Plane => Crossing::Plane { axis: Axis::Y, value: 0.0, direction: Direction::Upward },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    /// Self-checks of the trap, units and fixed points.
    Validate,
    Simulate {
        initial: Initial,
        #[serde(default = "two")]
        dim: usize,
        model: FieldModel,
        periods: f64,
        /// Sample spacing in drive periods.
        #[serde(default = "one")]
        sample_periods: f64,
    },
    Section {
        #[serde(default = "one_usize")]
        dim: usize,
        model: FieldModel,
        crossing: CrossingSpec,
        /// Launch heights at p_z = 0.
        z0: Vec<f64>,
        /// Shell energy for plane sections (launch p_y from it), model units.
        energy: Option<f64>,
        crossings: usize,
    },
    Characterize {
        #[serde(default)]
        grid: SweepGrid,
        #[serde(default = "default_jump")]
        jump_threshold: f64,
    },
    Volumes {
        sqrt_lambda: Vec<f64>,
        sqrt_lambda_b: Vec<f64>,
        /// rf amplitudes in volts (physical trap) ...
        u_rf: Option<Vec<f64>>,
        /// ... or q5 values directly.
        q5: Option<Vec<f64>>,
        #[serde(default = "default_shells")]
        shells: usize,
        #[serde(default = "default_grid")]
        grid: [usize; 2],
        #[serde(default = "default_rf_periods")]
        rf_periods: usize,
        #[serde(default = "default_crossings")]
        section_crossings: usize,
        #[serde(default)]
        escape: EscapeRegion,
    },
    Tickle {
        #[serde(default)]
        spec: TickleSpec,
        /// Models to run; both gives paired curves.
        #[serde(default = "both_models")]
        models: Vec<FieldModel>,
        /// Optional amplitude grid for a threshold search.
        threshold_grid: Option<Vec<f64>>,
        #[serde(default = "default_rel_tol")]
        threshold_rel_tol: f64,
    },
}

fn two() -> usize {
    2
}
fn one_usize() -> usize {
    1
}
fn default_jump() -> f64 {
    0.2
}
fn default_shells() -> usize {
    40
}
fn default_grid() -> [usize; 2] {
    [24, 24]
}
fn default_rf_periods() -> usize {
    20_000
}
fn default_crossings() -> usize {
    1000
}
fn both_models() -> Vec<FieldModel> {
    vec![FieldModel::Rf, FieldModel::Pseudo]
}
fn default_rel_tol() -> f64 {
    0.02
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::Simulate { .. } => "simulate",
            Task::Section { .. } => "section",
            Task::Characterize { .. } => "characterize",
            Task::Volumes { .. } => "volumes",
            Task::Tickle { .. } => "tickle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trap: TrapSpec,
    pub task: Task,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Integrator tolerance for the task's trajectories.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl RunConfig {
    /// Parse and check a config document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::validation(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.params()?;
        if !(self.tol >= 1e-14 && self.tol <= 1e-6) {
            return Err(Error::validation(format!("tol must lie in [1e-14, 1e-6], got {}", self.tol)));
        }
        match &self.task {
            Task::Validate => {}
            Task::Simulate { dim, periods, sample_periods, .. } => {
                check_dim(*dim)?;
                if !(*periods > 0.0 && *sample_periods > 0.0) {
                    return Err(Error::validation("simulate: periods and sample_periods must be positive"));
                }
            }
            Task::Section { dim, z0, crossings, crossing, energy, .. } => {
                check_dim(*dim)?;
                if z0.is_empty() || *crossings == 0 {
                    return Err(Error::validation("section: need launch heights `z0` and crossings > 0"));
                }
                if matches!(crossing, CrossingSpec::Plane) && (*dim != 2 || energy.is_none()) {
                    return Err(Error::validation("section: plane sections need dim = 2 and an `energy`"));
                }
            }
            Task::Characterize { grid, .. } => grid.validate()?,
            Task::Volumes { sqrt_lambda, sqrt_lambda_b, u_rf, q5, shells, grid, rf_periods, .. } => {
                if sqrt_lambda.is_empty() || sqrt_lambda_b.is_empty() {
                    return Err(Error::validation("volumes: `sqrt_lambda` and `sqrt_lambda_b` must be non-empty"));
                }
                match (u_rf, q5) {
                    (Some(u), None) if !u.is_empty() => {
                        if self.trap.physical()?.is_none() {
                            return Err(Error::validation("volumes: `u_rf` needs a physical trap"));
                        }
                    }
                    (None, Some(q)) if !q.is_empty() => {}
                    _ => return Err(Error::validation("volumes: give exactly one non-empty `u_rf` or `q5` list")),
                }
                if *shells == 0 || grid[0] == 0 || grid[1] == 0 || *rf_periods == 0 {
                    return Err(Error::validation("volumes: shells, grid and rf_periods must be positive"));
                }
            }
            Task::Tickle { spec, models, .. } => {
                spec.validate()?;
                if models.is_empty() {
                    return Err(Error::validation("tickle: `models` must be non-empty"));
                }
                if self.trap.physical()?.is_none() {
                    return Err(Error::validation("tickle: needs a physical trap"));
                }
            }
        }
        Ok(())
    }

    /// Section-scan options derived from the characterize grid.
    pub fn scan(&self) -> Option<&TorusScanOptions> {
        match &self.task {
            Task::Characterize { grid, .. } => Some(&grid.scan),
            _ => None,
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::validation(format!("dim must be 1 or 2, got {d}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
[trap]
kind = "physical"
width_um = 50
rf_mhz = 100
u_rf = 30
axial_mhz = 2
[task]
kind = "validate"
"#;

    #[test]
    fn physical_trap_round_trip() {
        let c = RunConfig::parse(BASE).unwrap();
        let p = c.trap.params().unwrap();
        assert!((p.q5 - 0.65).abs() < 0.01);
        assert_eq!(c.task.name(), "validate");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::parse(&BASE.replace("seed = 3", "seed = 3\ncolour = 1")).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
    }

    #[test]
    fn missing_trap_names_the_field() {
        let e = RunConfig::parse("[task]\nkind = \"validate\"\n").unwrap_err();
        assert!(e.to_string().contains("trap"), "{e}");
    }
}
