//! Conversion between laboratory parameters and the scaled model.
//!
//! Lengths are in electrode widths w, time in units of 2/Ω so the drive
//! reads cos 2t, and energies in m w² Ω² / 4.

use serde::{Deserialize, Serialize};

use super::potential::TrapParams;
use crate::constants::BOLTZMANN;
use crate::{Error, Result};

/// How the axial (x) confinement is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxialConfinement {
    /// Axial secular angular frequency ω_x in rad/s.
    Frequency { omega_x: f64 },
    /// DC voltage U_DC with curvature length² c_x (m²), a_x = 4eU/(mΩ²c_x).
    Dc { u_dc: f64, c_x: f64 },
}

/// Laboratory description of a trap and ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTrap {
    /// Ion mass, kg.
    pub mass: f64,
    /// Ion charge, C.
    pub charge: f64,
    /// Electrode width w, m.
    pub width: f64,
    /// Drive angular frequency Ω, rad/s.
    pub omega_rf: f64,
    /// rf amplitude, V.
    pub u_rf: f64,
    /// Static voltage on the rf strips, V.
    pub u_bias: f64,
    pub axial: AxialConfinement,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be positive and finite, got {v}")))
    }
}

impl PhysicalTrap {
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("charge", self.charge)?;
        positive("width", self.width)?;
        positive("omega_rf", self.omega_rf)?;
        if !(self.u_rf.is_finite() && self.u_rf >= 0.0) {
            return Err(Error::validation(format!("u_rf must be non-negative, got {}", self.u_rf)));
        }
        if !self.u_bias.is_finite() {
            return Err(Error::validation("u_bias must be finite"));
        }
        match self.axial {
            AxialConfinement::Frequency { omega_x } => positive("omega_x", omega_x),
            AxialConfinement::Dc { u_dc, c_x } => {
                positive("u_dc", u_dc)?;
                positive("c_x", c_x)
            }
        }
    }

    pub fn a_x(&self) -> f64 {
        match self.axial {
            AxialConfinement::Frequency { omega_x } => (2.0 * omega_x / self.omega_rf).powi(2),
            AxialConfinement::Dc { u_dc, c_x } => {
                4.0 * self.charge * u_dc / (self.mass * self.omega_rf.powi(2) * c_x)
            }
        }
    }

    /// q5 produced by an rf amplitude `u_rf` in this trap.
    pub fn q5_for(&self, u_rf: f64) -> f64 {
        2.0 * self.charge * u_rf / (self.mass * (self.width * self.omega_rf).powi(2))
    }

    /// rf amplitude needed for a given q5.
    pub fn u_rf_for(&self, q5: f64) -> f64 {
        q5 * self.mass * (self.width * self.omega_rf).powi(2) / (2.0 * self.charge)
    }

    pub fn with_u_rf(mut self, u_rf: f64) -> Self {
        self.u_rf = u_rf;
        self
    }

    pub fn scales(&self) -> Scales {
        Scales::new(self.mass, self.width, self.omega_rf)
    }
}

/// Unit conversions for a given ion mass, electrode width and drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// m per scaled length.
    pub length: f64,
    /// s per scaled time.
    pub time: f64,
    /// J per scaled energy.
    pub energy: f64,
    /// kg m/s per scaled momentum.
    pub momentum: f64,
}

impl Scales {
    pub fn new(mass: f64, width: f64, omega_rf: f64) -> Self {
        Self {
            length: width,
            time: 2.0 / omega_rf,
            energy: mass * (width * omega_rf).powi(2) / 4.0,
            momentum: mass * width * omega_rf / 2.0,
        }
    }

    /// k_B T in scaled energy units.
    pub fn thermal_energy(&self, kelvin: f64) -> f64 {
        BOLTZMANN * kelvin / self.energy
    }

    /// Scaled angular frequency of a laboratory angular frequency.
    pub fn frequency(&self, omega: f64) -> f64 {
        omega * self.time
    }
}

/// Map laboratory parameters onto the scaled model.
pub fn nondimensionalize(t: &PhysicalTrap) -> Result<TrapParams> {
    t.validate()?;
    let e0 = t.mass * (t.width * t.omega_rf).powi(2);
    let q5 = 2.0 * t.charge * t.u_rf / e0;
    let a5 = 4.0 * t.charge * t.u_bias / e0;
    TrapParams::new(t.a_x(), q5, a5)
}

/// Inverse of [`nondimensionalize`] given the ion, width and drive.
/// Axial confinement is returned as a frequency.
pub fn to_physical(p: &TrapParams, mass: f64, charge: f64, width: f64, omega_rf: f64) -> Result<PhysicalTrap> {
    p.validate()?;
    let e0 = mass * (width * omega_rf).powi(2);
    let out = PhysicalTrap {
        mass,
        charge,
        width,
        omega_rf,
        u_rf: p.q5 * e0 / (2.0 * charge),
        u_bias: p.a5 * e0 / (4.0 * charge),
        axial: AxialConfinement::Frequency { omega_x: 0.5 * omega_rf * p.a[0].sqrt() },
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{be9_ion_mass, ELEMENTARY_CHARGE};
    use std::f64::consts::PI;

    fn reference(u_rf: f64, fx_mhz: f64) -> PhysicalTrap {
        PhysicalTrap {
            mass: be9_ion_mass(),
            charge: ELEMENTARY_CHARGE,
            width: 50e-6,
            omega_rf: 2.0 * PI * 100e6,
            u_rf,
            u_bias: 0.0,
            axial: AxialConfinement::Frequency { omega_x: 2.0 * PI * fx_mhz * 1e6 },
        }
    }

    #[test]
    fn q5_of_thirty_volts() {
        // hand value: 2 e U / (m w² Ω²) with ⁹Be⁺
        let p = nondimensionalize(&reference(30.0, 2.0)).unwrap();
        assert!((p.q5 - 0.6508).abs() < 2e-4, "{}", p.q5);
        assert!((p.a[0] - 0.0016).abs() < 1e-12);
    }

    #[test]
    fn dc_axial_matches_frequency_form() {
        let mut t = reference(30.0, 2.0);
        let a_x = t.a_x();
        let c_x = 1e-8;
        let u_dc = a_x * t.mass * t.omega_rf.powi(2) * c_x / (4.0 * t.charge);
        t.axial = AxialConfinement::Dc { u_dc, c_x };
        assert!((t.a_x() - a_x).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let mut t = reference(42.0, 1.3);
        t.u_bias = -1.5;
        let p = nondimensionalize(&t).unwrap();
        let back = to_physical(&p, t.mass, t.charge, t.width, t.omega_rf).unwrap();
        assert!((back.u_rf - 42.0).abs() < 1e-12);
        assert!((back.u_bias + 1.5).abs() < 1e-12);
        let AxialConfinement::Frequency { omega_x } = back.axial else { unreachable!() };
        assert!((omega_x / (2.0 * PI * 1.3e6) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let mut t = reference(30.0, 2.0);
        t.width = 0.0;
        assert!(matches!(nondimensionalize(&t), Err(Error::Validation(_))));
        let mut t = reference(30.0, 2.0);
        t.axial = AxialConfinement::Frequency { omega_x: -1.0 };
        assert!(matches!(nondimensionalize(&t), Err(Error::Validation(_))));
    }
}
