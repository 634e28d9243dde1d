//! Physical constants (CODATA 2018, SI) and fixed model geometry.

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELECTRON_MASS_U: f64 = 5.485_799_090_65e-4;

/// Neutral ⁹Be atomic mass in u.
pub const BE9_ATOMIC_MASS_U: f64 = 9.012_183_06;

/// Mass of a singly charged ⁹Be⁺ ion in kg.
pub fn be9_ion_mass() -> f64 {
    (BE9_ATOMIC_MASS_U - ELECTRON_MASS_U) * ATOMIC_MASS_UNIT
}

/// Height of the rf null above the surface in units of the electrode width.
pub const Z0: f64 = 0.866_025_403_784_438_6;

/// Drive period in scaled time (the drive is cos 2t).
pub const DRIVE_PERIOD: f64 = std::f64::consts::PI;

/// |d²V₅w/dz²| at the rf null, equal to 2/(√3 π).
pub const NULL_CURVATURE: f64 = 0.367_552_596_947_861_4;
