//! Thermal ensembles about the trap center.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::Z0;
use crate::dynamics::PhaseState;
use crate::trap_model::LinearModes;
use crate::{Error, Result};

/// Generator for ensemble member `index`: one ChaCha stream per index, so
/// draws do not depend on execution order.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Phase-space sample of member `index` for the y and z secular modes.
///
/// Each mode gets x ~ N(0, kT/ν²) and p ~ N(0, kT), i.e. a mean energy of
/// kT per mode; `kt` is in scaled energy units.
pub fn thermal_member(modes: &LinearModes, kt: f64, seed: u64, index: u64) -> Result<(PhaseState, ChaCha8Rng)> {
    let (nu_y, nu_z) = match (modes.y.nu, modes.z.nu) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::validation("thermal sampling needs stable y and z modes")),
    };
    if !(kt.is_finite() && kt >= 0.0) {
        return Err(Error::validation(format!("temperature must be >= 0, got kT = {kt}")));
    }
    let mut rng = member_rng(seed, index);
    let s = kt.sqrt();
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    let (y, z, py, pz) = (g() * s / nu_y, g() * s / nu_z, g() * s, g() * s);
    Ok((PhaseState::new_2d(y, Z0 + z, py, pz, 0.0), rng))
}

/// `n` thermal states; deterministic in `seed`.
pub fn sample_thermal(modes: &LinearModes, kt: f64, n: usize, seed: u64) -> Result<Vec<PhaseState>> {
    (0..n as u64).map(|i| thermal_member(modes, kt, seed, i).map(|x| x.0)).collect()
}

/// Mean energy per (y, z) mode of an ensemble in the linearized model.
pub fn mode_energies(modes: &LinearModes, states: &[PhaseState]) -> Option<(f64, f64)> {
    let (nu_y, nu_z) = (modes.y.nu?, modes.z.nu?);
    let n = states.len().max(1) as f64;
    let ey = states.iter().map(|s| 0.5 * (s.py * s.py + (nu_y * s.y).powi(2))).sum::<f64>() / n;
    let ez = states.iter().map(|s| 0.5 * (s.pz * s.pz + (nu_z * (s.z - Z0)).powi(2))).sum::<f64>() / n;
    Some((ey, ez))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap_model::{linearize, TrapParams};

    fn modes() -> LinearModes {
        linearize(&TrapParams::from_lambda(0.02_f64.powi(2), 0.0, 0.43).unwrap()).unwrap()
    }

    #[test]
    fn zero_temperature_is_the_fixed_point() {
        for s in sample_thermal(&modes(), 0.0, 10, 1).unwrap() {
            assert_eq!(s, PhaseState::new_2d(0.0, Z0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn equipartition() {
        let m = modes();
        let kt = 1e-5;
        let s = sample_thermal(&m, kt, 10_000, 7).unwrap();
        let (ey, ez) = mode_energies(&m, &s).unwrap();
        assert!((ey / kt - 1.0).abs() < 0.05 && (ez / kt - 1.0).abs() < 0.05, "{ey} {ez}");
    }

    #[test]
    fn seeds_are_reproducible() {
        let m = modes();
        let a = sample_thermal(&m, 1e-5, 50, 3).unwrap();
        assert_eq!(a, sample_thermal(&m, 1e-5, 50, 3).unwrap());
        assert_ne!(a, sample_thermal(&m, 1e-5, 50, 4).unwrap());
        // members do not depend on ensemble size
        assert_eq!(a[..20], sample_thermal(&m, 1e-5, 20, 3).unwrap()[..]);
    }
}
