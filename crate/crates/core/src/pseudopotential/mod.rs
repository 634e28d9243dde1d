//! Time-averaged (ponderomotive) description of the trap.
//!
//! The scaled model uses τ = q5·t so that the rf amplitude drops out:
//! energies scale as q5², momenta and actions as q5.

mod generic;

pub use generic::{
    build_pseudopotential, micromotion_transform, EffectivePotential, GenericDrivenPotential,
    ScalarField, VectorField, Waveform,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::Z0;
use crate::trap_model::{axis, five_wire_local};
use crate::{Error, Result};

/// Energy units of a pseudopotential evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "units", rename_all = "snake_case")]
pub enum Units {
    /// Scaled time q5·t; independent of the rf amplitude.
    Scaled,
    /// Same time and energy units as the full rf model.
    Rf { q5: f64 },
}

impl Units {
    pub fn energy_factor(&self) -> f64 {
        match self {
            Units::Scaled => 1.0,
            Units::Rf { q5 } => q5 * q5,
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Units::Rf { q5 } if !(q5.is_finite() && *q5 > 0.0) => {
                Err(Error::validation(format!("unscaled units need q5 > 0, got {q5}")))
            }
            _ => Ok(()),
        }
    }
}

/// Closed form of the averaged rf term |∇V₅w|²/4.
pub fn v_avg(y: f64, z: f64) -> f64 {
    let (y2, z2) = (y * y, z * z);
    let r2 = y2 + z2;
    let num = 16.0 * (16.0 * r2 * r2 + 24.0 * (y - z) * (y + z) + 9.0);
    let f = |c: f64| c * c + 4.0 * z2;
    let den = PI * PI * f(1.0 - 2.0 * y) * f(3.0 - 2.0 * y) * f(2.0 * y + 1.0) * f(2.0 * y + 3.0);
    num / den
}

/// ∇ of |∇V₅w|²/4, i.e. ½ H ∇V₅w.
pub fn v_avg_grad(y: f64, z: f64) -> [f64; 2] {
    let w = five_wire_local(y, z);
    let [gy, gz] = w.grad;
    let h = w.hess;
    [0.5 * (h[0][0] * gy + h[0][1] * gz), 0.5 * (h[1][0] * gy + h[1][1] * gz)]
}

/// Scaled axial potential on y = 0 with its first two z-derivatives:
/// −λ(z − z0)²/2 + (dV₅w/dz)²/4 − λ_b (V₅w − 1/3).
pub fn axis_potential(z: f64, lambda: f64, lambda_b: f64) -> (f64, f64, f64) {
    let g = axis::slope(z);
    let g1 = axis::curvature(z);
    let g2 = axis::third(z);
    let dz = z - Z0;
    let v = -0.5 * lambda * dz * dz + 0.25 * g * g - lambda_b * (axis::value(z) - 1.0 / 3.0);
    let dv = -lambda * dz + 0.5 * g * g1 - lambda_b * g;
    let d2v = -lambda + 0.5 * (g1 * g1 + g * g2) - lambda_b * g1;
    (v, dv, d2v)
}

fn require_lambda(lambda: Option<f64>) -> Result<f64> {
    match lambda {
        Some(l) if l.is_finite() && l >= 0.0 => Ok(l),
        Some(l) => Err(Error::validation(format!("lambda must be finite and >= 0, got {l}"))),
        None => Err(Error::validation("lambda is undefined without rf drive (q5 = 0)")),
    }
}

/// One-dimensional averaged potential along y = 0 and the force −dV/dz.
pub fn pseudo_1d(z: f64, lambda: Option<f64>, units: Units) -> Result<(f64, f64)> {
    let lambda = require_lambda(lambda)?;
    units.check()?;
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::domain(format!("z = {z} is not above the electrode plane")));
    }
    let (v, dv, _) = axis_potential(z, lambda, 0.0);
    let s = units.energy_factor();
    Ok((s * v, -s * dv))
}

/// Two-dimensional averaged potential
/// −λ[y² + (z − z0)²]/2 + |∇V₅w|²/4 − λ_b(V₅w − 1/3) and its force.
pub fn pseudo_2d(y: f64, z: f64, lambda: Option<f64>, lambda_b: f64, units: Units) -> Result<(f64, [f64; 2])> {
    let lambda = require_lambda(lambda)?;
    units.check()?;
    if !(y.is_finite() && z.is_finite() && z > 0.0) {
        return Err(Error::domain(format!("({y}, {z}) is not above the electrode plane")));
    }
    if !lambda_b.is_finite() {
        return Err(Error::validation("lambda_b must be finite"));
    }
    let (v, f) = pseudo_2d_local(y, z, lambda, lambda_b);
    let s = units.energy_factor();
    Ok((s * v, [s * f[0], s * f[1]]))
}

/// Unchecked scaled evaluation used in inner loops.
#[inline]
pub fn pseudo_2d_local(y: f64, z: f64, lambda: f64, lambda_b: f64) -> (f64, [f64; 2]) {
    let w = five_wire_local(y, z);
    let [gy, gz] = w.grad;
    let h = w.hess;
    let dz = z - Z0;
    let value = -0.5 * lambda * (y * y + dz * dz) + 0.25 * (gy * gy + gz * gz)
        - lambda_b * (w.value - 1.0 / 3.0);
    let fy = lambda * y - 0.5 * (h[0][0] * gy + h[0][1] * gz) + lambda_b * gy;
    let fz = lambda * dz - 0.5 * (h[1][0] * gy + h[1][1] * gz) + lambda_b * gz;
    (value, [fy, fz])
}

/// Barrier height V(z_u) − V(z_s) of the scaled 1D potential.
pub fn barrier_energy(lambda: f64, lambda_b: f64) -> Result<Option<f64>> {
    let fp = crate::trap_model::fixed_points(lambda, lambda_b)?;
    Ok(fp.z_u.map(|zu| axis_potential(zu, lambda, lambda_b).0 - axis_potential(fp.z_s, lambda, lambda_b).0))
}

/// Scaled small-oscillation frequency about the rf null along z.
pub fn center_frequency(lambda: f64, lambda_b: f64) -> Option<f64> {
    let k = axis_potential(Z0, lambda, lambda_b).2;
    (k > 0.0).then(|| k.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap_model::five_wire_potential;

    #[test]
    fn closed_form_is_gradient_square() {
        for &(y, z) in &[(0.0, 0.4), (0.2, Z0), (-0.7, 1.3), (1.1, 0.3), (3.0, 2.0)] {
            let (_, g) = five_wire_potential(y, z).unwrap();
            let expect = 0.25 * (g[0] * g[0] + g[1] * g[1]);
            assert!((v_avg(y, z) - expect).abs() < 1e-14 * expect.max(1.0), "({y},{z})");
        }
    }

    #[test]
    fn axis_form_matches_one_dimensional_closed_form() {
        for &z in &[0.3_f64, 0.9, 1.7, 3.2] {
            let z2 = z * z;
            let oracle = 16.0 * (3.0 - 4.0 * z2).powi(2)
                / (PI * PI * (9.0 + 40.0 * z2 + 16.0 * z2 * z2).powi(2));
            let (v, _) = pseudo_1d(z, Some(0.0), Units::Scaled).unwrap();
            assert!((v - oracle).abs() < 1e-15);
            assert!((v_avg(0.0, z) - oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn forces_match_finite_differences() {
        let (lam, lb) = (0.003, 0.05);
        let h = 1e-6;
        for &(y, z) in &[(0.1, 0.8), (-0.4, 1.4), (0.0, 2.0)] {
            let (_, f) = pseudo_2d(y, z, Some(lam), lb, Units::Scaled).unwrap();
            let v = |y: f64, z: f64| pseudo_2d(y, z, Some(lam), lb, Units::Scaled).unwrap().0;
            let fy = -(v(y + h, z) - v(y - h, z)) / (2.0 * h);
            let fz = -(v(y, z + h) - v(y, z - h)) / (2.0 * h);
            assert!((f[0] - fy).abs() < 1e-8 && (f[1] - fz).abs() < 1e-8);
        }
    }

    #[test]
    fn barrier_without_dc() {
        // V(z_u) with z_u² = 3/4 + √3 and V(z0) = 0
        let e = barrier_energy(0.0, 0.0).unwrap().unwrap();
        let z2: f64 = 0.75 + 3f64.sqrt();
        let oracle = 16.0 * (3.0 - 4.0 * z2).powi(2)
            / (PI * PI * (9.0 + 40.0 * z2 + 16.0 * z2 * z2).powi(2));
        assert!((e - oracle).abs() < 1e-15);
        assert!((e - 1.8187e-3).abs() < 1e-6);
    }

    #[test]
    fn center_frequency_closed_form() {
        let c = 2.0 / (3f64.sqrt() * PI);
        let nu = center_frequency(0.002, 0.0).unwrap();
        assert!((nu - (0.5 * c * c - 0.002).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn unscaled_is_q5_squared_times_scaled() {
        let (vs, fs) = pseudo_1d(1.2, Some(0.004), Units::Scaled).unwrap();
        let (vr, fr) = pseudo_1d(1.2, Some(0.004), Units::Rf { q5: 0.7 }).unwrap();
        assert!((vr - 0.49 * vs).abs() < 1e-16 && (fr - 0.49 * fs).abs() < 1e-16);
    }

    #[test]
    fn rejects_undefined_lambda() {
        assert!(matches!(pseudo_1d(1.0, None, Units::Scaled), Err(Error::Validation(_))));
        assert!(matches!(pseudo_1d(-1.0, Some(0.0), Units::Scaled), Err(Error::Domain(_))));
    }
}
