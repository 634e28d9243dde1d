//! Direct quadrature of the 1D averaged-potential action.

use crate::numerics::{bracketed_newton, integrate};
use crate::pseudopotential::{axis_potential, Units};
use crate::trap_model::fixed_points;
use crate::{Error, Result};

/// Turning points z₁ < z_s < z₂ of the scaled axial potential at energy
/// `e` above the stable point.
pub fn turning_points(e: f64, lambda: f64, lambda_b: f64) -> Result<(f64, f64)> {
    let fp = fixed_points(lambda, lambda_b)?;
    let v0 = axis_potential(fp.z_s, lambda, lambda_b).0;
    let f = |z: f64| axis_potential(z, lambda, lambda_b).0 - v0 - e;
    let df = |z: f64| axis_potential(z, lambda, lambda_b).1;
    let z2 = match fp.z_u {
        Some(zu) => {
            let fu = f(zu);
            if fu < 0.0 {
                return Err(Error::domain(format!(
                    "energy {e} is above the barrier {}: no closed curve",
                    fu + e
                )));
            }
            if fu == 0.0 {
                zu
            } else {
                bracketed_newton(f, df, fp.z_s, zu, 1e-14)?
            }
        }
        None => {
            let mut hi = fp.z_s * 1.1;
            while f(hi) < 0.0 {
                hi *= 1.1;
                if hi > 50.0 {
                    return Err(Error::domain(format!("no outer turning point for energy {e}")));
                }
            }
            bracketed_newton(f, df, fp.z_s, hi, 1e-14)?
        }
    };
    let mut lo = 0.5 * fp.z_s;
    while f(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-6 {
            return Err(Error::domain(format!("no inner turning point for energy {e}")));
        }
    }
    let z1 = bracketed_newton(f, df, lo, fp.z_s, 1e-14)?;
    Ok((z1, z2))
}

/// Phase-space area 2∫√(2(E − V)) dz enclosed by the 1D averaged-potential
/// orbit of energy `energy` (measured from the stable point).
///
/// Energy and the returned action are in the given units; in rf units
/// J = q5·J_λ.
pub fn action_quadrature(energy: f64, lambda: f64, lambda_b: f64, units: Units) -> Result<f64> {
    let s = units.energy_factor();
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(Error::validation(format!("energy must be >= 0, got {energy}")));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::validation("rf units need q5 > 0"));
    }
    let e = energy / s;
    if e == 0.0 {
        return Ok(0.0);
    }
    let (z1, z2) = turning_points(e, lambda, lambda_b)?;
    let v0 = axis_potential(crate::constants::Z0, lambda, lambda_b).0;
    let mid = 0.5 * (z1 + z2);
    let half = 0.5 * (z2 - z1);
    // z = mid − half·cos θ removes the square-root endpoint singularities
    let integrand = |th: f64| {
        let z = mid - half * th.cos();
        let k = e - (axis_potential(z, lambda, lambda_b).0 - v0);
        (2.0 * k.max(0.0)).sqrt() * half * th.sin()
    };
    let j = 2.0 * integrate(integrand, 0.0, std::f64::consts::PI, 1e-10 / s.sqrt() / 2.0, 0.0)?;
    Ok(j * s.sqrt())
}

/// Area of the separatrix of the scaled axial potential, if a barrier exists.
pub fn separatrix_action(lambda: f64, lambda_b: f64) -> Result<Option<f64>> {
    match crate::pseudopotential::barrier_energy(lambda, lambda_b)? {
        Some(eb) => Ok(Some(action_quadrature(eb, lambda, lambda_b, Units::Scaled)?)),
        None => Ok(None),
    }
}
