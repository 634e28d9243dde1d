//! Nondimensional five-wire trap: potential, units, Mathieu stability of
//! the linearized modes and the axial fixed points of the averaged model.

mod potential;
pub mod units;

pub use potential::{
    axis, five_wire_hessian, five_wire_local, five_wire_potential, null_curvature,
    trap_potential, trap_potential_local, FiveWire, TrapParams,
};
pub use units::{nondimensionalize, to_physical, AxialConfinement, PhysicalTrap, Scales};

use serde::Serialize;

use crate::constants::{DRIVE_PERIOD, Z0};
use crate::dynamics::integrator::{Dop853, OdeSystem, Tolerances};
use crate::numerics::bracketed_newton;
use crate::pseudopotential::axis_potential;
use crate::{Error, Result};

struct MathieuPair {
    a: f64,
    q: f64,
}

impl OdeSystem<4> for MathieuPair {
    fn rhs(&self, t: f64, s: &[f64; 4]) -> [f64; 4] {
        let k = self.a - 2.0 * self.q * (2.0 * t).cos();
        [s[1], -k * s[0], s[3], -k * s[2]]
    }
}

/// Monodromy matrix of x'' + (a − 2q cos 2t) x = 0 over one drive period.
pub fn mathieu_monodromy(a: f64, q: f64) -> Result<[[f64; 2]; 2]> {
    if !(a.is_finite() && q.is_finite()) {
        return Err(Error::validation("Mathieu parameters must be finite"));
    }
    let sys = MathieuPair { a, q };
    let mut s = Dop853::new(&sys, 0.0, [1.0, 0.0, 0.0, 1.0], Tolerances::new(1e-13, 1e-15), 1.0);
    s.advance_to(&sys, DRIVE_PERIOD)
        .map_err(|e| Error::Numerical(format!("Mathieu integration failed: {e:?}")))?;
    let y = s.state();
    Ok([[y[0], y[2]], [y[1], y[3]]])
}

/// Characteristic exponent ν in (0, 1) of x'' + (a − 2q cos 2t) x = 0.
///
/// The secular angular frequency of the mode is νΩ/2. Parameters outside
/// the lowest stability region give [`Error::Unstable`].
pub fn mathieu_exponent(a: f64, q: f64) -> Result<f64> {
    let m = mathieu_monodromy(a, q)?;
    let trace = m[0][0] + m[1][1];
    if trace.abs() >= 2.0 {
        return Err(Error::Unstable { a, q, trace });
    }
    Ok((0.5 * trace).acos() / std::f64::consts::PI)
}

/// One linearized secular mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub a: f64,
    pub q: f64,
    /// Trace of the one-period monodromy matrix.
    pub trace: f64,
    /// Characteristic exponent, `None` when the mode is unstable.
    pub nu: Option<f64>,
}

impl Mode {
    fn solve(a: f64, q: f64) -> Result<Self> {
        let m = mathieu_monodromy(a, q)?;
        let trace = m[0][0] + m[1][1];
        let nu = (trace.abs() < 2.0).then(|| (0.5 * trace).acos() / std::f64::consts::PI);
        Ok(Self { a, q, trace, nu })
    }

    pub fn is_stable(&self) -> bool {
        self.nu.is_some()
    }

    /// Secular angular frequency for drive angular frequency `omega_rf`.
    pub fn omega(&self, omega_rf: f64) -> Option<f64> {
        self.nu.map(|nu| 0.5 * nu * omega_rf)
    }

    /// Lowest-order averaged estimate √(a + q²/2).
    pub fn nu_pseudo(&self) -> Option<f64> {
        let v = self.a + 0.5 * self.q * self.q;
        (v > 0.0).then(|| v.sqrt())
    }
}

/// Linearized motion about the rf null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearModes {
    pub x: Mode,
    pub y: Mode,
    pub z: Mode,
}

impl LinearModes {
    pub fn all_stable(&self) -> bool {
        self.x.is_stable() && self.y.is_stable() && self.z.is_stable()
    }
}

/// Mathieu parameters and exponents of the three modes about (0, z0).
///
/// q is reported with the sign convention q_z = −q_y > 0; the exponents
/// do not depend on the sign of q.
pub fn linearize(p: &TrapParams) -> Result<LinearModes> {
    p.validate()?;
    let h = five_wire_local(0.0, Z0).hess;
    let (vyy, vzz) = (h[0][0], h[1][1]);
    let x = Mode::solve(p.a[0], 0.0)?;
    let y = Mode::solve(p.a[1] + p.a5 * vyy, -p.q5 * vyy)?;
    let z = Mode::solve(p.a[2] + p.a5 * vzz, -p.q5 * vzz)?;
    Ok(LinearModes { x, y, z })
}

/// Axial fixed points of the scaled averaged potential on y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoints {
    /// Stable point (the rf null).
    pub z_s: f64,
    /// Saddle above the trap, if the barrier exists within z ≤ 10.
    pub z_u: Option<f64>,
}

/// Locate the stable point and the escape saddle along z.
pub fn fixed_points(lambda: f64, lambda_b: f64) -> Result<FixedPoints> {
    if !(lambda.is_finite() && lambda >= 0.0 && lambda_b.is_finite()) {
        return Err(Error::validation(format!(
            "need finite lambda >= 0 and finite lambda_b, got {lambda}, {lambda_b}"
        )));
    }
    let z_s = Z0;
    let (_, _, k) = axis_potential(z_s, lambda, lambda_b);
    if k <= 0.0 {
        return Err(Error::domain(format!(
            "no axial confinement: curvature {k} at the rf null"
        )));
    }
    let dv = |z: f64| axis_potential(z, lambda, lambda_b).1;
    let d2v = |z: f64| axis_potential(z, lambda, lambda_b).2;
    let z_max: f64 = 10.0;
    let n = 200;
    let ratio = (z_max / z_s).ln();
    let mut prev = z_s * (ratio / n as f64 * 0.05).exp();
    let mut f_prev = dv(prev);
    for i in 1..=n {
        let z = z_s * (ratio * i as f64 / n as f64).exp();
        let f = dv(z);
        if f_prev > 0.0 && f <= 0.0 {
            let z_u = bracketed_newton(dv, d2v, prev, z, 1e-13)?;
            return Ok(FixedPoints { z_s, z_u: Some(z_u) });
        }
        prev = z;
        f_prev = f;
    }
    Ok(FixedPoints { z_s, z_u: None })
}
