//! Five-wire electrode potential and the full nondimensional trap potential.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_PI;

use crate::constants::{NULL_CURVATURE, Z0};
use crate::{Error, Result};

/// Electrode edges (position, sign) of the two unit-width rf strips
/// occupying y in [1/2, 3/2] and [-3/2, -1/2].
const EDGES: [(f64, f64); 4] = [(0.5, 1.0), (1.5, -1.0), (-1.5, 1.0), (-0.5, -1.0)];

/// Value, gradient and Hessian of the unit-voltage five-wire potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveWire {
    pub value: f64,
    pub grad: [f64; 2],
    /// [[V_yy, V_yz], [V_yz, V_zz]]
    pub hess: [[f64; 2]; 2],
}

/// Unchecked evaluation; callers guarantee z > 0.
#[inline]
pub fn five_wire_local(y: f64, z: f64) -> FiveWire {
    let mut v = 0.0;
    let (mut gy, mut gz) = (0.0, 0.0);
    let (mut hyy, mut hyz) = (0.0, 0.0);
    for (e, s) in EDGES {
        let u = y - e;
        let r2 = u * u + z * z;
        let r4 = r2 * r2;
        v += s * (u / z).atan();
        gy += s * z / r2;
        gz -= s * u / r2;
        hyy -= s * 2.0 * u * z / r4;
        hyz += s * (u * u - z * z) / r4;
    }
    FiveWire {
        value: v * FRAC_1_PI,
        grad: [gy * FRAC_1_PI, gz * FRAC_1_PI],
        hess: [[hyy * FRAC_1_PI, hyz * FRAC_1_PI], [hyz * FRAC_1_PI, -hyy * FRAC_1_PI]],
    }
}

fn check_point(y: f64, z: f64) -> Result<()> {
    if !(y.is_finite() && z.is_finite()) {
        return Err(Error::domain(format!("non-finite position ({y}, {z})")));
    }
    if z <= 0.0 {
        return Err(Error::domain(format!("z = {z} is not above the electrode plane")));
    }
    Ok(())
}

/// Unit-voltage potential of the two rf strips and its gradient (∂y, ∂z).
pub fn five_wire_potential(y: f64, z: f64) -> Result<(f64, [f64; 2])> {
    check_point(y, z)?;
    let w = five_wire_local(y, z);
    Ok((w.value, w.grad))
}

/// Hessian [[V_yy, V_yz], [V_yz, V_zz]] of the five-wire potential.
pub fn five_wire_hessian(y: f64, z: f64) -> Result<[[f64; 2]; 2]> {
    check_point(y, z)?;
    Ok(five_wire_local(y, z).hess)
}

/// Closed forms on the symmetry axis y = 0.
pub mod axis {
    use super::*;

    /// V₅w(0, z) = (2/π)[atan(3/2z) − atan(1/2z)].
    pub fn value(z: f64) -> f64 {
        2.0 * FRAC_1_PI * ((1.5 / z).atan() - (0.5 / z).atan())
    }

    /// dV₅w/dz on the axis.
    pub fn slope(z: f64) -> f64 {
        let z2 = z * z;
        8.0 * FRAC_1_PI * (3.0 - 4.0 * z2) / ((4.0 * z2 + 1.0) * (4.0 * z2 + 9.0))
    }

    /// d²V₅w/dz² on the axis.
    pub fn curvature(z: f64) -> f64 {
        let z2 = z * z;
        let n = 3.0 - 4.0 * z2;
        let dn = -8.0 * z;
        let d = 16.0 * z2 * z2 + 40.0 * z2 + 9.0;
        let dd = 64.0 * z2 * z + 80.0 * z;
        8.0 * FRAC_1_PI * (dn * d - n * dd) / (d * d)
    }

    /// d³V₅w/dz³ on the axis, by differentiating the rational form again.
    pub fn third(z: f64) -> f64 {
        // g' = (8/π) P/D² with P = dn d − n dd
        let z2 = z * z;
        let n = 3.0 - 4.0 * z2;
        let dn = -8.0 * z;
        let ddn = -8.0;
        let d = 16.0 * z2 * z2 + 40.0 * z2 + 9.0;
        let dd = 64.0 * z2 * z + 80.0 * z;
        let ddd = 192.0 * z2 + 80.0;
        let p = dn * d - n * dd;
        let dp = ddn * d - n * ddd;
        8.0 * FRAC_1_PI * (dp * d - 2.0 * p * dd) / (d * d * d)
    }
}

/// Nondimensional trap parameters.
///
/// Harmonic curvatures `a = [a_x, a_y, a_z]` obey a_y = a_z = −a_x/2, `q5`
/// is the rf amplitude and `a5` the static voltage on the rf strips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub a: [f64; 3],
    pub q5: f64,
    pub a5: f64,
}

impl TrapParams {
    /// Symmetric DC confinement with axial curvature `a_x > 0`.
    pub fn new(a_x: f64, q5: f64, a5: f64) -> Result<Self> {
        if !(a_x.is_finite() && a_x > 0.0) {
            return Err(Error::validation(format!("a_x must be positive, got {a_x}")));
        }
        if !(q5.is_finite() && q5 >= 0.0) {
            return Err(Error::validation(format!("q5 must be non-negative, got {q5}")));
        }
        if !a5.is_finite() {
            return Err(Error::validation("a5 must be finite"));
        }
        Ok(Self { a: [a_x, -0.5 * a_x, -0.5 * a_x], q5, a5 })
    }

    /// Parameters from the scaled couplings λ = a_x/(2q5²), λ_b = −a5/q5².
    pub fn from_lambda(lambda: f64, lambda_b: f64, q5: f64) -> Result<Self> {
        if !(q5.is_finite() && q5 > 0.0) {
            return Err(Error::validation(format!("q5 must be positive, got {q5}")));
        }
        Self::new(2.0 * lambda * q5 * q5, q5, -lambda_b * q5 * q5)
    }

    /// λ = a_x/(2q5²); undefined without rf.
    pub fn lambda(&self) -> Option<f64> {
        (self.q5 > 0.0).then(|| self.a[0] / (2.0 * self.q5 * self.q5))
    }

    /// λ_b = −a5/q5²; undefined without rf.
    pub fn lambda_b(&self) -> Option<f64> {
        // + 0.0 folds −0 to 0 for a5 = 0
        (self.q5 > 0.0).then(|| -self.a5 / (self.q5 * self.q5) + 0.0)
    }

    pub fn z0(&self) -> f64 {
        Z0
    }

    /// Checks the curvature relation, for parameters built by hand.
    pub fn validate(&self) -> Result<()> {
        let [ax, ay, az] = self.a;
        if !(ax > 0.0 && ax.is_finite()) {
            return Err(Error::validation(format!("a_x must be positive, got {ax}")));
        }
        if (ay + 0.5 * ax).abs() > 1e-12 * ax || (az + 0.5 * ax).abs() > 1e-12 * ax {
            return Err(Error::validation("a_y and a_z must both equal -a_x/2"));
        }
        if !(self.q5 >= 0.0 && self.q5.is_finite() && self.a5.is_finite()) {
            return Err(Error::validation("q5 must be non-negative and a5 finite"));
        }
        Ok(())
    }
}

/// Unchecked potential and force at (y, z, t).
#[inline]
pub fn trap_potential_local(y: f64, z: f64, t: f64, p: &TrapParams) -> (f64, [f64; 2]) {
    let w = five_wire_local(y, z);
    let dz = z - Z0;
    let drive = p.a5 - 2.0 * p.q5 * (2.0 * t).cos();
    let value = 0.5 * (p.a[1] * y * y + p.a[2] * dz * dz) + drive * w.value;
    let force = [-(p.a[1] * y + drive * w.grad[0]), -(p.a[2] * dz + drive * w.grad[1])];
    (value, force)
}

/// Trap potential ½[a_y y² + a_z (z − z0)²] + (a5 − 2q5 cos 2t) V₅w and the
/// force −∇V in the x = 0 plane.
pub fn trap_potential(y: f64, z: f64, t: f64, p: &TrapParams) -> Result<(f64, [f64; 2])> {
    check_point(y, z)?;
    if !t.is_finite() {
        return Err(Error::domain("non-finite time"));
    }
    Ok(trap_potential_local(y, z, t, p))
}

/// Analytic V_zz at the rf null; equals −2/(√3π).
pub fn null_curvature() -> f64 {
    let c = axis::curvature(Z0);
    debug_assert!((c + NULL_CURVATURE).abs() < 1e-12);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn strip(y: f64, z: f64, c: f64) -> f64 {
        FRAC_1_PI * (((y - c + 0.5) / z).atan() - ((y - c - 0.5) / z).atan())
    }

    #[test]
    fn matches_superposed_strips() {
        for &(y, z) in &[(0.0, 0.5), (0.3, 1.2), (-2.0, 0.1), (5.0, 3.0)] {
            let (v, _) = five_wire_potential(y, z).unwrap();
            assert!((v - strip(y, z, 1.0) - strip(y, z, -1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn null_value_is_one_third() {
        let (v, g) = five_wire_potential(0.0, Z0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn boundary_values() {
        assert!((five_wire_potential(1.0, 1e-9).unwrap().0 - 1.0).abs() < 1e-8);
        assert!(five_wire_potential(0.0, 1e-9).unwrap().0.abs() < 1e-8);
        assert!(five_wire_potential(2.5, 1e-9).unwrap().0.abs() < 1e-8);
    }

    #[test]
    fn axis_forms_agree_with_general() {
        for &z in &[0.2, 0.7, Z0, 1.5, 4.0] {
            let w = five_wire_local(0.0, z);
            assert!((w.value - axis::value(z)).abs() < 1e-14);
            assert!((w.grad[1] - axis::slope(z)).abs() < 1e-14);
            assert!((w.hess[1][1] - axis::curvature(z)).abs() < 1e-13);
            let h = 1e-4;
            let fd = (axis::curvature(z + h) - axis::curvature(z - h)) / (2.0 * h);
            assert!((fd - axis::third(z)).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn null_curvature_closed_form() {
        assert!((null_curvature() + 2.0 / (3f64.sqrt() * PI)).abs() < 1e-14);
    }

    #[test]
    fn rejects_points_below_surface() {
        assert!(matches!(five_wire_potential(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(five_wire_potential(0.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn lambda_round_trip() {
        let p = TrapParams::from_lambda(0.0025, 0.1, 0.65).unwrap();
        assert!((p.lambda().unwrap() - 0.0025).abs() < 1e-15);
        assert!((p.lambda_b().unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(p.a[1], p.a[2]);
    }
}
