//! Force providers for Hamiltonians H = |p|²/2 + V(q, t).

use crate::constants::Z0;
use crate::pseudopotential::{axis_potential, pseudo_2d_local, Units};
use crate::trap_model::{trap_potential_local, TrapParams};

/// Potential and force in D configuration dimensions.
///
/// Coordinates are (z) for D = 1 and (y, z) for D = 2.
pub trait Field<const D: usize>: Sync {
    fn force(&self, t: f64, q: &[f64; D]) -> [f64; D];
    fn potential(&self, t: f64, q: &[f64; D]) -> f64;
    /// True when V does not depend on t.
    fn autonomous(&self) -> bool;
    /// Potential and force together; override when they share work.
    fn evaluate(&self, t: f64, q: &[f64; D]) -> (f64, [f64; D]) {
        (self.potential(t, q), self.force(t, q))
    }
}

impl<const D: usize, F: Field<D>> Field<D> for &F {
    fn force(&self, t: f64, q: &[f64; D]) -> [f64; D] {
        (**self).force(t, q)
    }
    fn potential(&self, t: f64, q: &[f64; D]) -> f64 {
        (**self).potential(t, q)
    }
    fn autonomous(&self) -> bool {
        (**self).autonomous()
    }
    fn evaluate(&self, t: f64, q: &[f64; D]) -> (f64, [f64; D]) {
        (**self).evaluate(t, q)
    }
}

/// Full rf trap restricted to the symmetry line y = 0.
#[derive(Debug, Clone, Copy)]
pub struct RfField1D(pub TrapParams);

impl Field<1> for RfField1D {
    fn force(&self, t: f64, q: &[f64; 1]) -> [f64; 1] {
        [trap_potential_local(0.0, q[0], t, &self.0).1[1]]
    }
    fn potential(&self, t: f64, q: &[f64; 1]) -> f64 {
        trap_potential_local(0.0, q[0], t, &self.0).0
    }
    fn autonomous(&self) -> bool {
        self.0.q5 == 0.0
    }
    fn evaluate(&self, t: f64, q: &[f64; 1]) -> (f64, [f64; 1]) {
        let (v, f) = trap_potential_local(0.0, q[0], t, &self.0);
        (v, [f[1]])
    }
}

/// Full rf trap in the (y, z) plane.
#[derive(Debug, Clone, Copy)]
pub struct RfField2D(pub TrapParams);

impl Field<2> for RfField2D {
    fn force(&self, t: f64, q: &[f64; 2]) -> [f64; 2] {
        trap_potential_local(q[0], q[1], t, &self.0).1
    }
    fn potential(&self, t: f64, q: &[f64; 2]) -> f64 {
        trap_potential_local(q[0], q[1], t, &self.0).0
    }
    fn autonomous(&self) -> bool {
        self.0.q5 == 0.0
    }
    fn evaluate(&self, t: f64, q: &[f64; 2]) -> (f64, [f64; 2]) {
        trap_potential_local(q[0], q[1], t, &self.0)
    }
}

/// Averaged potential on y = 0, optionally with the bias term.
#[derive(Debug, Clone, Copy)]
pub struct PseudoField1D {
    pub lambda: f64,
    pub lambda_b: f64,
    pub units: Units,
}

impl PseudoField1D {
    pub fn scaled(lambda: f64) -> Self {
        Self { lambda, lambda_b: 0.0, units: Units::Scaled }
    }

    /// Same time and energy units as the rf model with amplitude q5.
    pub fn rf_units(lambda: f64, q5: f64) -> Self {
        Self { lambda, lambda_b: 0.0, units: Units::Rf { q5 } }
    }
}

impl Field<1> for PseudoField1D {
    fn force(&self, _t: f64, q: &[f64; 1]) -> [f64; 1] {
        [-self.units.energy_factor() * axis_potential(q[0], self.lambda, self.lambda_b).1]
    }
    fn potential(&self, _t: f64, q: &[f64; 1]) -> f64 {
        self.units.energy_factor() * axis_potential(q[0], self.lambda, self.lambda_b).0
    }
    fn autonomous(&self) -> bool {
        true
    }
}

/// Averaged potential in the (y, z) plane.
#[derive(Debug, Clone, Copy)]
pub struct PseudoField2D {
    pub lambda: f64,
    pub lambda_b: f64,
    pub units: Units,
}

impl PseudoField2D {
    pub fn scaled(lambda: f64, lambda_b: f64) -> Self {
        Self { lambda, lambda_b, units: Units::Scaled }
    }

    pub fn rf_units(lambda: f64, lambda_b: f64, q5: f64) -> Self {
        Self { lambda, lambda_b, units: Units::Rf { q5 } }
    }

    /// Averaged counterpart of an rf trap, in the rf model's units.
    pub fn matching(p: &TrapParams) -> Option<Self> {
        Some(Self::rf_units(p.lambda()?, p.lambda_b()?, p.q5))
    }
}

impl Field<2> for PseudoField2D {
    fn force(&self, _t: f64, q: &[f64; 2]) -> [f64; 2] {
        let s = self.units.energy_factor();
        let f = pseudo_2d_local(q[0], q[1], self.lambda, self.lambda_b).1;
        [s * f[0], s * f[1]]
    }
    fn potential(&self, _t: f64, q: &[f64; 2]) -> f64 {
        self.units.energy_factor() * pseudo_2d_local(q[0], q[1], self.lambda, self.lambda_b).0
    }
    fn autonomous(&self) -> bool {
        true
    }
    fn evaluate(&self, _t: f64, q: &[f64; 2]) -> (f64, [f64; 2]) {
        let s = self.units.energy_factor();
        let (v, f) = pseudo_2d_local(q[0], q[1], self.lambda, self.lambda_b);
        (s * v, [s * f[0], s * f[1]])
    }
}

/// Separable harmonic oscillator ½ Σ ω_i² (q_i − c_i)².
#[derive(Debug, Clone, Copy)]
pub struct Harmonic<const D: usize> {
    pub omega: [f64; D],
    pub center: [f64; D],
}

impl<const D: usize> Field<D> for Harmonic<D> {
    fn force(&self, _t: f64, q: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|i| -self.omega[i].powi(2) * (q[i] - self.center[i]))
    }
    fn potential(&self, _t: f64, q: &[f64; D]) -> f64 {
        (0..D).map(|i| 0.5 * (self.omega[i] * (q[i] - self.center[i])).powi(2)).sum()
    }
    fn autonomous(&self) -> bool {
        true
    }
}

/// Linear Mathieu oscillator V = ½(a − 2q cos 2t)(z − z0)².
#[derive(Debug, Clone, Copy)]
pub struct LinearMathieu {
    pub a: f64,
    pub q: f64,
}

impl Field<1> for LinearMathieu {
    fn force(&self, t: f64, x: &[f64; 1]) -> [f64; 1] {
        [-(self.a - 2.0 * self.q * (2.0 * t).cos()) * (x[0] - Z0)]
    }
    fn potential(&self, t: f64, x: &[f64; 1]) -> f64 {
        0.5 * (self.a - 2.0 * self.q * (2.0 * t).cos()) * (x[0] - Z0).powi(2)
    }
    fn autonomous(&self) -> bool {
        self.q == 0.0
    }
}

/// Adds a spatially uniform force A cos(ω t + φ) · (e_y, e_z) to a 2D field.
#[derive(Debug, Clone, Copy)]
pub struct Tickled<F> {
    pub inner: F,
    /// Scaled force amplitudes along (y, z).
    pub amplitude: [f64; 2],
    pub omega: f64,
    pub phase: f64,
}

impl<F: Field<2>> Field<2> for Tickled<F> {
    fn force(&self, t: f64, q: &[f64; 2]) -> [f64; 2] {
        let f = self.inner.force(t, q);
        let c = (self.omega * t + self.phase).cos();
        [f[0] + self.amplitude[0] * c, f[1] + self.amplitude[1] * c]
    }
    fn potential(&self, t: f64, q: &[f64; 2]) -> f64 {
        let c = (self.omega * t + self.phase).cos();
        self.inner.potential(t, q) - c * (self.amplitude[0] * q[0] + self.amplitude[1] * (q[1] - Z0))
    }
    fn autonomous(&self) -> bool {
        self.inner.autonomous() && self.amplitude == [0.0, 0.0]
    }
    fn evaluate(&self, t: f64, q: &[f64; 2]) -> (f64, [f64; 2]) {
        let (v, f) = self.inner.evaluate(t, q);
        let c = (self.omega * t + self.phase).cos();
        (
            v - c * (self.amplitude[0] * q[0] + self.amplitude[1] * (q[1] - Z0)),
            [f[0] + self.amplitude[0] * c, f[1] + self.amplitude[1] * c],
        )
    }
}
