//! Fixed-step fourth-order symplectic splitting (Forest–Ruth).
//!
//! Time advances with the drift so time-dependent forces are handled in
//! the extended phase space. Used to cross-check the adaptive integrator.

use super::fields::Field;
use super::PhaseState;

const THETA: f64 = 1.351_207_191_959_657_8;

/// Integrate from `s0` to `t_end` with steps no longer than `h`.
pub fn forest_ruth<const D: usize, F: Field<D>>(field: &F, s0: &PhaseState, t_end: f64, h: f64) -> PhaseState {
    let span = t_end - s0.t;
    let n = (span.abs() / h.abs()).ceil().max(1.0);
    let dt = span / n;
    let drift = [0.5 * THETA, 0.5 * (1.0 - THETA), 0.5 * (1.0 - THETA), 0.5 * THETA];
    let kick = [THETA, 1.0 - 2.0 * THETA, THETA];
    let mut q = s0.coords::<D>();
    let mut p = s0.momenta::<D>();
    for step in 0..n as u64 {
        let mut t = s0.t + dt * step as f64;
        for j in 0..4 {
            for i in 0..D {
                q[i] += drift[j] * dt * p[i];
            }
            t += drift[j] * dt;
            if j < 3 {
                let f = field.force(t, &q);
                for i in 0..D {
                    p[i] += kick[j] * dt * f[i];
                }
            }
        }
    }
    let mut out = PhaseState::unpack::<D, 4>(
        &std::array::from_fn(|i| if i < D { q[i] } else if i < 2 * D { p[i - D] } else { 0.0 }),
        t_end,
    );
    out.t = t_end;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Harmonic;

    #[test]
    fn theta_value() {
        assert!((THETA - 1.0 / (2.0 - 2f64.cbrt())).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = Harmonic { omega: [1.0], center: [0.0] };
        let s0 = PhaseState::new_1d(1.0, 0.0, 0.0);
        let err = |h: f64| (forest_ruth(&f, &s0, 5.0, h).z - 5f64.cos()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }
}
