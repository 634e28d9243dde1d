//! Averaging for an arbitrary potential V₀(q) + f(t) V₂(q) with a
//! zero-mean periodic waveform f.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::numerics::{integrate, integrate_fixed};
use crate::{Error, Result};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type Waveform = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Driven potential V₀(q) + f(t) V₂(q) on R^dim, f of period 2π/ω.
#[derive(Clone)]
pub struct GenericDrivenPotential {
    pub dim: usize,
    pub static_part: ScalarField,
    pub driven_part: ScalarField,
    /// Analytic ∇V₂; fourth-order central differences with step
    /// `fd_step` are used when absent.
    pub driven_gradient: Option<VectorField>,
    pub fd_step: f64,
    pub omega: f64,
    pub waveform: Waveform,
}

impl fmt::Debug for GenericDrivenPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericDrivenPotential")
            .field("dim", &self.dim)
            .field("omega", &self.omega)
            .field("analytic_gradient", &self.driven_gradient.is_some())
            .finish()
    }
}

impl GenericDrivenPotential {
    /// Sinusoidal drive f(t) = cos ωt.
    pub fn cosine(dim: usize, static_part: ScalarField, driven_part: ScalarField, omega: f64) -> Self {
        Self {
            dim,
            static_part,
            driven_part,
            driven_gradient: None,
            fd_step: 1e-5,
            omega,
            waveform: Arc::new(move |t| (omega * t).cos()),
        }
    }

    pub fn with_gradient(mut self, g: VectorField) -> Self {
        self.driven_gradient = Some(g);
        self
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub(crate) fn grad_v2(&self, q: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.driven_gradient {
            return g(q);
        }
        let h = self.fd_step;
        let mut x = q.to_vec();
        (0..self.dim)
            .map(|i| {
                let x0 = x[i];
                let mut at = |dx: f64| {
                    x[i] = x0 + dx;
                    (self.driven_part)(&x)
                };
                let d = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
                x[i] = x0;
                d
            })
            .collect()
    }

    /// F(t) = ∫₀ᵗ f.
    fn primitive(&self, t: f64) -> f64 {
        let w = &self.waveform;
        integrate_fixed(|s| w(s), 0.0, t, 4)
    }
}

/// K(q) = V₀(q) + C |∇V₂(q)|² with C = (1/2T) ∫₀ᵀ F(t)² dt.
#[derive(Clone)]
pub struct EffectivePotential {
    source: GenericDrivenPotential,
    coefficient: f64,
}

impl fmt::Debug for EffectivePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EffectivePotential")
            .field("dim", &self.source.dim)
            .field("coefficient", &self.coefficient)
            .finish()
    }
}

impl EffectivePotential {
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn dim(&self) -> usize {
        self.source.dim
    }

    pub fn value(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.source.dim {
            return Err(Error::validation(format!(
                "expected {} coordinates, got {}",
                self.source.dim,
                q.len()
            )));
        }
        let g = self.source.grad_v2(q);
        let v = (self.source.static_part)(q) + self.coefficient * g.iter().map(|x| x * x).sum::<f64>();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("effective potential not finite at {q:?}")))
        }
    }

    /// Central-difference gradient of K.
    pub fn gradient(&self, q: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut x = q.to_vec();
        let mut out = Vec::with_capacity(q.len());
        for i in 0..q.len() {
            let x0 = x[i];
            x[i] = x0 + h;
            let fp = self.value(&x)?;
            x[i] = x0 - h;
            let fm = self.value(&x)?;
            x[i] = x0;
            out.push((fp - fm) / (2.0 * h));
        }
        Ok(out)
    }
}

/// Build the lowest-order effective potential.
///
/// The waveform must have zero mean and a zero-mean primitive over a
/// period; otherwise there is no time-independent average.
pub fn build_pseudopotential(d: &GenericDrivenPotential) -> Result<EffectivePotential> {
    if d.dim == 0 {
        return Err(Error::validation("dimension must be at least 1"));
    }
    if !(d.omega.is_finite() && d.omega > 0.0) {
        return Err(Error::validation(format!("drive frequency must be positive, got {}", d.omega)));
    }
    let period = d.period();
    let w = &d.waveform;
    let scale = integrate(|t| w(t).abs(), 0.0, period, 1e-13, 1e-11)? / period;
    if scale == 0.0 {
        return Err(Error::validation("waveform vanishes identically"));
    }
    let mean = integrate(|t| w(t), 0.0, period, 1e-14, 1e-12)? / period;
    if mean.abs() > 1e-9 * scale {
        return Err(Error::validation(format!("waveform mean {mean} is not zero")));
    }
    let moment = integrate(|t| (t - 0.5 * period) * w(t), 0.0, period, 1e-14, 1e-12)? / (period * period);
    if moment.abs() > 1e-9 * scale {
        return Err(Error::validation(format!("waveform first moment {moment} is not zero")));
    }
    let f2 = integrate(|t| d.primitive(t).powi(2), 0.0, period, 1e-16, 1e-12)?;
    Ok(EffectivePotential { source: d.clone(), coefficient: f2 / (2.0 * period) })
}

/// Map a guiding-center state (Q, P) at time t to the oscillating (q, p).
///
/// First order in the drive: p₁ = −∫₀ᵗ f(s) ∇V₂(Q + P(s − t)) ds and
/// q₁ = ∫₀ᵗ f(s)(s − t) ∇V₂(Q + P(s − t)) ds, so q = Q, p = P at t = 0.
pub fn micromotion_transform(
    d: &GenericDrivenPotential,
    q_gc: &[f64],
    p_gc: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if q_gc.len() != d.dim || p_gc.len() != d.dim {
        return Err(Error::validation("state dimension does not match the potential"));
    }
    if !t.is_finite() {
        return Err(Error::validation("time must be finite"));
    }
    let panels = ((t.abs() / d.period()) * 8.0).ceil().max(2.0) as usize;
    let mut q = q_gc.to_vec();
    let mut p = p_gc.to_vec();
    let mut x = vec![0.0; d.dim];
    for i in 0..d.dim {
        let mut eval = |s: f64, weight: f64| {
            for k in 0..d.dim {
                x[k] = q_gc[k] + p_gc[k] * (s - t);
            }
            (d.waveform)(s) * weight * d.grad_v2(&x)[i]
        };
        let dp = -integrate_fixed(|s| eval(s, 1.0), 0.0, t, panels);
        let dq = integrate_fixed(|s| eval(s, s - t), 0.0, t, panels);
        p[i] += dp;
        q[i] += dq;
    }
    if q.iter().chain(&p).any(|v| !v.is_finite()) {
        return Err(Error::domain("micromotion transform left the domain"));
    }
    Ok((q, p))
}
