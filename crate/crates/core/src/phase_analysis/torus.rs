//! Winding numbers and actions of invariant tori from section data.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::classify::{classify_orbit, ClassifyOptions, OrbitClass};
use super::geometry::{centroid_and_spread, curve_area};
use crate::dynamics::{SectionOrbit, Termination};
use crate::numerics::{birkhoff_average, convergents};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusOptions {
    /// Return distance, in RMS-normalized section coordinates.
    pub recurrence_tol: f64,
    pub max_denominator: u64,
    /// Center that the winding is measured about; centroid when absent.
    pub center: Option<(f64, f64)>,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self { recurrence_tol: 1e-6, max_denominator: 200, center: None }
    }
}

/// Invariants measured on one torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusInvariants {
    /// Total action per section crossing.
    pub j: f64,
    /// Winding number: turns about the center per crossing, in [0, 1).
    pub alpha: f64,
    /// Rational approximation r/s (coprime, both positive).
    pub ratio: Option<(u64, u64)>,
    /// Whether the orbit returned to its start within the tolerance
    /// after `ratio.1` crossings.
    pub recurred: bool,
    /// Smallest return distance seen over the candidate denominators.
    pub recurrence_distance: f64,
    /// Section-plane action dJ/dα, filled by [`partial_actions`].
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    /// Planimeter area of the section curve.
    pub area: f64,
    /// Mean return time to the section.
    pub return_time: f64,
    pub crossings: usize,
}

fn wrap(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Winding number and total action of a regular orbit.
///
/// J and α are weighted Birkhoff averages of the per-crossing action and
/// angle increment; J₁ and J₂ need neighbouring tori and are left empty.
pub fn torus_actions(orbit: &SectionOrbit, opts: &TorusOptions) -> Result<TorusInvariants> {
    if orbit.points.len() < 3 {
        return Err(Error::validation("torus needs at least three crossings"));
    }
    if let Termination::Escaped { time } = orbit.termination {
        return Err(Error::Escaped { time });
    }
    let pts = orbit.pairs();
    let (centroid, spread) = centroid_and_spread(&pts);
    let center = opts.center.unwrap_or(centroid);
    if spread.0 <= 0.0 || spread.1 <= 0.0 {
        return Err(Error::Numerical("degenerate section curve".into()));
    }
    let norm = |p: (f64, f64)| ((p.0 - center.0) / spread.0, (p.1 - center.1) / spread.1);
    let start = norm((orbit.initial.z, orbit.initial.pz));
    let mut seq = Vec::with_capacity(pts.len() + 1);
    seq.push(start);
    seq.extend(pts.iter().map(|&p| norm(p)));

    let dth: Vec<f64> = seq
        .windows(2)
        .map(|w| wrap(w[1].1.atan2(w[1].0) - w[0].1.atan2(w[0].0)))
        .collect();
    let mean = birkhoff_average(&dth).ok_or_else(|| Error::Numerical("too few increments".into()))?;
    // section flow turns clockwise in (z, p_z)
    let alpha = (-mean / TAU).rem_euclid(1.0);

    let actions: Vec<f64> = orbit.points.iter().map(|p| p.action).collect();
    let j = birkhoff_average(&actions).expect("checked length");
    let times: Vec<f64> = orbit.points.iter().map(|p| p.return_time).collect();
    let return_time = birkhoff_average(&times).expect("checked length");

    let dist = |k: usize| ((seq[k].0 - start.0).powi(2) + (seq[k].1 - start.1).powi(2)).sqrt();
    let s_max = (opts.max_denominator as usize).min(seq.len() - 1);
    let mut best = f64::INFINITY;
    let mut recurred = None;
    for s in 1..=s_max {
        let d = dist(s);
        best = best.min(d);
        if d < opts.recurrence_tol {
            recurred = Some(s as u64);
            break;
        }
    }
    let ratio = match recurred {
        Some(s) => {
            let r = (alpha * s as f64).round() as u64;
            (r > 0).then(|| {
                let g = gcd(r, s);
                (r / g, s / g)
            })
        }
        None => convergents(alpha, opts.max_denominator)
            .into_iter()
            .filter(|&(r, s)| r > 0 && s > 0)
            .last()
            .map(|(r, s)| (r as u64, s)),
    };

    Ok(TorusInvariants {
        j,
        alpha,
        ratio,
        recurred: recurred.is_some(),
        recurrence_distance: best,
        j1: None,
        j2: None,
        area: curve_area(&pts, center),
        return_time,
        crossings: pts.len(),
    })
}

/// Local quadratic least-squares slope of y(x) at `x0`.
fn local_slope(xs: &[f64], ys: &[f64], x0: f64) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let mut s = [0.0; 5];
    let mut b = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let d = x - x0;
        let mut p = 1.0;
        for k in 0..5 {
            s[k] += p;
            if k < 3 {
                b[k] += p * y;
            }
            p *= d;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if !(d.is_finite() && d.abs() > 1e-300) {
        return None;
    }
    let mut mc = m;
    for r in 0..3 {
        mc[r][1] = b[r];
    }
    Some(det(&mc) / d)
}

/// Fill J₁ = dJ/dα and J₂ = J − αJ₁ across a family of nested tori,
/// ordered from the center outward.
///
/// Each slope comes from a quadratic fit through up to `window` tori
/// around (or, at the ends, next to) the torus in question.
pub fn partial_actions(tori: &mut [TorusInvariants], window: usize) {
    let n = tori.len();
    let w = window.max(3).min(n);
    if n < 3 {
        return;
    }
    let alphas: Vec<f64> = tori.iter().map(|t| t.alpha).collect();
    let js: Vec<f64> = tori.iter().map(|t| t.j).collect();
    for i in 0..n {
        let lo = i.saturating_sub(w / 2).min(n - w);
        let hi = lo + w;
        let xs = &alphas[lo..hi];
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread < 1e-9 {
            continue;
        }
        if let Some(j1) = local_slope(xs, &js[lo..hi], alphas[i]) {
            tori[i].j1 = Some(j1);
            tori[i].j2 = Some(tori[i].j - tori[i].alpha * j1);
        }
    }
}

/// Classified section orbit with its torus measurement, if regular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScannedOrbit {
    pub z0: f64,
    pub class: OrbitClass,
    pub torus: Option<TorusInvariants>,
}

/// Classify an orbit and measure it when regular.
pub fn scan_orbit(
    z0: f64,
    orbit: &SectionOrbit,
    classify: &ClassifyOptions,
    torus: &TorusOptions,
) -> ScannedOrbit {
    let pts = orbit.pairs();
    let class = classify_orbit(&pts, &orbit.termination, classify);
    let torus = if class.is_regular() { torus_actions(orbit, torus).ok() } else { None };
    ScannedOrbit { z0, class, torus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PhaseState, SectionPoint};

    fn rotation_orbit(alpha: f64, n: usize, lagrangian: impl Fn(f64) -> f64) -> SectionOrbit {
        let mut points = Vec::new();
        let mut th: f64 = 0.3;
        let initial = PhaseState::new_1d(th.cos(), th.sin(), 0.0);
        for k in 0..n {
            th -= TAU * alpha;
            let s = PhaseState::new_1d(th.cos(), th.sin(), k as f64);
            points.push(SectionPoint { state: s, t_cross: k as f64, return_time: 1.0, residual: 0.0, action: lagrangian(th) });
        }
        SectionOrbit { id: 0, initial, points, termination: Termination::Horizon }
    }

    #[test]
    fn rigid_rotation_winding() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0 * 0.5;
        let o = rotation_orbit(alpha, 2000, |th| 1.0 + 0.1 * th.cos());
        let t = torus_actions(&o, &TorusOptions { center: Some((0.0, 0.0)), ..Default::default() }).unwrap();
        assert!((t.alpha - alpha).abs() < 1e-12);
        assert!((t.j - 1.0).abs() < 1e-12);
        assert!(!t.recurred);
        assert!((t.area - PI).abs() < 1e-4);
    }

    #[test]
    fn rational_rotation_recurs() {
        let o = rotation_orbit(2.0 / 7.0, 500, |_| 0.0);
        let t = torus_actions(&o, &TorusOptions { center: Some((0.0, 0.0)), ..Default::default() }).unwrap();
        assert!(t.recurred);
        assert_eq!(t.ratio, Some((2, 7)));
    }

    #[test]
    fn legendre_slope_of_a_quadratic_family() {
        let mut tori: Vec<TorusInvariants> = (0..8)
            .map(|k| {
                let a = 0.1 + 0.01 * k as f64;
                TorusInvariants {
                    j: 3.0 * a + 2.0 * a * a,
                    alpha: a,
                    ratio: None,
                    recurred: false,
                    recurrence_distance: 1.0,
                    j1: None,
                    j2: None,
                    area: 0.0,
                    return_time: 1.0,
                    crossings: 0,
                }
            })
            .collect();
        partial_actions(&mut tori, 5);
        for t in &tori {
            let exact = 3.0 + 4.0 * t.alpha;
            assert!((t.j1.unwrap() - exact).abs() < 1e-9);
            assert!((t.j2.unwrap() - (t.j - t.alpha * exact)).abs() < 1e-9);
        }
    }
}
