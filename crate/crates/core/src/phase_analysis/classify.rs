//! Regular / chaotic classification of section orbits by curve width.

use serde::{Deserialize, Serialize};

use super::geometry::{centroid_and_spread, polar};
use crate::dynamics::Termination;

/// Outcome of [`classify_orbit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum OrbitClass {
    /// Points lie on a curve; `width` is the relative scatter statistic.
    Regular { width: f64 },
    /// Points fill an area.
    Chaotic { width: f64 },
    Escaping { time: f64 },
    /// Not enough information to decide.
    Indeterminate { reason: String },
}

impl OrbitClass {
    pub fn is_regular(&self) -> bool {
        matches!(self, OrbitClass::Regular { .. })
    }

    pub fn is_escaping(&self) -> bool {
        matches!(self, OrbitClass::Escaping { .. })
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            OrbitClass::Regular { width } | OrbitClass::Chaotic { width } => Some(*width),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyOptions {
    pub bins: usize,
    /// Regular iff the width statistic is below this.
    pub width_tol: f64,
    pub min_points: usize,
    /// Bins holding at least three points needed for a verdict.
    pub min_bins: usize,
    /// Island center; the centroid is used when absent.
    pub center: Option<(f64, f64)>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { bins: 256, width_tol: 1e-3, min_points: 200, min_bins: 32, center: None }
    }
}

/// Least-squares polynomial residual (degree ≤ 2) of r against θ; returns
/// the largest absolute residual.
fn detrended_scatter(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let deg = if pts.len() >= 5 { 2 } else { 1 };
    // normal equations in x = θ − θ̄
    let mut s = [0.0; 5];
    let mut b = [0.0; 3];
    for &(r, t) in pts {
        let x = t - tm;
        let mut xp = 1.0;
        for k in 0..5 {
            s[k] += xp;
            if k < 3 {
                b[k] += xp * r;
            }
            xp *= x;
        }
    }
    let coef = if deg == 2 {
        let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
        solve3(m, b).unwrap_or([b[0] / s[0], 0.0, 0.0])
    } else {
        let det = s[0] * s[2] - s[1] * s[1];
        if det.abs() < 1e-300 {
            [b[0] / s[0], 0.0, 0.0]
        } else {
            [(b[0] * s[2] - b[1] * s[1]) / det, (s[0] * b[1] - s[1] * b[0]) / det, 0.0]
        }
    };
    pts.iter()
        .map(|&(r, t)| {
            let x = t - tm;
            (r - (coef[0] + coef[1] * x + coef[2] * x * x)).abs()
        })
        .fold(0.0, f64::max)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Relative curve width of a set of section points.
///
/// Points are binned by polar angle about the center in coordinates
/// normalized by their RMS spread; within each bin the radius is
/// detrended by a low-order fit in angle, and the largest residual over
/// all bins is divided by the mean radius.
pub fn curve_width(points: &[(f64, f64)], opts: &ClassifyOptions) -> Option<f64> {
    let (centroid, spread) = centroid_and_spread(points);
    let center = opts.center.unwrap_or(centroid);
    if spread.0 <= 0.0 || spread.1 <= 0.0 {
        return None;
    }
    let pol = polar(points, center, spread);
    let mean_r = pol.iter().map(|p| p.0).sum::<f64>() / pol.len() as f64;
    if mean_r <= 0.0 {
        return None;
    }
    let nb = opts.bins.max(1);
    let mut bins: Vec<Vec<(f64, f64)>> = vec![Vec::new(); nb];
    for &(r, th) in &pol {
        let k = (((th + std::f64::consts::PI) / std::f64::consts::TAU) * nb as f64) as usize;
        bins[k.min(nb - 1)].push((r, th));
    }
    let mut used = 0;
    let mut worst: f64 = 0.0;
    for b in bins.iter().filter(|b| b.len() >= 3) {
        used += 1;
        worst = worst.max(detrended_scatter(b));
    }
    (used >= opts.min_bins).then_some(worst / mean_r)
}

/// Classify the section points of one orbit.
pub fn classify_orbit(points: &[(f64, f64)], termination: &Termination, opts: &ClassifyOptions) -> OrbitClass {
    if let Termination::Escaped { time } = termination {
        return OrbitClass::Escaping { time: *time };
    }
    if let Termination::DomainError { time, .. } = termination {
        return OrbitClass::Escaping { time: *time };
    }
    if points.len() < opts.min_points {
        return OrbitClass::Indeterminate {
            reason: format!("{} section points, need {}", points.len(), opts.min_points),
        };
    }
    match curve_width(points, opts) {
        None => OrbitClass::Indeterminate { reason: "too few occupied angular bins".into() },
        Some(w) if w < opts.width_tol => OrbitClass::Regular { width: w },
        Some(w) => OrbitClass::Chaotic { width: w },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring(n: usize, noise: f64) -> Vec<(f64, f64)> {
        let mut state = 12345_u64;
        (0..n)
            .map(|k| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                let th = 2.0 * PI * (k as f64 * 0.618_033_988_75).fract();
                let r = 1.0 + 0.2 * (3.0 * th).cos() + noise * u;
                (r * th.cos(), 0.1 * r * th.sin())
            })
            .collect()
    }

    #[test]
    fn smooth_curve_is_regular() {
        let c = classify_orbit(&ring(2000, 0.0), &Termination::Horizon, &ClassifyOptions::default());
        assert!(c.is_regular(), "{c:?}");
    }

    #[test]
    fn thick_band_is_chaotic() {
        let c = classify_orbit(&ring(2000, 0.05), &Termination::Horizon, &ClassifyOptions::default());
        assert!(matches!(c, OrbitClass::Chaotic { .. }), "{c:?}");
    }

    #[test]
    fn few_points_are_indeterminate() {
        let c = classify_orbit(&ring(50, 0.0), &Termination::Horizon, &ClassifyOptions::default());
        assert!(matches!(c, OrbitClass::Indeterminate { .. }));
    }

    #[test]
    fn escape_wins() {
        let c = classify_orbit(&ring(2000, 0.0), &Termination::Escaped { time: 3.0 }, &ClassifyOptions::default());
        assert_eq!(c, OrbitClass::Escaping { time: 3.0 });
    }
}
