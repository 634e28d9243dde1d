//! Last-unbroken-torus search along p_z = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::ClassifyOptions;
use super::torus::{partial_actions, scan_orbit, ScannedOrbit, TorusInvariants, TorusOptions};
use crate::constants::{DRIVE_PERIOD, Z0};
use crate::dynamics::{trace_section, Crossing, Field, IntegrationOptions, PhaseState, PseudoField1D, RfField1D};
use crate::trap_model::{fixed_points, TrapParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusScanOptions {
    /// Initial heights on (z_s, z_top].
    pub scan_points: usize,
    /// z_top = factor·z_u.
    pub z_top_factor: f64,
    /// Stroboscopic crossings per orbit; the horizon is this many drive periods.
    pub crossings: usize,
    pub bisection_steps: usize,
    pub tol: f64,
    pub fit_window: usize,
    pub classify: ClassifyOptions,
    pub torus: TorusOptions,
}

impl Default for TorusScanOptions {
    fn default() -> Self {
        Self {
            scan_points: 48,
            z_top_factor: 1.05,
            crossings: 1000,
            bisection_steps: 12,
            tol: 1e-11,
            fit_window: 5,
            classify: ClassifyOptions::default(),
            torus: TorusOptions::default(),
        }
    }
}

/// Result of [`last_unbroken_torus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastTorus {
    pub lambda: f64,
    pub q5: f64,
    /// dJ/dα of the outermost regular torus.
    pub j_max: Option<f64>,
    /// Planimeter area of the same curve.
    pub j_max_area: Option<f64>,
    /// Launch height of the outermost regular torus.
    pub z_last: Option<f64>,
    /// Section points of the outermost regular torus.
    pub boundary: Vec<(f64, f64)>,
    /// Smallest escaping launch height.
    pub z_esc: Option<f64>,
    /// Regular tori in launch order, with J₁ and J₂ filled.
    pub tori: Vec<(f64, TorusInvariants)>,
    pub warnings: Vec<String>,
}

impl LastTorus {
    /// The result carries no regular torus.
    pub fn is_empty(&self) -> bool {
        self.j_max.is_none() && self.j_max_area.is_none()
    }
}

/// Find the outermost invariant curve of the 1D stroboscopic map.
///
/// Uses the full rf field when `q5 > 0` and the scaled averaged potential
/// when `q5 == 0`. Orbits start at p_z = 0, t = 0.
pub fn last_unbroken_torus(lambda: f64, q5: f64, opts: &TorusScanOptions) -> Result<LastTorus> {
    if !(lambda.is_finite() && lambda >= 0.0 && q5.is_finite() && q5 >= 0.0) {
        return Err(Error::validation(format!("need lambda >= 0 and q5 >= 0, got {lambda}, {q5}")));
    }
    if lambda == 0.0 && q5 == 0.0 {
        return Err(Error::validation("need lambda > 0 or q5 > 0"));
    }
    if opts.scan_points < 2 || opts.crossings < opts.classify.min_points {
        return Err(Error::validation("scan needs >= 2 points and enough crossings to classify"));
    }
    if q5 > 0.0 {
        let p = TrapParams::from_lambda(lambda, 0.0, q5)?;
        let f = RfField1D(p);
        scan_with(&f, lambda, q5, opts)
    } else {
        scan_with(&PseudoField1D::scaled(lambda), lambda, q5, opts)
    }
}

fn scan_with<F: Field<1>>(field: &F, lambda: f64, q5: f64, opts: &TorusScanOptions) -> Result<LastTorus> {
    let fp = fixed_points(lambda, 0.0)?;
    let z_s = fp.z_s;
    let z_top = fp.z_u.map(|zu| opts.z_top_factor * zu).unwrap_or(4.0);
    let iopts = IntegrationOptions::with_tol(opts.tol)?;
    let mut classify = opts.classify;
    classify.center = classify.center.or(Some((Z0, 0.0)));
    let mut topts = opts.torus;
    topts.center = topts.center.or(Some((Z0, 0.0)));
    let horizon = opts.crossings as f64 * DRIVE_PERIOD + 0.5;

    let run = |z0: f64| -> (ScannedOrbit, Vec<(f64, f64)>) {
        let s0 = PhaseState::new_1d(z0, 0.0, 0.0);
        let orbit = trace_section(field, &s0, Crossing::Stroboscopic { phase: 0.0 }, opts.crossings, horizon, &iopts);
        (scan_orbit(z0, &orbit, &classify, &topts), orbit.pairs())
    };

    let n = opts.scan_points;
    let grid: Vec<f64> = (1..=n).map(|i| z_s + (z_top - z_s) * i as f64 / n as f64).collect();
    let scanned: Vec<(ScannedOrbit, Vec<(f64, f64)>)> = grid.par_iter().map(|&z| run(z)).collect();

    let mut warnings = Vec::new();
    let i_esc = scanned.iter().position(|s| s.0.class.is_escaping());
    let limit = i_esc.unwrap_or(n);
    let i_reg = scanned[..limit].iter().rposition(|s| s.0.class.is_regular());

    let mut regular: Vec<(f64, TorusInvariants, Vec<(f64, f64)>)> = scanned[..limit]
        .iter()
        .filter_map(|(s, pts)| s.torus.clone().map(|t| (s.z0, t, pts.clone())))
        .collect();

    // refine the regular boundary
    if let Some(ir) = i_reg {
        if ir + 1 < n {
            let (mut a, mut b) = (grid[ir], grid[ir + 1]);
            for _ in 0..opts.bisection_steps {
                let m = 0.5 * (a + b);
                let (s, pts) = run(m);
                match s.torus {
                    Some(t) if s.class.is_regular() => {
                        regular.push((m, t, pts));
                        a = m;
                    }
                    _ => b = m,
                }
            }
        }
    } else {
        warnings.push("no regular orbit at this scan resolution".to_string());
    }

    let z_esc = match i_esc {
        Some(0) => Some(grid[0]),
        Some(ie) => {
            let (mut a, mut b) = (grid[ie - 1], grid[ie]);
            for _ in 0..opts.bisection_steps {
                let m = 0.5 * (a + b);
                if run(m).0.class.is_escaping() {
                    b = m;
                } else {
                    a = m;
                }
            }
            Some(b)
        }
        None => {
            warnings.push(format!("no escape below z = {z_top} within the horizon"));
            None
        }
    };

    regular.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut tori: Vec<TorusInvariants> = regular.iter().map(|r| r.1.clone()).collect();
    partial_actions(&mut tori, opts.fit_window);
    let last = regular.last();
    let j_max = tori.last().and_then(|t| t.j1);
    if last.is_some() && j_max.is_none() {
        warnings.push("too few regular tori for dJ/dalpha".to_string());
    }
    Ok(LastTorus {
        lambda,
        q5,
        j_max,
        j_max_area: tori.last().map(|t| t.area),
        z_last: last.map(|r| r.0),
        boundary: last.map(|r| r.2.clone()).unwrap_or_default(),
        z_esc,
        tori: regular.iter().map(|r| r.0).zip(tori).collect(),
        warnings,
    })
}
