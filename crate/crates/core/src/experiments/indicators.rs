//! Indicator fields χ_t, χ_r, χ_n on energy shells of the 2D section and
//! the phase-space volumes they enclose.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{DRIVE_PERIOD, Z0};
use crate::dynamics::{
    detect_escape, trace_section, Crossing, EscapeRegion, Field, IntegrationOptions, PhaseState, PseudoField2D,
    RfField2D, SectionOrbit, Tolerances,
};
use crate::phase_analysis::geometry::{point_in_polygon, sort_by_angle};
use crate::phase_analysis::{
    accessible_interval, classify_orbit, shell_grid, shell_volume, volume_table, ClassifyOptions, IndicatorKind,
    ShellGrid, VolumeEstimate,
};
use crate::pseudopotential::axis_potential;
use crate::trap_model::{fixed_points, TrapParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndicatorSpec {
    pub lambda: f64,
    pub lambda_b: f64,
    pub q5: f64,
    pub shells: usize,
    /// Top shell energy in rf units; the default truncation when absent.
    pub e_max: Option<f64>,
    /// Section cells (n_z, n_p) over the bounding box of each shell.
    pub grid: [usize; 2],
    /// rf horizon in drive periods; also bounds the averaged runs.
    pub rf_periods: usize,
    /// Crossings per orbit when searching for the last regular curve.
    pub section_crossings: usize,
    /// Launch points between the island center and the shell edge.
    pub radial_points: usize,
    pub bisection_steps: usize,
    /// Tolerance of the averaged-potential runs.
    pub tol: f64,
    /// Tolerance of the rf runs.
    pub rf_tol: f64,
    pub escape: EscapeRegion,
}

impl Default for IndicatorSpec {
    fn default() -> Self {
        Self {
            lambda: 0.02_f64.powi(2),
            lambda_b: 0.0,
            q5: 0.43,
            shells: 40,
            e_max: None,
            grid: [24, 24],
            rf_periods: 20_000,
            section_crossings: 1000,
            radial_points: 24,
            bisection_steps: 4,
            tol: 1e-10,
            rf_tol: 1e-9,
            escape: EscapeRegion::default(),
        }
    }
}

/// Top shell energy used when none is configured, in rf units.
///
/// Without bias this is the barrier height; with bias it is the
/// potential at rest at 2.3·z_s on the axis, or the barrier if lower.
pub fn default_e_max(lambda: f64, lambda_b: f64, q5: f64) -> Result<f64> {
    let fp = fixed_points(lambda, lambda_b)?;
    let v0 = axis_potential(fp.z_s, lambda, lambda_b).0;
    let z_top = if lambda_b == 0.0 {
        fp.z_u.ok_or_else(|| Error::domain("no barrier for the default truncation"))?
    } else {
        let zt = 2.3 * fp.z_s;
        fp.z_u.map_or(zt, |zu| zu.min(zt))
    };
    Ok(q5 * q5 * (axis_potential(z_top, lambda, lambda_b).0 - v0))
}

/// Indicators on one energy shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellIndicators {
    pub grid: ShellGrid,
    pub chi_t: Vec<bool>,
    pub chi_r: Vec<bool>,
    pub chi_n: Vec<bool>,
    /// Bounded cells without a section return inside the horizon; excluded.
    pub indeterminate: usize,
    /// Elliptic fixed point of the central island on p_z = 0, continued
    /// from the previous shell.
    pub center: Option<(f64, f64)>,
    /// More than one elliptic candidate was seen on p_z = 0.
    pub multi_island: bool,
    /// Outermost regular curve about the center, angle-sorted.
    pub boundary: Vec<(f64, f64)>,
}

impl ShellIndicators {
    pub fn chi(&self, kind: IndicatorKind) -> Vec<bool> {
        let (t, r, n) = (&self.chi_t, &self.chi_r, &self.chi_n);
        (0..t.len())
            .map(|i| match kind {
                IndicatorKind::Trapped => t[i],
                IndicatorKind::Regular => r[i],
                IndicatorKind::NonEscaping => n[i],
                IndicatorKind::TrappedNonEscaping => t[i] && n[i],
                IndicatorKind::RegularNonEscaping => r[i] && n[i],
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorMaps {
    pub spec: IndicatorSpec,
    pub shells: Vec<ShellIndicators>,
    /// Per-shell volumes, one table per indicator kind.
    pub volumes: Vec<(IndicatorKind, Vec<VolumeEstimate>)>,
}

impl IndicatorMaps {
    /// Λ⁴ᴰ at the top shell.
    pub fn total(&self, kind: IndicatorKind) -> f64 {
        self.volumes
            .iter()
            .find(|v| v.0 == kind)
            .and_then(|v| v.1.last())
            .map_or(0.0, |v| v.lambda_4d)
    }
}

fn first_return<F: Field<2>>(field: &F, energy: f64, z: f64, horizon: f64, opts: &IntegrationOptions) -> Option<(f64, f64)> {
    let py2 = 2.0 * (energy - field.potential(0.0, &[0.0, z]));
    if py2 <= 0.0 {
        return None;
    }
    let s = PhaseState::new_2d(0.0, z, py2.sqrt(), 0.0, 0.0);
    trace_section(field, &s, Crossing::y_upward(), 1, horizon, opts).points.first().map(|p| p.z_pz())
}

/// Elliptic fixed points of the section map on p_z = 0 at `energy`, as
/// sign changes of z' − z from + to −, refined by bisection.
fn elliptic_points<F: Field<2>>(field: &F, energy: f64, zr: (f64, f64), horizon: f64, opts: &IntegrationOptions) -> Vec<f64> {
    let n = 40;
    let f = |z: f64| first_return(field, energy, z, horizon, opts).map(|r| r.0 - z);
    let zs: Vec<f64> = (1..n).map(|i| zr.0 + (zr.1 - zr.0) * i as f64 / n as f64).collect();
    let vals: Vec<Option<f64>> = zs.par_iter().map(|&z| f(z)).collect();
    let mut out = Vec::new();
    for i in 1..zs.len() {
        if let (Some(a), Some(b)) = (vals[i - 1], vals[i]) {
            if a > 0.0 && b <= 0.0 {
                let (mut lo, mut hi) = (zs[i - 1], zs[i]);
                for _ in 0..40 {
                    let m = 0.5 * (lo + hi);
                    match f(m) {
                        Some(v) if v > 0.0 => lo = m,
                        Some(_) => hi = m,
                        None => break,
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
    }
    out
}

struct RegularCurve {
    center: Option<(f64, f64)>,
    multi_island: bool,
    boundary: Vec<(f64, f64)>,
}

fn last_regular_curve<F: Field<2>>(
    field: &F,
    energy: f64,
    zr: (f64, f64),
    follow: f64,
    spec: &IndicatorSpec,
    opts: &IntegrationOptions,
) -> RegularCurve {
    // crossings, not time, bound these runs
    let horizon = spec.section_crossings as f64 * 1e4;
    let cands = elliptic_points(field, energy, zr, horizon, opts);
    let multi_island = cands.len() > 1;
    let Some(zc) = cands.iter().cloned().min_by(|a, b| (a - follow).abs().total_cmp(&(b - follow).abs())) else {
        return RegularCurve { center: None, multi_island, boundary: Vec::new() };
    };
    let center = (zc, 0.0);
    let classify = ClassifyOptions { center: Some(center), ..ClassifyOptions::default() };
    let orbit = |z: f64| -> Option<SectionOrbit> {
        let py2 = 2.0 * (energy - field.potential(0.0, &[0.0, z]));
        (py2 > 0.0).then(|| {
            let s = PhaseState::new_2d(0.0, z, py2.sqrt(), 0.0, 0.0);
            trace_section(field, &s, Crossing::y_upward(), spec.section_crossings, horizon, opts)
        })
    };
    let verdict = |o: &Option<SectionOrbit>| match o {
        None => (false, true),
        Some(o) => {
            let c = classify_orbit(&o.pairs(), &o.termination, &classify);
            (c.is_regular(), c.is_escaping())
        }
    };
    let m = spec.radial_points.max(2);
    let zs: Vec<f64> = (1..=m).map(|i| zc + (zr.1 - zc) * i as f64 / (m + 1) as f64).collect();
    let orbits: Vec<Option<SectionOrbit>> = zs.par_iter().map(|&z| orbit(z)).collect();
    let flags: Vec<(bool, bool)> = orbits.iter().map(verdict).collect();
    let limit = flags.iter().position(|f| f.1).unwrap_or(m);
    let Some(ir) = flags[..limit].iter().rposition(|f| f.0) else {
        return RegularCurve { center: Some(center), multi_island, boundary: Vec::new() };
    };
    let mut best = orbits[ir].clone().expect("regular orbit exists");
    if ir + 1 < m {
        let (mut a, mut b) = (zs[ir], zs[ir + 1]);
        for _ in 0..spec.bisection_steps {
            let mid = 0.5 * (a + b);
            let o = orbit(mid);
            if verdict(&o).0 {
                best = o.expect("regular orbit exists");
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    let boundary = sort_by_angle(&best.pairs(), center);
    RegularCurve { center: Some(center), multi_island, boundary }
}

/// Indicator fields and volumes for one parameter cell.
///
/// Shell cells are launched at t = 0; the averaged runs use the rf
/// model's units so the same states seed the rf runs.
pub fn indicator_maps(spec: &IndicatorSpec) -> Result<IndicatorMaps> {
    if spec.shells == 0 || spec.grid[0] == 0 || spec.grid[1] == 0 || spec.rf_periods == 0 {
        return Err(Error::validation("indicator maps need shells, grid cells and an rf horizon"));
    }
    let params = TrapParams::from_lambda(spec.lambda, spec.lambda_b, spec.q5)?;
    let pseudo = PseudoField2D::rf_units(spec.lambda, spec.lambda_b, spec.q5);
    let rf = RfField2D(params);
    let e_max = match spec.e_max {
        Some(e) => e,
        None => default_e_max(spec.lambda, spec.lambda_b, spec.q5)?,
    };
    if !(e_max.is_finite() && e_max > 0.0) {
        return Err(Error::validation(format!("top shell energy must be positive, got {e_max}")));
    }
    let fp = fixed_points(spec.lambda, spec.lambda_b)?;
    let opts = IntegrationOptions::with_tol(spec.tol)?.escape(spec.escape);
    let rf_tol = Tolerances::new(spec.rf_tol, spec.rf_tol * 1e-2);
    let horizon = spec.rf_periods as f64 * DRIVE_PERIOD;
    let z_hi = fp.z_u.map_or(spec.escape.z_max, |zu| zu.min(spec.escape.z_max));

    let mut shells = Vec::with_capacity(spec.shells);
    let mut follow = Z0;
    for k in 1..=spec.shells {
        let e = e_max * k as f64 / spec.shells as f64;
        let zr = accessible_interval(&pseudo, e, fp.z_s, (spec.escape.z_min, z_hi.max(fp.z_s * 1.5)))?;
        let grid = shell_grid(&pseudo, e, zr, spec.grid[0], spec.grid[1], 0.0, horizon, &opts)?;
        let runs: Vec<(bool, bool)> = grid
            .cells
            .par_iter()
            .map(|c| {
                let t = detect_escape(&pseudo, &c.launch, horizon, spec.escape, opts.tol).is_none();
                let n = detect_escape(&rf, &c.launch, horizon, spec.escape, rf_tol).is_none();
                (t, n)
            })
            .collect();
        let curve = last_regular_curve(&pseudo, e, zr, follow, spec, &opts);
        if let Some(c) = curve.center {
            follow = c.0;
        }
        let mut chi_t = Vec::with_capacity(runs.len());
        let mut chi_r = Vec::with_capacity(runs.len());
        let mut chi_n = Vec::with_capacity(runs.len());
        let mut indeterminate = 0;
        for (c, &(t, n)) in grid.cells.iter().zip(&runs) {
            let excluded = t && c.return_time.is_none();
            if excluded {
                indeterminate += 1;
            }
            let t = t && !excluded;
            let r = t && point_in_polygon((c.z, c.pz), &curve.boundary);
            chi_t.push(t);
            chi_r.push(r);
            chi_n.push(n && !excluded);
        }
        shells.push(ShellIndicators {
            grid,
            chi_t,
            chi_r,
            chi_n,
            indeterminate,
            center: curve.center,
            multi_island: curve.multi_island,
            boundary: curve.boundary,
        });
    }

    let grids: Vec<ShellGrid> = shells.iter().map(|s| s.grid.clone()).collect();
    let mut volumes = Vec::new();
    for kind in IndicatorKind::ALL {
        let l3: Vec<f64> = shells.iter().map(|s| shell_volume(&s.grid, &s.chi(kind))).collect::<Result<_>>()?;
        volumes.push((kind, volume_table(kind, &grids, &l3)?));
    }
    Ok(IndicatorMaps { spec: *spec, shells, volumes })
}
