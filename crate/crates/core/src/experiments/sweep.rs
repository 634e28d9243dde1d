//! Parameter sweeps of the 1D trapping area.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::phase_analysis::{last_unbroken_torus, separatrix_action, TorusScanOptions};
use crate::trap_model::PhysicalTrap;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub sqrt_lambda: Vec<f64>,
    pub sqrt_lambda_b: Vec<f64>,
    pub q5: Vec<f64>,
    pub scan: TorusScanOptions,
    pub seed: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            sqrt_lambda: (0..12).map(|i| 0.015 + 0.005 * i as f64).collect(),
            sqrt_lambda_b: vec![0.0],
            q5: vec![0.22, 0.43, 0.65, 0.87, 1.08, 1.30],
            scan: TorusScanOptions::default(),
            seed: 0,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.sqrt_lambda.is_empty() || self.q5.is_empty() || self.sqrt_lambda_b.is_empty() {
            return Err(Error::validation("sweep grids must be non-empty"));
        }
        if self.sqrt_lambda.iter().chain(&self.q5).chain(&self.sqrt_lambda_b).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::validation("sweep grid values must be finite and >= 0"));
        }
        if self.scan.crossings == 0 {
            return Err(Error::validation("sweep horizon must be positive"));
        }
        Ok(())
    }
}

/// One cell of the characterization table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationRow {
    pub sqrt_lambda: f64,
    pub q5: f64,
    pub u_rf_volts: Option<f64>,
    pub jmax: Option<f64>,
    pub jmax_over_q5: Option<f64>,
    /// Planimeter area of the same curve, divided by q5.
    pub area_over_q5: Option<f64>,
    /// Separatrix area of the scaled averaged potential.
    pub jmax_pseudo: Option<f64>,
    pub z_escape: Option<f64>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub seed: u64,
}

fn row(sl: f64, q5: f64, reference: Option<&PhysicalTrap>, grid: &SweepGrid) -> CharacterizationRow {
    let lam = sl * sl;
    let mut r = CharacterizationRow {
        sqrt_lambda: sl,
        q5,
        u_rf_volts: reference.map(|t| t.u_rf_for(q5)),
        jmax: None,
        jmax_over_q5: None,
        area_over_q5: None,
        jmax_pseudo: None,
        z_escape: None,
        error: None,
        warnings: Vec::new(),
        seed: grid.seed,
    };
    match separatrix_action(lam, 0.0) {
        Ok(j) => r.jmax_pseudo = j,
        Err(e) => r.warnings.push(format!("pseudopotential reference: {e}")),
    }
    match last_unbroken_torus(lam, q5, &grid.scan) {
        Ok(t) => {
            let s = if q5 > 0.0 { q5 } else { 1.0 };
            r.jmax = t.j_max;
            r.jmax_over_q5 = t.j_max.map(|j| j / s);
            r.area_over_q5 = t.j_max_area.map(|j| j / s);
            r.z_escape = t.z_esc;
            r.warnings.extend(t.warnings);
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r
}

/// J_max and z_esc for every (√λ, q5) pair, q5-major. Cell failures are
/// recorded in the row and do not stop the sweep.
pub fn sweep_1d_characterization(grid: &SweepGrid, reference: Option<&PhysicalTrap>) -> Result<Vec<CharacterizationRow>> {
    grid.validate()?;
    let cells: Vec<(f64, f64)> = grid.q5.iter().flat_map(|&q| grid.sqrt_lambda.iter().map(move |&s| (s, q))).collect();
    Ok(cells.par_iter().map(|&(s, q)| row(s, q, reference, grid)).collect())
}

/// A relative change of J_max/q5 between adjacent √λ at fixed q5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub q5: f64,
    pub from_sqrt_lambda: f64,
    pub to_sqrt_lambda: f64,
    pub relative: f64,
}

/// Jumps larger than `threshold` along √λ, per q5.
pub fn detect_jumps(rows: &[CharacterizationRow], threshold: f64) -> Vec<Jump> {
    let mut qs: Vec<f64> = rows.iter().map(|r| r.q5).collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let mut out = Vec::new();
    for q in qs {
        let mut line: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.q5 == q)
            .filter_map(|r| r.jmax_over_q5.map(|j| (r.sqrt_lambda, j)))
            .collect();
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in line.windows(2) {
            let rel = (w[1].1 - w[0].1).abs() / w[0].1.abs().max(w[1].1.abs());
            if rel > threshold {
                out.push(Jump { q5: q, from_sqrt_lambda: w[0].0, to_sqrt_lambda: w[1].0, relative: rel });
            }
        }
    }
    out
}
