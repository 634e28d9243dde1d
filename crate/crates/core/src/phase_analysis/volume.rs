//! Energy-shell and cumulative phase-space volumes from section return times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{trace_section, Crossing, Field, IntegrationOptions, PhaseState};
use crate::numerics::pairwise_sum;
use crate::{Error, Result};

/// Which indicator a volume counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    /// χ_t: bounded in the averaged potential.
    Trapped,
    /// χ_r: inside the last unbroken torus of the central island.
    Regular,
    /// χ_n: not escaping under the full rf field.
    NonEscaping,
    /// χ_t·χ_n.
    TrappedNonEscaping,
    /// χ_r·χ_n.
    RegularNonEscaping,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 5] = [
        IndicatorKind::Trapped,
        IndicatorKind::Regular,
        IndicatorKind::NonEscaping,
        IndicatorKind::TrappedNonEscaping,
        IndicatorKind::RegularNonEscaping,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            IndicatorKind::Trapped => "chi_t",
            IndicatorKind::Regular => "chi_r",
            IndicatorKind::NonEscaping => "chi_n",
            IndicatorKind::TrappedNonEscaping => "chi_t_chi_n",
            IndicatorKind::RegularNonEscaping => "chi_r_chi_n",
        }
    }
}

/// One grid cell of the y = 0 section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionCell {
    pub z: f64,
    pub pz: f64,
    /// Launch state on the shell with p_y > 0.
    pub launch: PhaseState,
    /// First return time to the section; `None` if the orbit escaped first.
    pub return_time: Option<f64>,
}

/// Accessible part of the section at one energy, on a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellGrid {
    pub energy: f64,
    /// Cell size (h_z, h_p).
    pub h: (f64, f64),
    pub cells: Vec<SectionCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub kind: IndicatorKind,
    pub energy: f64,
    pub lambda_3d: f64,
    pub lambda_4d: f64,
    pub h: (f64, f64),
    pub shells: usize,
}

/// Interval of z on y = 0 about `z_c` where V(0, z) < `energy`.
pub fn accessible_interval<F: Field<2>>(field: &F, energy: f64, z_c: f64, z_limits: (f64, f64)) -> Result<(f64, f64)> {
    let g = |z: f64| energy - field.potential(0.0, &[0.0, z]);
    if g(z_c) <= 0.0 {
        return Err(Error::domain(format!("energy {energy} is below the potential at z = {z_c}")));
    }
    let edge = |toward: f64| {
        let n = 400;
        let mut prev = z_c;
        for i in 1..=n {
            let z = z_c + (toward - z_c) * i as f64 / n as f64;
            if g(z) <= 0.0 {
                let (mut a, mut b) = (prev, z);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if g(m) > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return a;
            }
            prev = z;
        }
        toward
    };
    Ok((edge(z_limits.0), edge(z_limits.1)))
}

/// Grid the accessible section at `energy` with `n_z × n_p` cells over
/// the bounding box and record each cell's first return time.
///
/// A cell is kept when its center lies on the shell. Orbits start on
/// y = 0 with p_y = +√(2(E − V) − p_z²) at time `t0`.
#[allow(clippy::too_many_arguments)]
pub fn shell_grid<F: Field<2>>(
    field: &F,
    energy: f64,
    z_range: (f64, f64),
    n_z: usize,
    n_p: usize,
    t0: f64,
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<ShellGrid> {
    if n_z == 0 || n_p == 0 || z_range.1 <= z_range.0 {
        return Err(Error::validation("shell grid needs a non-empty range and cell counts"));
    }
    let v = |z: f64| field.potential(t0, &[0.0, z]);
    let v_min = (0..=200)
        .map(|i| v(z_range.0 + (z_range.1 - z_range.0) * i as f64 / 200.0))
        .fold(f64::INFINITY, f64::min)
        .min(energy);
    let p_max = (2.0 * (energy - v_min)).max(0.0).sqrt();
    let hz = (z_range.1 - z_range.0) / n_z as f64;
    let hp = 2.0 * p_max / n_p as f64;
    let mut launches = Vec::new();
    for i in 0..n_z {
        let z = z_range.0 + (i as f64 + 0.5) * hz;
        let k = 2.0 * (energy - v(z));
        for j in 0..n_p {
            let pz = -p_max + (j as f64 + 0.5) * hp;
            let py2 = k - pz * pz;
            if py2 > 0.0 {
                launches.push((z, pz, PhaseState::new_2d(0.0, z, py2.sqrt(), pz, t0)));
            }
        }
    }
    let cells = launches
        .par_iter()
        .map(|&(z, pz, s)| {
            let o = trace_section(field, &s, Crossing::y_upward(), 1, horizon, opts);
            SectionCell { z, pz, launch: s, return_time: o.points.first().map(|p| p.return_time) }
        })
        .collect();
    Ok(ShellGrid { energy, h: (hz, hp), cells })
}

/// Λ³ᴰ = Σ T·χ·h_z·h_p over the cells.
pub fn shell_volume(grid: &ShellGrid, chi: &[bool]) -> Result<f64> {
    if chi.len() != grid.cells.len() {
        return Err(Error::validation(format!(
            "indicator has {} entries for {} cells",
            chi.len(),
            grid.cells.len()
        )));
    }
    let terms: Vec<f64> = grid
        .cells
        .iter()
        .zip(chi)
        .map(|(c, &x)| if x { c.return_time.unwrap_or(0.0) } else { 0.0 })
        .collect();
    Ok(pairwise_sum(&terms) * grid.h.0 * grid.h.1)
}

/// Cumulative Λ⁴ᴰ(E_k) = ∫₀^{E_k} Λ³ᴰ dE by the trapezoid rule, with
/// Λ³ᴰ(0) = 0 prepended when the first shell is above zero.
pub fn volume_4d(energies: &[f64], lambda_3d: &[f64]) -> Result<Vec<f64>> {
    if energies.len() != lambda_3d.len() {
        return Err(Error::validation("energies and shell volumes differ in length"));
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) || energies.first().is_some_and(|&e| e < 0.0) {
        return Err(Error::validation("shell energies must be non-negative and increasing"));
    }
    let mut out = Vec::with_capacity(energies.len());
    let (mut e_prev, mut l_prev, mut acc) = (0.0, 0.0, 0.0);
    for (&e, &l) in energies.iter().zip(lambda_3d) {
        acc += 0.5 * (e - e_prev) * (l + l_prev);
        out.push(acc);
        e_prev = e;
        l_prev = l;
    }
    Ok(out)
}

/// Assemble per-shell [`VolumeEstimate`]s for one indicator.
pub fn volume_table(kind: IndicatorKind, grids: &[ShellGrid], lambda_3d: &[f64]) -> Result<Vec<VolumeEstimate>> {
    let energies: Vec<f64> = grids.iter().map(|g| g.energy).collect();
    let l4 = volume_4d(&energies, lambda_3d)?;
    Ok(grids
        .iter()
        .zip(lambda_3d)
        .zip(l4)
        .map(|((g, &l3), l4)| VolumeEstimate {
            kind,
            energy: g.energy,
            lambda_3d: l3,
            lambda_4d: l4,
            h: g.h,
            shells: energies.len(),
        })
        .collect())
}
