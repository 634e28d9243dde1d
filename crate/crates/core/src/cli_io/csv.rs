//! CSV emission with fixed float formatting.

use std::fmt::Write as _;
use std::path::Path;

use super::manifest::write_atomic;
use crate::dynamics::Section;
use crate::experiments::{CharacterizationRow, SurvivalCurve};
use crate::Result;

/// 12 significant digits; NaN for missing values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "NaN".to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    fmt_f64(x.unwrap_or(f64::NAN))
}

/// In-memory table with a one-line header.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<String>,
    body: String,
    rows: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), body: String::new(), rows: 0 }
    }

    /// Append one row of preformatted cells.
    pub fn push(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

pub fn section_table(section: &Section) -> Table {
    let mut t = Table::new(&["orbit_id", "crossing_index", "z", "p_z", "t_cross", "return_time"]);
    for o in &section.orbits {
        for (k, p) in o.points.iter().enumerate() {
            t.push(&[
                o.id.to_string(),
                k.to_string(),
                fmt_f64(p.state.z),
                fmt_f64(p.state.pz),
                fmt_f64(p.t_cross),
                fmt_f64(p.return_time),
            ]);
        }
    }
    t
}

pub fn jmax_table(rows: &[CharacterizationRow]) -> Table {
    let mut t = Table::new(&["sqrt_lambda", "q5", "u_rf_volts", "jmax", "jmax_over_q5", "jmax_pseudo", "z_escape"]);
    for r in rows {
        t.push(&[
            fmt_f64(r.sqrt_lambda),
            fmt_f64(r.q5),
            opt(r.u_rf_volts),
            opt(r.jmax),
            opt(r.jmax_over_q5),
            opt(r.jmax_pseudo),
            opt(r.z_escape),
        ]);
    }
    t
}

pub fn survival_table(curves: &[SurvivalCurve]) -> Table {
    let mut t = Table::new(&["u0_volts", "t_seconds", "p_survive", "n_ensemble", "seed"]);
    for c in curves {
        for (tt, p) in c.times.iter().zip(&c.p_survive) {
            t.push(&[fmt_f64(c.u0_volts), fmt_f64(*tt), fmt_f64(*p), c.n_ensemble.to_string(), c.seed.to_string()]);
        }
    }
    t
}

/// Header-plus-rows string for ad hoc tables.
pub fn render_rows(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}
