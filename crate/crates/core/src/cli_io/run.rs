//! Task execution behind the command line.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{CrossingSpec, RunConfig, Task, TrapSpec};
use super::csv::{fmt_f64, jmax_table, section_table, survival_table, Table};
use super::manifest::{write_atomic, RunManifest};
use super::svg::{Plot, Style};
use crate::constants::{DRIVE_PERIOD, Z0};
use crate::dynamics::{
    integrate, poincare_section, Crossing, Field, IntegrationOptions, PhaseState, PseudoField1D, PseudoField2D,
    RfField1D, RfField2D, Section,
};
use crate::experiments::{
    detect_jumps, find_threshold, indicator_maps, sweep_1d_characterization, tickle_survival, FieldModel,
    IndicatorSpec, SurvivalCurve,
};
use crate::phase_analysis::{classify_orbit, ClassifyOptions, IndicatorKind};
use crate::pseudopotential::Units;
use crate::trap_model::{fixed_points, linearize, nondimensionalize, to_physical, TrapParams};
use crate::{Error, Result};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "SURFTRAP_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

/// Exit status for an error: 2 for rejected input, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    /// Subcommand; must match the config's task unless it is `validate`.
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Worker threads, 0 for the rayon default.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: i32,
    pub out_dir: Option<PathBuf>,
    pub manifest: Option<RunManifest>,
    pub message: String,
}

impl RunOutcome {
    fn early(status: i32, message: String) -> Self {
        Self { status, out_dir: None, manifest: None, message }
    }
}

struct Ctx {
    dir: PathBuf,
    manifest: RunManifest,
    cfg: RunConfig,
}

impl Ctx {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        self.write(name, t.render().as_bytes())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let s = serde_json::to_string_pretty(v).map_err(|e| Error::Numerical(e.to_string()))?;
        self.write(name, s.as_bytes())
    }

    fn opts(&self) -> Result<IntegrationOptions> {
        IntegrationOptions::with_tol(self.cfg.tol)
    }
}

fn resolve_out(opts: &RunOptions, cfg: &RunConfig) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Parse, validate and execute a run; never panics on bad input.
pub fn run(opts: &RunOptions) -> RunOutcome {
    let text = match fs::read_to_string(&opts.config) {
        Ok(t) => t,
        Err(e) => return RunOutcome::early(EXIT_VALIDATION, format!("cannot read config {}: {e}", opts.config.display())),
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return RunOutcome::early(exit_code(&e), e.to_string()),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let validate_only = opts.command.as_deref() == Some("validate");
    if let Some(cmd) = opts.command.as_deref() {
        if !validate_only && cmd != cfg.task.name() {
            return RunOutcome::early(
                EXIT_VALIDATION,
                format!("config task is `{}` but the subcommand is `{cmd}`", cfg.task.name()),
            );
        }
    }
    let dir = resolve_out(opts, &cfg);
    if let Err(e) = fs::create_dir_all(&dir) {
        return RunOutcome::early(EXIT_FAILURE, format!("cannot create output directory {}: {e}", dir.display()));
    }
    let task_name = if validate_only { "validate" } else { cfg.task.name() };
    let manifest = RunManifest::new(&text, task_name, cfg.seed, cfg.tol);
    let mut ctx = Ctx { dir: dir.clone(), manifest, cfg };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build();

    let result = ctx.write("config.toml", text.as_bytes()).and_then(|_| {
        let go = |ctx: &mut Ctx| if validate_only { run_validate(ctx) } else { dispatch(ctx) };
        match &pool {
            Ok(p) => p.install(|| go(&mut ctx)),
            Err(_) => go(&mut ctx),
        }
    });
    let (status, message) = match result {
        Ok(0) => (EXIT_OK, format!("{} finished; outputs in {}", task_name, dir.display())),
        Ok(code) => (code, format!("{} finished with warnings; see {}", task_name, dir.join("manifest.json").display())),
        Err(e) => {
            ctx.manifest.warnings.push(e.to_string());
            (exit_code(&e), e.to_string())
        }
    };
    ctx.manifest.status = status;
    if let Err(e) = ctx.manifest.finish(&dir) {
        return RunOutcome::early(EXIT_FAILURE, format!("cannot write manifest: {e}"));
    }
    RunOutcome { status, out_dir: Some(dir), manifest: Some(ctx.manifest), message }
}

fn dispatch(ctx: &mut Ctx) -> Result<i32> {
    match ctx.cfg.task.clone() {
        Task::Validate => run_validate(ctx),
        Task::Simulate { initial, dim, model, periods, sample_periods } => {
            let p = ctx.cfg.trap.params()?;
            let s0 = if dim == 1 {
                PhaseState::new_1d(initial.z, initial.pz, 0.0)
            } else {
                PhaseState::new_2d(initial.y, initial.z, initial.py, initial.pz, 0.0)
            };
            let horizon = periods * DRIVE_PERIOD;
            let dt = sample_periods * DRIVE_PERIOD;
            let opts = ctx.opts()?;
            let traj = match (dim, model) {
                (1, FieldModel::Rf) => simulate(&RfField1D(p), s0, horizon, dt, &opts),
                (1, FieldModel::Pseudo) => simulate(&pseudo_1d(&p)?, s0, horizon, dt, &opts),
                (_, FieldModel::Rf) => simulate(&RfField2D(p), s0, horizon, dt, &opts),
                (_, FieldModel::Pseudo) => simulate(&pseudo_2d(&p)?, s0, horizon, dt, &opts),
            }?;
            let mut t = Table::new(&["t", "y", "z", "p_y", "p_z", "energy"]);
            for (s, e) in &traj.0 {
                t.push(&[s.t, s.y, s.z, s.py, s.pz, *e].map(fmt_f64));
            }
            ctx.table("trajectory.csv", &t)?;
            let plot = Plot::new("Trajectory", "t (scaled)", "z")
                .with("z(t)", traj.0.iter().map(|(s, _)| (s.t, s.z)).collect(), Style::Line);
            ctx.write("trajectory.svg", plot.render().as_bytes())?;
            ctx.manifest.stat("termination", &traj.1);
            ctx.manifest.stat("samples", traj.0.len());
            Ok(EXIT_OK)
        }
        Task::Section { dim, model, crossing, z0, energy, crossings } => {
            let p = ctx.cfg.trap.params()?;
            let c = crossing.crossing();
            let opts = ctx.opts()?;
            let horizon = match crossing {
                CrossingSpec::Stroboscopic { phase } => phase + (crossings as f64 + 1.0) * DRIVE_PERIOD,
                CrossingSpec::Plane => crossings as f64 * 1e4,
            };
            let sec = match (dim, model) {
                (1, FieldModel::Rf) => section(&RfField1D(p), &z0, 1, c, energy, crossings, horizon, &opts),
                (1, FieldModel::Pseudo) => section(&pseudo_1d(&p)?, &z0, 1, c, energy, crossings, horizon, &opts),
                (_, FieldModel::Rf) => section(&RfField2D(p), &z0, 2, c, energy, crossings, horizon, &opts),
                (_, FieldModel::Pseudo) => section(&pseudo_2d(&p)?, &z0, 2, c, energy, crossings, horizon, &opts),
            }?;
            let label = model_label(model);
            ctx.table(&format!("section_{label}.csv"), &section_table(&sec))?;
            let mut plot = Plot::new("Section", "z", "p_z");
            for o in &sec.orbits {
                plot = plot.with(&format!("z0 = {:.4}", o.initial.z), o.pairs(), Style::Points);
            }
            ctx.write(&format!("section_{label}.svg"), plot.render().as_bytes())?;
            let classes: Vec<_> = sec
                .orbits
                .iter()
                .map(|o| classify_orbit(&o.pairs(), &o.termination, &ClassifyOptions { center: Some((Z0, 0.0)), ..Default::default() }))
                .collect();
            ctx.manifest.stat("classes", &classes);
            Ok(EXIT_OK)
        }
        Task::Characterize { mut grid, jump_threshold } => {
            grid.seed = ctx.cfg.seed;
            let reference = ctx.cfg.trap.physical()?;
            let rows = sweep_1d_characterization(&grid, reference.as_ref())?;
            ctx.table("jmax_characterize.csv", &jmax_table(&rows))?;
            let mut plot = Plot::new("Trapping area", "sqrt(lambda)", "J_max / q5");
            let mut qs: Vec<f64> = grid.q5.clone();
            qs.dedup();
            for &q in &qs {
                let pts = rows.iter().filter(|r| r.q5 == q).filter_map(|r| r.jmax_over_q5.map(|j| (r.sqrt_lambda, j))).collect();
                plot = plot.with(&format!("q5 = {q}"), pts, Style::Line);
            }
            if let Some(&q) = qs.first() {
                let pseudo = rows.iter().filter(|r| r.q5 == q).filter_map(|r| r.jmax_pseudo.map(|j| (r.sqrt_lambda, j))).collect();
                plot = plot.with("averaged", pseudo, Style::Points);
            }
            ctx.write("jmax_characterize.svg", plot.render().as_bytes())?;
            let jumps = detect_jumps(&rows, jump_threshold);
            ctx.manifest.stat("jumps", &jumps);
            ctx.manifest.stat("rows", rows.len());
            let mut status = EXIT_OK;
            for r in &rows {
                if let Some(e) = &r.error {
                    ctx.manifest.warnings.push(format!("cell sqrt_lambda = {}, q5 = {}: {e}", r.sqrt_lambda, r.q5));
                    status = EXIT_FAILURE;
                }
            }
            Ok(status)
        }
        Task::Volumes { sqrt_lambda, sqrt_lambda_b, u_rf, q5, shells, grid, rf_periods, section_crossings, escape } => {
            let reference = ctx.cfg.trap.physical()?;
            let amps: Vec<(f64, Option<f64>)> = match (&u_rf, &q5) {
                (Some(us), _) => {
                    let t = reference.as_ref().ok_or_else(|| Error::validation("volumes: `u_rf` needs a physical trap"))?;
                    us.iter().map(|&u| (t.q5_for(u), Some(u))).collect()
                }
                (None, Some(qs)) => qs.iter().map(|&q| (q, reference.as_ref().map(|t| t.u_rf_for(q)))).collect(),
                _ => return Err(Error::validation("volumes: need `u_rf` or `q5`")),
            };
            let mut t = Table::new(&[
                "sqrt_lambda", "sqrt_lambda_b", "q5", "u_rf_volts", "indicator", "energy", "lambda_3d", "lambda_4d", "h_z",
                "h_p", "shells",
            ]);
            let mut plot = Plot::new("Phase-space volume", "E", "Lambda_4D");
            let mut status = EXIT_OK;
            let mut ratios = Vec::new();
            for &sl in &sqrt_lambda {
                for &slb in &sqrt_lambda_b {
                    for &(q, u) in &amps {
                        let spec = IndicatorSpec {
                            lambda: sl * sl,
                            lambda_b: slb * slb,
                            q5: q,
                            shells,
                            grid,
                            rf_periods,
                            section_crossings,
                            tol: ctx.cfg.tol,
                            escape,
                            ..IndicatorSpec::default()
                        };
                        let maps = match indicator_maps(&spec) {
                            Ok(m) => m,
                            Err(e) => {
                                ctx.manifest.warnings.push(format!("cell ({sl}, {slb}, {q}): {e}"));
                                status = EXIT_FAILURE;
                                continue;
                            }
                        };
                        for (kind, vols) in &maps.volumes {
                            for v in vols {
                                t.push(&[
                                    fmt_f64(sl),
                                    fmt_f64(slb),
                                    fmt_f64(q),
                                    fmt_f64(u.unwrap_or(f64::NAN)),
                                    kind.label().to_string(),
                                    fmt_f64(v.energy),
                                    fmt_f64(v.lambda_3d),
                                    fmt_f64(v.lambda_4d),
                                    fmt_f64(v.h.0),
                                    fmt_f64(v.h.1),
                                    v.shells.to_string(),
                                ]);
                            }
                            if matches!(kind, IndicatorKind::Trapped | IndicatorKind::TrappedNonEscaping) {
                                let name = format!("{} ({sl}, {slb}, {q:.3})", kind.label());
                                plot = plot.with(&name, vols.iter().map(|v| (v.energy, v.lambda_4d)).collect(), Style::Line);
                            }
                        }
                        let (lt, lr, lrn, ltn) = (
                            maps.total(IndicatorKind::Trapped),
                            maps.total(IndicatorKind::Regular),
                            maps.total(IndicatorKind::RegularNonEscaping),
                            maps.total(IndicatorKind::TrappedNonEscaping),
                        );
                        if !(lrn <= lr && lr <= lt && lrn <= ltn) {
                            ctx.manifest.warnings.push(format!("volume ordering violated at ({sl}, {slb}, {q})"));
                            status = EXIT_FAILURE;
                        }
                        let multi = maps.shells.iter().filter(|s| s.multi_island).count();
                        if multi > 0 {
                            ctx.manifest.warnings.push(format!("cell ({sl}, {slb}, {q}): {multi} shells with several islands"));
                        }
                        let indeterminate: usize = maps.shells.iter().map(|s| s.indeterminate).sum();
                        ratios.push(serde_json::json!({
                            "sqrt_lambda": sl, "sqrt_lambda_b": slb, "q5": q,
                            "trapped_non_escaping_over_trapped": if lt > 0.0 { ltn / lt } else { f64::NAN },
                            "indeterminate_cells": indeterminate,
                        }));
                    }
                }
            }
            ctx.table("volumes.csv", &t)?;
            ctx.write("volumes.svg", plot.render().as_bytes())?;
            ctx.manifest.stat("cells", &ratios);
            Ok(status)
        }
        Task::Tickle { mut spec, models, threshold_grid, threshold_rel_tol } => {
            spec.seed = ctx.cfg.seed;
            spec.tol = ctx.cfg.tol.max(1e-12);
            let trap = ctx.cfg.trap.physical()?.ok_or_else(|| Error::validation("tickle: needs a physical trap"))?;
            let mut curves_by_model: Vec<(FieldModel, Vec<SurvivalCurve>)> = Vec::new();
            for &m in &models {
                let curves = tickle_survival(&trap, &spec, m)?;
                let label = model_label(m);
                ctx.table(&format!("survival_{label}.csv"), &survival_table(&curves))?;
                ctx.write(&format!("survival_{label}.svg"), survival_plot(&curves).render().as_bytes())?;
                curves_by_model.push((m, curves));
            }
            if let [(_, a), (_, b)] = &curves_by_model[..] {
                let d = a
                    .iter()
                    .zip(b)
                    .flat_map(|(x, y)| x.p_survive.iter().zip(&y.p_survive).map(|(p, q)| (p - q).abs()))
                    .fold(0.0, f64::max);
                ctx.manifest.stat("max_delta_p_survive", d);
            }
            if let Some(grid) = threshold_grid {
                let m = models[0];
                let th = find_threshold(&trap, &spec, m, &grid, threshold_rel_tol)?;
                let label = model_label(m);
                ctx.table(&format!("survival_threshold_{label}.csv"), &survival_table(&[th.at_star.clone(), th.above.clone()]))?;
                ctx.manifest.stat("u0_star_volts", th.u0_star);
                ctx.manifest.stat("u0_upper_volts", th.u0_upper);
                ctx.manifest.stat("escape_fraction_at_1_3_u0_star", th.escape_fraction_above());
            }
            Ok(EXIT_OK)
        }
    }
}

fn model_label(m: FieldModel) -> &'static str {
    match m {
        FieldModel::Rf => "rf",
        FieldModel::Pseudo => "pseudo",
    }
}

fn survival_plot(curves: &[SurvivalCurve]) -> Plot {
    let mut plot = Plot::new("Survival probability", "t (s)", "P_s");
    for c in curves {
        let pts = c.times.iter().cloned().zip(c.p_survive.iter().cloned()).collect();
        plot = plot.with(&format!("U0 = {:.4} V", c.u0_volts), pts, Style::Line);
    }
    plot
}

fn pseudo_1d(p: &TrapParams) -> Result<PseudoField1D> {
    let (l, lb) = (p.lambda(), p.lambda_b());
    match (l, lb) {
        (Some(lambda), Some(lambda_b)) => Ok(PseudoField1D { lambda, lambda_b, units: Units::Rf { q5: p.q5 } }),
        _ => Err(Error::validation("the averaged model needs q5 > 0")),
    }
}

fn pseudo_2d(p: &TrapParams) -> Result<PseudoField2D> {
    PseudoField2D::matching(p).ok_or_else(|| Error::validation("the averaged model needs q5 > 0"))
}

type Samples = (Vec<(PhaseState, f64)>, crate::dynamics::Termination);

fn simulate<const D: usize, F: Field<D>>(field: &F, s0: PhaseState, horizon: f64, dt: f64, opts: &IntegrationOptions) -> Result<Samples> {
    let tr = integrate(field, s0, horizon, opts, Some(dt))?;
    let samples = tr.samples.iter().map(|s| (*s, s.energy::<D, F>(field))).collect();
    Ok((samples, tr.termination))
}

#[allow(clippy::too_many_arguments)]
fn section<const D: usize, F: Field<D>>(
    field: &F,
    z0: &[f64],
    dim: usize,
    crossing: Crossing,
    energy: Option<f64>,
    crossings: usize,
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<Section> {
    let mut ensemble = Vec::with_capacity(z0.len());
    for &z in z0 {
        let s = match (dim, energy, crossing) {
            (2, Some(e), Crossing::Plane { .. }) => {
                let py2 = 2.0 * (e - field.potential(0.0, &[0.0, z][..D].try_into().expect("dimension")));
                if py2 <= 0.0 {
                    return Err(Error::validation(format!("section: z0 = {z} is outside the shell E = {e}")));
                }
                PhaseState::new_2d(0.0, z, py2.sqrt(), 0.0, 0.0)
            }
            (1, _, _) => PhaseState::new_1d(z, 0.0, 0.0),
            _ => PhaseState::new_2d(0.0, z, 0.0, 0.0, 0.0),
        };
        ensemble.push(s);
    }
    let e = if matches!(crossing, Crossing::Plane { .. }) { energy } else { None };
    poincare_section(field, &ensemble, crossing, e, crossings, horizon, opts)
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run_validate(ctx: &mut Ctx) -> Result<i32> {
    let p = ctx.cfg.trap.params()?;
    let mut checks = Vec::new();
    let mut check = |name: &'static str, pass: bool, detail: String| checks.push(Check { name, pass, detail });

    let fp0 = fixed_points(0.0, 0.0)?;
    let zu0 = fp0.z_u.unwrap_or(f64::NAN);
    let exact = (0.75 + 3f64.sqrt()).sqrt();
    check("reference z_s", (fp0.z_s - 0.75f64.sqrt()).abs() < 1e-12, format!("z_s = {}", fp0.z_s));
    check("reference z_u", (zu0 - exact).abs() < 1e-9, format!("z_u = {zu0}, expected {exact}"));

    if let (Some(l), Some(lb)) = (p.lambda(), p.lambda_b()) {
        let fp = fixed_points(l, lb)?;
        let slope = fp.z_u.map(|z| crate::pseudopotential::axis_potential(z, l, lb).1.abs());
        check(
            "trap fixed points",
            slope.map_or(true, |s| s < 1e-10),
            format!("lambda = {l}, lambda_b = {lb}, z_s = {}, z_u = {:?}", fp.z_s, fp.z_u),
        );
        ctx.manifest.stat("lambda", l);
        ctx.manifest.stat("lambda_b", lb);
        ctx.manifest.stat("z_u", fp.z_u);
    }

    if let TrapSpec::Physical { .. } = ctx.cfg.trap {
        let t = ctx.cfg.trap.physical()?.expect("physical trap");
        let back = nondimensionalize(&to_physical(&p, t.mass, t.charge, t.width, t.omega_rf)?)?;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        let err = rel(back.q5, p.q5).max(rel(back.a[0], p.a[0])).max(if p.a5 == 0.0 { back.a5.abs() } else { rel(back.a5, p.a5) });
        check("unit round trip", err < 1e-12, format!("max relative error {err:e}"));
        if let Ok(m) = linearize(&p) {
            ctx.manifest.stat("omega_z_over_2pi_hz", m.z.omega(t.omega_rf).map(|w| w / std::f64::consts::TAU));
            ctx.manifest.stat("omega_y_over_2pi_hz", m.y.omega(t.omega_rf).map(|w| w / std::f64::consts::TAU));
        }
    }
    let modes = linearize(&p)?;
    ctx.manifest.stat("q5", p.q5);
    ctx.manifest.stat("modes", modes);
    if !modes.all_stable() {
        ctx.manifest.warnings.push("linearized motion at the rf null is unstable".to_string());
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    ctx.json("validate.json", &checks)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

/// Convenience for tests and callers: run and report in one call.
pub fn run_path(config: &Path, command: &str, out: &Path) -> RunOutcome {
    run(&RunOptions { config: config.to_path_buf(), command: Some(command.into()), out: Some(out.to_path_buf()), seed: None, threads: 0 })
}
