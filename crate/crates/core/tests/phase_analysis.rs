use proptest::prelude::*;
use std::f64::consts::PI;

use surftrap::constants::{DRIVE_PERIOD, Z0};
use surftrap::dynamics::*;
use surftrap::phase_analysis::*;
use surftrap::pseudopotential::Units;
use surftrap::trap_model::{linearize, TrapParams};

fn strobe<F: Field<1>>(f: &F, z0: f64, n: usize) -> SectionOrbit {
    let opts = IntegrationOptions::with_tol(1e-11).unwrap();
    let s0 = PhaseState::new_1d(z0, 0.0, 0.0);
    trace_section(f, &s0, Crossing::Stroboscopic { phase: 0.0 }, n, n as f64 * DRIVE_PERIOD + 0.5, &opts)
}

fn about_null() -> (ClassifyOptions, TorusOptions) {
    (
        ClassifyOptions { center: Some((Z0, 0.0)), ..Default::default() },
        TorusOptions { center: Some((Z0, 0.0)), ..Default::default() },
    )
}

/// Largest angular gap between RMS-normalized section points about the null.
fn max_gap(o: &SectionOrbit) -> f64 {
    let pts = o.pairs();
    let (_, s) = geometry::centroid_and_spread(&pts);
    let mut th: Vec<f64> = pts.iter().map(|p| (p.1 / s.1).atan2((p.0 - Z0) / s.0)).collect();
    th.sort_by(f64::total_cmp);
    let wrap = th[0] + 2.0 * PI - th[th.len() - 1];
    th.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

#[test]
fn averaged_family_actions() {
    let lam = 0.035f64.powi(2);
    let f = PseudoField1D::scaled(lam);
    let last = last_unbroken_torus(lam, 0.0, &TorusScanOptions::default()).unwrap();
    let n = last.tori.len();
    assert!(n > 10, "{n}");
    let v0 = f.potential(0.0, &[Z0]);
    let mut resolved = 0;
    for (k, (z0, t)) in last.tori.iter().enumerate() {
        let e = f.potential(0.0, &[*z0]);
        let j1 = action_quadrature(e - v0, lam, 0.0, Units::Scaled).unwrap();
        // J = α·J₁ + J₂ with J₂ = −πE per crossing of an autonomous flow
        let legendre = t.alpha * j1 - PI * e;
        assert!((t.j - legendre).abs() < 1e-3 * j1, "z0={z0} J={} expected {legendre}", t.j);
        if k > 0 && k + 1 < n {
            let fit = t.j1.unwrap();
            assert!((fit / j1 - 1.0).abs() < 5e-3, "z0={z0} J1 fit {fit} vs {j1}");
            assert!((t.j2.unwrap() + PI * e).abs() < 5e-3 * j1, "z0={z0}");
        }
        if max_gap(&strobe(&f, *z0, 1000)) < 0.1 {
            resolved += 1;
            assert!((t.area / j1 - 1.0).abs() < 5e-3, "z0={z0} area {} vs {j1}", t.area);
        }
    }
    assert!(resolved * 2 >= n, "{resolved} of {n} curves resolved");
}

#[test]
fn rf_tori_are_nested() {
    let (sl, q5) = (0.035, 0.43);
    let p = TrapParams::from_lambda(sl * sl, 0.0, q5).unwrap();
    let last = last_unbroken_torus(sl * sl, q5, &TorusScanOptions::default()).unwrap();
    let jmax = last.j_max.unwrap();
    let mut kept: Vec<&(f64, TorusInvariants)> = Vec::new();
    for t in &last.tori {
        if kept.last().map_or(true, |k| t.0 - k.0 > 5e-3) {
            kept.push(t);
        }
    }
    assert!(kept.len() > 10);
    let mut resolved = 0;
    for w in kept.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        assert!(b.j1.unwrap() > a.j1.unwrap(), "J1 at z0 = {}", w[1].0);
        assert!(b.alpha < a.alpha, "alpha at z0 = {}", w[1].0);
    }
    for (z0, t) in &kept[1..] {
        let j1 = t.j1.unwrap();
        assert!(j1 <= jmax * (1.0 + 1e-3));
        if max_gap(&strobe(&RfField1D(p), *z0, 1000)) < 0.1 {
            resolved += 1;
            assert!((t.area / j1 - 1.0).abs() < 5e-3, "z0={z0} area {} vs J1 {j1}", t.area);
        }
    }
    assert!(resolved * 2 >= kept.len() - 1, "{resolved} of {} curves resolved", kept.len() - 1);
}

#[test]
fn center_winding_is_half_the_exponent() {
    for &(sl, q5) in &[(0.035, 0.65), (0.02, 0.43), (0.015, 1.3)] {
        let p = TrapParams::from_lambda(sl * sl, 0.0, q5).unwrap();
        let nu = linearize(&p).unwrap().z.nu.unwrap();
        let o = strobe(&RfField1D(p), Z0 + 2e-4, 400);
        let (_, topts) = about_null();
        let t = torus_actions(&o, &topts).unwrap();
        let expect = (0.5 * nu).rem_euclid(1.0);
        assert!((t.alpha - expect).abs() < 1e-3, "q5={q5}: alpha {} vs {expect}", t.alpha);
    }
}

#[test]
fn harmonic_plane_winding() {
    let f = Harmonic { omega: [1.0, 2f64.sqrt()], center: [0.0, 0.0] };
    let opts = IntegrationOptions::with_tol(1e-12).unwrap().without_escape();
    let o = trace_section(&f, &PhaseState::new_2d(0.0, 0.2, 0.5, 0.0, 0.0), Crossing::y_upward(), 500, 1e5, &opts);
    let t = torus_actions(&o, &TorusOptions { center: Some((0.0, 0.0)), ..Default::default() }).unwrap();
    assert!((t.alpha - (2f64.sqrt() - 1.0)).abs() < 1e-6, "{}", t.alpha);
    assert!(!t.recurred);
}

#[test]
fn six_island_chain() {
    // outer resonant band at √λ = 0.015, q5 = 1.3; centre winding ≈ 0.177
    let p = TrapParams::from_lambda(0.015f64.powi(2), 0.0, 1.3).unwrap();
    let o = strobe(&RfField1D(p), 1.0, 2000);
    let (copts, topts) = about_null();
    let t = torus_actions(&o, &topts).unwrap();
    assert!((t.alpha - 1.0 / 6.0).abs() < 1e-6, "{}", t.alpha);
    assert_eq!(t.ratio, Some((1, 6)));
    // six islands look thick about the null
    assert!(!classify_orbit(&o.pairs(), &o.termination, &copts).is_regular());
}

#[test]
fn classification_of_reference_orbits() {
    let (copts, _) = about_null();
    let lam = 0.035f64.powi(2);
    let o = strobe(&PseudoField1D::scaled(lam), Z0 + 0.1, 1000);
    assert!(classify_orbit(&o.pairs(), &o.termination, &copts).is_regular());

    let o = strobe(&LinearMathieu { a: 0.0, q: 0.3 }, Z0 + 0.1, 1000);
    assert!(classify_orbit(&o.pairs(), &o.termination, &copts).is_regular());

    let p = TrapParams::from_lambda(0.015f64.powi(2), 0.0, 1.3).unwrap();
    let o = strobe(&RfField1D(p), 1.3, 1000);
    let c = classify_orbit(&o.pairs(), &o.termination, &copts);
    assert!(matches!(c, OrbitClass::Chaotic { .. } | OrbitClass::Escaping { .. }), "{c:?}");
}

#[test]
fn strong_drive_shrinks_the_trapping_area() {
    let lam = 0.015f64.powi(2);
    let last = last_unbroken_torus(lam, 1.3, &TorusScanOptions::default()).unwrap();
    let j = last.j_max.unwrap() / 1.3;
    let j_ps = separatrix_action(lam, 0.0).unwrap().unwrap();
    assert!(j < 0.5 * j_ps, "{j} vs {j_ps}");
}

#[test]
fn separatrix_area_falls_with_lambda() {
    let j: Vec<f64> = (0..12)
        .map(|i| {
            let sl = 0.015 + 0.005 * i as f64;
            separatrix_action(sl * sl, 0.0).unwrap().unwrap()
        })
        .collect();
    assert!(j.windows(2).all(|w| w[1] < w[0]), "{j:?}");
}

/// Λ⁴ᴰ of the averaged-model trapped set at fixed (λ, λ_b).
fn trapped_volume(lam: f64, lam_b: f64, q5: f64) -> f64 {
    let f = PseudoField2D::rf_units(lam, lam_b, q5);
    let fp = surftrap::trap_model::fixed_points(lam, lam_b).unwrap();
    let v0 = f.potential(0.0, &[0.0, fp.z_s]);
    let b = f.potential(0.0, &[0.0, fp.z_u.unwrap()]) - v0;
    let opts = IntegrationOptions::with_tol(1e-11).unwrap();
    let shells = 6;
    let mut es = Vec::new();
    let mut l3 = Vec::new();
    for k in 1..=shells {
        let e = 0.9 * b * k as f64 / shells as f64;
        let zr = accessible_interval(&f, v0 + e, fp.z_s, (0.1, fp.z_u.unwrap())).unwrap();
        let g = shell_grid(&f, v0 + e, zr, 10, 10, 0.0, 1e4 / q5, &opts).unwrap();
        let chi: Vec<bool> = g.cells.iter().map(|c| c.return_time.is_some()).collect();
        es.push(e);
        l3.push(shell_volume(&g, &chi).unwrap());
    }
    *volume_4d(&es, &l3).unwrap().last().unwrap()
}

#[test]
fn trapped_volume_scales_with_drive_squared() {
    let (lam, lam_b) = (0.03f64.powi(2), 0.1f64.powi(2));
    let a = trapped_volume(lam, lam_b, 0.4);
    let b = trapped_volume(lam, lam_b, 0.8);
    assert!(a > 0.0);
    assert!((b / a / 4.0 - 1.0).abs() < 1e-3, "{}", b / a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cumulative_volume_is_monotone(
        steps in prop::collection::vec(1e-6f64..1.0, 1..20),
        l3 in prop::collection::vec(0.0f64..10.0, 20),
    ) {
        let es: Vec<f64> = steps.iter().scan(0.0, |acc, s| { *acc += s; Some(*acc) }).collect();
        let v = volume_4d(&es, &l3[..es.len()]).unwrap();
        prop_assert!(v[0] >= 0.0);
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn winding_ratio_is_reduced(w in 0.3f64..3.0, z in 0.05f64..0.5) {
        let f = Harmonic { omega: [1.0, w], center: [0.0, 0.0] };
        let opts = IntegrationOptions::with_tol(1e-11).unwrap().without_escape();
        let o = trace_section(&f, &PhaseState::new_2d(0.0, z, 0.5, 0.0, 0.0), Crossing::y_upward(), 400, 1e5, &opts);
        let t = torus_actions(&o, &TorusOptions { center: Some((0.0, 0.0)), max_denominator: 50, ..Default::default() }).unwrap();
        prop_assert!((0.0..1.0).contains(&t.alpha));
        let expect = w.rem_euclid(1.0);
        let d = (t.alpha - expect).abs();
        prop_assert!(d.min(1.0 - d) < 1e-4, "alpha {} vs {}", t.alpha, expect);
        if let Some((r, s)) = t.ratio {
            prop_assert!(r > 0 && s > 0);
            let g = (1..=r.min(s)).rev().find(|k| r % k == 0 && s % k == 0).unwrap();
            prop_assert_eq!(g, 1);
        }
    }
}
