use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use surftrap::constants::{be9_ion_mass, ELEMENTARY_CHARGE, Z0};
use surftrap::pseudopotential::axis_potential;
use surftrap::trap_model::*;
use surftrap::Error;

fn be_trap(u_rf: f64, fx_mhz: f64) -> PhysicalTrap {
    PhysicalTrap {
        mass: be9_ion_mass(),
        charge: ELEMENTARY_CHARGE,
        width: 50e-6,
        omega_rf: TAU * 100e6,
        u_rf,
        u_bias: 0.0,
        axial: AxialConfinement::Frequency { omega_x: TAU * fx_mhz * 1e6 },
    }
}

#[test]
fn gradients_match_central_differences() {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        for j in 0..50 {
            let y = -2.0 + 4.0 * i as f64 / 49.0;
            let z = 0.2 + 2.8 * j as f64 / 49.0;
            let (_, g) = five_wire_potential(y, z).unwrap();
            let v = |y: f64, z: f64| five_wire_potential(y, z).unwrap().0;
            let fd = [(v(y + h, z) - v(y - h, z)) / (2.0 * h), (v(y, z + h) - v(y, z - h)) / (2.0 * h)];
            let norm = g[0].hypot(g[1]).max(1e-3);
            for k in 0..2 {
                worst = worst.max((g[k] - fd[k]).abs() / norm);
            }
        }
    }
    assert!(worst < 1e-5, "worst relative gradient error {worst}");
}

#[test]
fn saddle_of_the_rf_term() {
    let (v, g) = five_wire_potential(0.0, Z0).unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-14);
    assert!(g[0].abs() < 1e-14 && g[1].abs() < 1e-14);
    let (v, _) = five_wire_potential(1.0, 1e-12).unwrap();
    assert!((v - 1.0).abs() < 1e-9);
    assert!(matches!(five_wire_potential(0.0, 0.0), Err(Error::Domain(_))));
}

#[test]
fn trap_force_vanishes_at_the_null() {
    let p = TrapParams::new(0.0016, 0.65, 0.0).unwrap();
    for &t in &[0.0, 0.4, 1.3, 2.9] {
        let (_, f) = trap_potential(0.0, Z0, t, &p).unwrap();
        assert!(f[0].abs() < 1e-14 && f[1].abs() < 1e-14);
    }
}

#[test]
fn static_limit_is_harmonic() {
    let p = TrapParams::new(0.003, 0.0, 0.0).unwrap();
    let (y, z) = (0.3, 1.4);
    let (v, _) = trap_potential(y, z, 0.7, &p).unwrap();
    let vh = 0.5 * (p.a[1] * y * y + p.a[2] * (z - Z0).powi(2));
    assert_eq!(v, vh);
}

#[test]
fn mathieu_reference_point() {
    // ν(0.01, 0.1) from a tight monodromy; √(a + q²/2) = 0.12247
    let nu = mathieu_exponent(0.01, 0.1).unwrap();
    assert!((nu - 0.1225).abs() < 1e-3, "{nu}");
    assert!((mathieu_exponent(0.25, 0.0).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn undriven_trap_is_unstable_radially() {
    let p = TrapParams::new(0.0016, 0.0, 0.0).unwrap();
    let m = linearize(&p).unwrap();
    assert!(m.y.nu.is_none() && m.z.nu.is_none());
    assert!(m.x.nu.is_some());
    assert!(p.lambda().is_none());
    let p = nondimensionalize(&be_trap(0.0, 2.0)).unwrap();
    assert_eq!(p.q5, 0.0);
}

#[test]
fn secular_frequencies_of_the_reference_traps() {
    let t = be_trap(30.0, 2.0);
    let fz = linearize(&nondimensionalize(&t).unwrap()).unwrap().z.omega(t.omega_rf).unwrap() / TAU;
    assert!((fz / 8.4e6 - 1.0).abs() < 0.02, "{fz}");
    let t = be_trap(60.0, 1.41);
    let fz = linearize(&nondimensionalize(&t).unwrap()).unwrap().z.omega(t.omega_rf).unwrap() / TAU;
    assert!((fz / 17.8e6 - 1.0).abs() < 0.02, "{fz}");
}

#[test]
fn saddle_moves_in_with_axial_confinement() {
    let fp = fixed_points(0.001225, 0.0).unwrap();
    assert!((fp.z_s - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(fp.z_u.unwrap() < 1.5753);
    let z0 = fixed_points(0.0, 0.0).unwrap().z_u.unwrap();
    assert!((z0 - (0.75 + 3f64.sqrt()).sqrt()).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rf_term_is_even_in_y(y in -3.0..3.0f64, z in 0.05..4.0f64) {
        let a = five_wire_potential(y, z).unwrap().0;
        let b = five_wire_potential(-y, z).unwrap().0;
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn potential_is_drive_periodic(y in -1.5..1.5f64, z in 0.2..3.0f64, t in 0.0..10.0f64, q5 in 0.0..1.5f64) {
        let p = TrapParams::new(0.002, q5, 0.0).unwrap();
        let (a, _) = trap_potential(y, z, t, &p).unwrap();
        let (b, _) = trap_potential(y, z, t + PI, &p).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn lambda_agrees_with_laboratory_form(u in 1.0..80.0f64, fx in 0.3..4.0f64, w_um in 20.0..200.0f64, mhz in 20.0..200.0f64) {
        let mut t = be_trap(u, fx);
        t.width = w_um * 1e-6;
        t.omega_rf = TAU * mhz * 1e6;
        let p = nondimensionalize(&t).unwrap();
        // λ = m² w⁴ Ω² ω_x² / (2 e² U²) in SI units
        let AxialConfinement::Frequency { omega_x } = t.axial else { unreachable!() };
        let lab = (t.mass * t.width.powi(2) * t.omega_rf * omega_x).powi(2) / (2.0 * (t.charge * u).powi(2));
        prop_assert!((p.lambda().unwrap() / lab - 1.0).abs() < 1e-10);
    }

    #[test]
    fn round_trip_to_laboratory_units(ax in 1e-4..0.05f64, q5 in 0.01..1.4f64, a5 in -0.05..0.05f64) {
        let p = TrapParams::new(ax, q5, a5).unwrap();
        let t = to_physical(&p, be9_ion_mass(), ELEMENTARY_CHARGE, 50e-6, TAU * 100e6).unwrap();
        let b = nondimensionalize(&t).unwrap();
        prop_assert!((b.q5 - q5).abs() <= 1e-12 * q5);
        prop_assert!((b.a[0] - ax).abs() <= 1e-12 * ax);
        prop_assert!((b.a5 - a5).abs() <= 1e-12 * a5.abs().max(1e-300));
    }

    #[test]
    fn free_exponent_is_square_root(a in 0.001..0.99f64) {
        prop_assert!((mathieu_exponent(a, 0.0).unwrap() - a.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn exponent_is_even_in_q(a in -0.05..0.1f64, q in 0.0..0.6f64) {
        match (mathieu_exponent(a, q), mathieu_exponent(a, -q)) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-9),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "stability differs between ±q"),
        }
    }

    #[test]
    fn fixed_points_are_stationary_and_idempotent(lambda in 0.0..0.01f64, lambda_b in 0.0..0.2f64) {
        let a = fixed_points(lambda, lambda_b).unwrap();
        prop_assert_eq!(a, fixed_points(lambda, lambda_b).unwrap());
        prop_assert!(axis_potential(a.z_s, lambda, lambda_b).1.abs() < 1e-12);
        if lambda_b == 0.0 {
            prop_assert!((a.z_s - 3f64.sqrt() / 2.0).abs() < 1e-12);
        }
        if let Some(zu) = a.z_u {
            prop_assert!(zu > a.z_s);
            prop_assert!(axis_potential(zu, lambda, lambda_b).1.abs() < 1e-11);
        }
    }
}
