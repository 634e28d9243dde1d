//! Small numerical kernels shared across modules: Gauss–Kronrod quadrature,
//! safeguarded root finding, compensated sums, Birkhoff weights and
//! continued fractions.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel. Returns (Kronrod estimate, |Kronrod - Gauss|).
pub fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b].
///
/// Panels are bisected until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)` or `max_panels` is exhausted.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_PANELS: usize = 4000;
    let (k0, e0) = kronrod15(&mut f, a, b);
    let mut panels = vec![(a, b, k0, e0)];
    loop {
        let (total, err) = panels
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.2, e + p.3));
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge (estimate {total}, error {err})"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (kl, el) = kronrod15(&mut f, pa, mid);
        let (kr, er) = kronrod15(&mut f, mid, pb);
        panels.push((pa, mid, kl, el));
        panels.push((mid, pb, kr, er));
    }
}

/// Composite fixed-order rule: `panels` equal Kronrod panels on [a, b].
pub fn integrate_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut sum = KahanSum::default();
    for i in 0..n {
        let lo = a + h * i as f64;
        sum.add(kronrod15(&mut f, lo, lo + h).0);
    }
    sum.value()
}

/// Root of `f` in a sign-changing bracket [a, b].
///
/// Newton steps from `df` are taken when they stay inside the bracket,
/// otherwise the bracket is bisected. Stops when |b - a| < `tol`.
pub fn bracketed_newton<F, D>(f: F, df: D, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!("no sign change on [{a}, {b}]")));
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a).abs() < tol {
            return Ok(0.5 * (a + b));
        }
        let d = df(x);
        let newton = x - fx / d;
        let lo = a.min(b);
        let hi = a.max(b);
        x = if d != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            let step = (newton - x).abs();
            if step < 0.25 * tol {
                return Ok(newton);
            }
            newton
        } else {
            0.5 * (a + b)
        };
    }
    Err(Error::Numerical("root refinement did not converge".into()))
}

/// Plain bisection on a predicate that is `true` at `a` and `false` at `b`.
/// Returns the final (true-side, false-side) pair.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(
    mut pred: P,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new(init: f64) -> Self {
        Self { sum: init, comp: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Recursive pairwise sum; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Weighted Birkhoff average of `values` with the smooth bump
/// w(s) = exp(-1 / (s (1 - s))), s in (0, 1).
///
/// For quasi-periodic sequences this converges much faster than the
/// arithmetic mean. Returns `None` for fewer than three values.
pub fn birkhoff_average(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let mut num = KahanSum::default();
    let mut den = KahanSum::default();
    for (k, v) in values.iter().enumerate() {
        let s = (k as f64 + 1.0) / (n as f64 + 1.0);
        let w = (-1.0 / (s * (1.0 - s))).exp();
        num.add(w * v);
        den.add(w);
    }
    Some(num.value() / den.value())
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0_i64, 1_i64);
    let (mut k0, mut k1) = (1_u64, 0_u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if !a.is_finite() || a.abs() > 1e12 {
            break;
        }
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = (ai as i128 * k1 as i128 + k0 as i128) as u64;
        if k2 > max_den {
            break;
        }
        out.push((h2, k2));
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let (k, _) = kronrod15(&mut |x: f64| x.powi(20), -1.0, 1.0);
        assert!((k - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn newton_finds_cos_root() {
        let r = bracketed_newton(|x: f64| x.cos() - x, |x: f64| -x.sin() - 1.0, 0.0, 1.0, 1e-14)
            .unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-13);
    }

    #[test]
    fn convergents_of_golden_ratio_are_fibonacci() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = convergents(phi, 100);
        assert_eq!(c.last().copied(), Some((144, 89)));
    }

    #[test]
    fn birkhoff_average_of_rotation() {
        let rho = 0.5 * (5f64.sqrt() - 1.0);
        let v: Vec<f64> = (0..400).map(|k| (2.0 * std::f64::consts::PI * rho * k as f64).cos()).collect();
        assert!(birkhoff_average(&v).unwrap().abs() < 1e-10);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-10)).abs() < 1e-15);
    }
}
