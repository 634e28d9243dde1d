//! Planar helpers for section curves.

/// Mean and RMS spread of a point set along each axis.
pub fn centroid_and_spread(points: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let n = points.len().max(1) as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sx = (points.iter().map(|p| (p.0 - cx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (points.iter().map(|p| (p.1 - cy).powi(2)).sum::<f64>() / n).sqrt();
    ((cx, cy), (sx, sy))
}

/// Polar coordinates about `center` after dividing by `scale` per axis.
pub fn polar(points: &[(f64, f64)], center: (f64, f64), scale: (f64, f64)) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|&(x, y)| {
            let u = (x - center.0) / scale.0;
            let v = (y - center.1) / scale.1;
            (u.hypot(v), v.atan2(u))
        })
        .collect()
}

/// Points ordered by polar angle about `center`.
pub fn sort_by_angle(points: &[(f64, f64)], center: (f64, f64)) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, (f64, f64))> =
        points.iter().map(|&p| ((p.1 - center.1).atan2(p.0 - center.0), p)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.into_iter().map(|x| x.1).collect()
}

/// Signed shoelace area of a closed polygon.
pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s
}

/// Area enclosed by an invariant curve sampled in arbitrary order, for
/// curves star-shaped about `center`.
///
/// Integrates ½∮r² dθ in RMS-normalized polar coordinates with r² linear
/// in θ between samples, so sparse near-resonant samplings lose far less
/// than the inscribed polygon.
pub fn curve_area(points: &[(f64, f64)], center: (f64, f64)) -> f64 {
    let (_, scale) = centroid_and_spread(points);
    if points.len() < 3 || !(scale.0 > 0.0 && scale.1 > 0.0) {
        return 0.0;
    }
    let mut pol = polar(points, center, scale);
    pol.sort_by(|a, b| a.1.total_cmp(&b.1));
    let n = pol.len();
    let mut s = 0.0;
    for i in 0..n {
        let (r0, t0) = pol[i];
        let (r1, mut t1) = pol[(i + 1) % n];
        if i + 1 == n {
            t1 += std::f64::consts::TAU;
        }
        s += 0.25 * (t1 - t0) * (r0 * r0 + r1 * r1);
    }
    s * scale.0 * scale.1
}

/// Even–odd rule point-in-polygon test.
pub fn point_in_polygon(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ellipse_area_from_scattered_samples() {
        let pts: Vec<(f64, f64)> = (0..2000)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 * 0.618_033_988_75).fract();
                (1.0 + 0.3 * th.cos(), 0.02 * th.sin())
            })
            .collect();
        let a = curve_area(&pts, (1.0, 0.0));
        assert!((a / (PI * 0.3 * 0.02) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn clustered_samples_keep_the_area() {
        // twelve tight clusters, as on a torus near 1:12
        let pts: Vec<(f64, f64)> = (0..1200)
            .map(|k| {
                let th = 2.0 * PI * ((k % 12) as f64 / 12.0 + 1e-4 * (k / 12) as f64);
                (1.0 + 0.3 * th.cos(), 0.02 * th.sin())
            })
            .collect();
        let a = curve_area(&pts, (1.0, 0.0));
        assert!((a / (PI * 0.3 * 0.02) - 1.0).abs() < 1e-3, "{a}");
    }

    #[test]
    fn square_membership() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!(point_in_polygon((0.5, 0.5), &sq));
        assert!(!point_in_polygon((1.5, 0.5), &sq));
        assert!((polygon_area(&sq) - 1.0).abs() < 1e-15);
    }
}
