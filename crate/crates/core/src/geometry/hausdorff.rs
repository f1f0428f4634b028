use std::f64::consts::PI;

use serde::Serialize;

use super::{wrap_angle, ConvexPolygon, UnitVector, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffResult {
    pub distance: f64,
    pub witness_direction: UnitVector,
}

/// Exact `max_θ |h_A(θ) − h_B(θ)|`.
///
/// Between consecutive facet-normal angles of either polygon both support
/// functions are attained at fixed vertices `a`, `b`, so the difference is
/// `(a − b)·u(θ)` and its extremum on the arc is closed form.
pub fn hausdorff_distance(a: &ConvexPolygon, b: &ConvexPolygon) -> HausdorffResult {
    let mut breaks: Vec<f64> = a
        .facets()
        .iter()
        .chain(b.facets())
        .map(|f| f.normal.angle())
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let mut best = (0.0_f64, breaks[0]);
    let mut consider = |theta: f64, d: Vec2| {
        let u = UnitVector::from_angle(theta);
        let v = u.dot(d).abs();
        if v > best.0 {
            best = (v, theta);
        }
    };
    let n = breaks.len();
    for k in 0..n {
        let lo = breaks[k];
        let hi = if k + 1 < n { breaks[k + 1] } else { breaks[0] + 2.0 * PI };
        let mid = UnitVector::from_angle(0.5 * (lo + hi));
        let d = argmax_vertex(a, mid) - argmax_vertex(b, mid);
        consider(lo, d);
        consider(hi, d);
        if d.norm() > 0.0 {
            let phi = d.y.atan2(d.x);
            for cand in [phi, phi + PI] {
                // Shift the critical angle into [lo, lo + 2π).
                let t = lo + wrap_angle(cand - lo);
                if t <= hi {
                    consider(t, d);
                }
            }
        }
    }
    HausdorffResult {
        distance: best.0,
        witness_direction: UnitVector::from_angle(best.1),
    }
}

fn argmax_vertex(p: &ConvexPolygon, u: UnitVector) -> Vec2 {
    *p.vertices()
        .iter()
        .max_by(|x, y| u.dot(**x).total_cmp(&u.dot(**y)))
        .expect("polygon has vertices")
}
