//! Closed-form oracles shared by the integration tests. Nothing here calls
//! into the FEM.
#![allow(dead_code)]

use std::f64::consts::PI;

use torsmink::geometry::{ConvexPolygon, DiscreteMeasure};

/// Rigidity of `[−1, 1]²` by separation of variables.
pub fn square_rigidity_series() -> f64 {
    let tail: f64 = (0..60)
        .map(|k| {
            let j = (2 * k + 1) as f64;
            (j * PI / 2.0).tanh() / j.powi(5)
        })
        .sum();
    16.0 / 3.0 - 1024.0 / PI.powi(5) * tail
}

/// Torsion function of `[−1, 1]²` at the center.
pub fn square_center_series() -> f64 {
    let tail: f64 = (0..60)
        .map(|k| {
            let j = (2 * k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            32.0 * sign / (j.powi(3) * PI.powi(3) * (j * PI / 2.0).cosh())
        })
        .sum();
    1.0 - tail
}

/// `T(B_R) = πR⁴/2`.
pub fn disk_rigidity(r: f64) -> f64 {
    PI * r.powi(4) / 2.0
}

/// Inradius of the normalized solution for `count` equal atoms of weight `w`
/// at regular angles: symmetry gives `μ_i/T = 4/(count·r)` and the equation
/// `μ_i/T = w r^{p−1}` then forces `r = (4/(count·w))^{1/p}`.
pub fn regular_inradius(count: usize, w: f64, p: f64) -> f64 {
    (4.0 / (count as f64 * w)).powf(1.0 / p)
}

/// Inradius of the original-problem square for the unit axis measure:
/// `μ_i(P_r) = r³ T₁` and `μ_i = w r^{p−1}` give `r^{4−p} = w/T₁`,
/// with `T₁` from the series.
pub fn axis_original_inradius(p: f64) -> f64 {
    (1.0 / square_rigidity_series()).powf(1.0 / (4.0 - p))
}

pub fn axes() -> DiscreteMeasure {
    DiscreteMeasure::regular(4, 1.0, 0.0).unwrap()
}

pub fn hexagon() -> ConvexPolygon {
    ConvexPolygon::regular(6, 1.0, 0.0)
}

/// Inradius of a polygon whose facets should all be tangent to one circle.
pub fn mean_support(p: &ConvexPolygon) -> f64 {
    p.facets().iter().map(|f| f.support).sum::<f64>() / p.len() as f64
}

/// The five-atom measure without symmetry used for uniqueness tests.
pub fn lopsided_measure() -> DiscreteMeasure {
    DiscreteMeasure::from_angles(&[0.0, 1.3, 2.2, 3.5, 4.9], &[1.0, 2.0, 0.7, 1.5, 1.2]).unwrap()
}
