use std::f64::consts::PI;

use serde::Serialize;

use super::measure::max_angular_gap;
use super::{ConvexPolygon, UnitVector, Vec2};
use crate::error::{Error, Result};

/// Support numbers `y_i`, aligned index-for-index with a list of normals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportVector(Vec<f64>);

impl SupportVector {
    /// Entries must be finite and nonnegative.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "support value {k} = {} is not finite and nonnegative",
                values[k]
            )));
        }
        Ok(SupportVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `P(y) = ⋂_i {x : x·ξ_i ≤ y_i}`.
///
/// Halfplanes are clipped in angular order starting from a box that is known
/// to contain the result; redundant halfplanes leave no facet. Vertices are
/// recomputed as exact intersections of their two supporting lines.
pub fn wulff_shape(normals: &[UnitVector], y: &SupportVector) -> Result<ConvexPolygon> {
    wulff_from_values(normals, y.values())
}

/// `(h(P, ξ_1), …, h(P, ξ_m))`. Entries are nonnegative whenever `P`
/// contains the origin; `wulff_shape` of the result reproduces `P`.
pub fn clean_support_vector(p: &ConvexPolygon, normals: &[UnitVector]) -> SupportVector {
    SupportVector(normals.iter().map(|&u| p.support(u)).collect())
}

pub(crate) fn wulff_from_values(normals: &[UnitVector], y: &[f64]) -> Result<ConvexPolygon> {
    if normals.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} normals but {} support values",
            normals.len(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite support value".into()));
    }
    let gap = max_angular_gap(normals);
    if gap >= PI - 1e-12 {
        return Err(Error::Unbounded);
    }
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::EmptyInterior);
    }
    // Every point of P(y) has norm at most max|y| / cos(gap / 2).
    let half = 2.0 * scale / (0.5 * gap).cos() + scale;

    let mut order: Vec<usize> = (0..normals.len()).collect();
    order.sort_by(|&a, &b| normals[a].angle().total_cmp(&normals[b].angle()));

    // (vertex, label of the edge leaving it); `None` marks box edges.
    let mut poly: Vec<(Vec2, Option<usize>)> = vec![
        (Vec2::new(-half, -half), None),
        (Vec2::new(half, -half), None),
        (Vec2::new(half, half), None),
        (Vec2::new(-half, half), None),
    ];
    for &i in &order {
        poly = clip(&poly, normals[i], y[i], i);
        if poly.len() < 3 {
            return Err(Error::EmptyInterior);
        }
    }
    if poly.iter().any(|(_, l)| l.is_none()) {
        return Err(Error::Unbounded);
    }

    let labels = merge_degenerate(poly, scale);
    if labels.len() < 3 {
        return Err(Error::EmptyInterior);
    }
    let n = labels.len();
    let vertices: Vec<Vec2> = (0..n)
        .map(|k| {
            let a = labels[(k + n - 1) % n];
            let b = labels[k];
            line_intersection(normals[a], y[a], normals[b], y[b])
        })
        .collect();
    let area = super::polygon::signed_area(&vertices);
    if !(area > 1e-14 * scale * scale) {
        return Err(Error::EmptyInterior);
    }
    Ok(ConvexPolygon::from_parts(
        vertices,
        labels.iter().map(|&l| normals[l]).collect(),
    ))
}

fn clip(
    poly: &[(Vec2, Option<usize>)],
    normal: UnitVector,
    offset: f64,
    label: usize,
) -> Vec<(Vec2, Option<usize>)> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (p, lp) = poly[k];
        let (q, _) = poly[(k + 1) % n];
        let dp = normal.dot(p) - offset;
        let dq = normal.dot(q) - offset;
        match (dp <= 0.0, dq <= 0.0) {
            (true, true) => out.push((p, lp)),
            (true, false) => {
                out.push((p, lp));
                let t = dp / (dp - dq);
                out.push((p + t * (q - p), Some(label)));
            }
            (false, true) => {
                let t = dp / (dp - dq);
                out.push((p + t * (q - p), lp));
            }
            (false, false) => {}
        }
    }
    out
}

/// Drops edges of (near) zero length and returns the surviving edge labels in
/// CCW order.
fn merge_degenerate(mut poly: Vec<(Vec2, Option<usize>)>, scale: f64) -> Vec<usize> {
    let tol = 1e-11 * scale;
    loop {
        let n = poly.len();
        if n < 3 {
            break;
        }
        let short = (0..n).find(|&k| (poly[(k + 1) % n].0 - poly[k].0).norm() <= tol);
        match short {
            Some(k) => {
                poly.remove(k);
            }
            None => break,
        }
    }
    // Consecutive edges carrying the same label are one facet.
    let mut labels: Vec<usize> = poly.iter().map(|(_, l)| l.expect("bounded")).collect();
    labels.dedup();
    while labels.len() > 1 && labels[0] == labels[labels.len() - 1] {
        labels.pop();
    }
    labels
}

fn line_intersection(na: UnitVector, ya: f64, nb: UnitVector, yb: f64) -> Vec2 {
    let det = na.x() * nb.y() - na.y() * nb.x();
    Vec2::new(
        (ya * nb.y() - yb * na.y()) / det,
        (na.x() * yb - nb.x() * ya) / det,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hausdorff_distance, DiscreteMeasure};

    fn axes() -> Vec<UnitVector> {
        DiscreteMeasure::regular(4, 1.0, 0.0).unwrap().normals().to_vec()
    }

    fn sv(v: &[f64]) -> SupportVector {
        SupportVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_square() {
        let p = wulff_shape(&axes(), &sv(&[1.0; 4])).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p.area() - 4.0).abs() < 1e-13);
        assert!(hausdorff_distance(&p, &ConvexPolygon::square(1.0)).distance < 1e-13);
    }

    #[test]
    fn redundant_halfplane_has_no_facet() {
        let mut n = axes();
        n.push(UnitVector::new(Vec2::new(1.0, 1.0)).unwrap());
        let p = wulff_shape(&n, &sv(&[1.0, 1.0, 1.0, 1.0, 2.0])).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.facet_index(n[4]).is_none());
        assert!((p.area() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn origin_on_boundary_is_allowed() {
        let p = wulff_shape(&axes(), &sv(&[0.0, 1.0, 1.0, 1.0])).unwrap();
        assert!((p.area() - 2.0).abs() < 1e-13);
        assert!(p.min_support().abs() < 1e-15);
    }

    #[test]
    fn slab_is_empty_and_half_circle_unbounded() {
        assert!(matches!(
            wulff_shape(&axes(), &sv(&[0.0, 1.0, 0.0, 1.0])),
            Err(Error::EmptyInterior)
        ));
        let n = [UnitVector::e1(), UnitVector::e2(), UnitVector::from_angle(PI)];
        assert!(matches!(wulff_shape(&n, &sv(&[1.0; 3])), Err(Error::Unbounded)));
    }

    #[test]
    fn supports_never_exceed_y() {
        let m = DiscreteMeasure::regular(9, 1.0, 0.1).unwrap();
        let y: Vec<f64> = (0..9).map(|k| 0.4 + 0.3 * ((k * 7) % 5) as f64).collect();
        let p = wulff_shape(m.normals(), &sv(&y)).unwrap();
        for (u, yi) in m.normals().iter().zip(&y) {
            assert!(p.support(*u) <= yi + 1e-10);
        }
    }

    #[test]
    fn round_trip_square_hexagon_random() {
        let hex = ConvexPolygon::regular(6, 0.8, 0.3);
        let rnd = ConvexPolygon::random(5, 7);
        for p in [ConvexPolygon::square(1.0), hex, rnd] {
            let mut normals: Vec<UnitVector> = p.facets().iter().map(|f| f.normal).collect();
            normals.push(UnitVector::from_angle(0.123));
            let y = clean_support_vector(&p, &normals);
            let q = wulff_shape(&normals, &y).unwrap();
            assert!(hausdorff_distance(&p, &q).distance < 1e-10);
        }
    }
}
