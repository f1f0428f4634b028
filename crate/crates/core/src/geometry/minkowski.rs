use super::{ConvexPolygon, Vec2};

/// `a·A + b·B` by merging the two edge sequences in angular order.
///
/// Both scalars must be nonnegative with `a + b > 0`; a zero coefficient
/// returns the other body scaled.
pub fn minkowski_combine(a: f64, pa: &ConvexPolygon, b: f64, pb: &ConvexPolygon) -> ConvexPolygon {
    assert!(a >= 0.0 && b >= 0.0 && a + b > 0.0, "coefficients must be nonnegative with positive sum");
    if b == 0.0 {
        return pa.scaled(a);
    }
    if a == 0.0 {
        return pb.scaled(b);
    }
    let va: Vec<Vec2> = rotate_to_lowest(pa.vertices()).into_iter().map(|v| a * v).collect();
    let vb: Vec<Vec2> = rotate_to_lowest(pb.vertices()).into_iter().map(|v| b * v).collect();
    let (na, nb) = (va.len(), vb.len());
    let mut out = Vec::with_capacity(na + nb);
    let (mut i, mut j) = (0, 0);
    // Edge angles from the lowest vertex are monotone in [0, 2π); compare by cross product.
    while i < na || j < nb {
        out.push(va[i % na] + vb[j % nb]);
        let ea = va[(i + 1) % na] - va[i % na];
        let eb = vb[(j + 1) % nb] - vb[j % nb];
        let turn = if i >= na {
            -1.0
        } else if j >= nb {
            1.0
        } else {
            ea.cross(eb)
        };
        if turn > 0.0 {
            i += 1;
        } else if turn < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    ConvexPolygon::from_vertices(&out).expect("Minkowski sum of convex polygons is convex")
}

/// Starts the vertex loop at the lowest (then leftmost) vertex.
fn rotate_to_lowest(v: &[Vec2]) -> Vec<Vec2> {
    let start = (0..v.len())
        .min_by(|&p, &q| v[p].y.total_cmp(&v[q].y).then(v[p].x.total_cmp(&v[q].x)))
        .unwrap_or(0);
    v[start..].iter().chain(&v[..start]).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hausdorff_distance, UnitVector};
    use std::f64::consts::PI;

    fn h_identity(a: f64, pa: &ConvexPolygon, b: f64, pb: &ConvexPolygon) -> f64 {
        let s = minkowski_combine(a, pa, b, pb);
        (0..64)
            .map(|k| {
                let u = UnitVector::from_angle(2.0 * PI * k as f64 / 64.0 + 0.01);
                (s.support(u) - (a * pa.support(u) + b * pb.support(u))).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn square_plus_square_doubles() {
        let s = ConvexPolygon::square(1.0);
        let r = minkowski_combine(1.0, &s, 1.0, &s);
        assert_eq!(r.len(), 4);
        assert!(hausdorff_distance(&r, &ConvexPolygon::square(2.0)).distance < 1e-14);
    }

    #[test]
    fn half_plus_half_is_identity() {
        let p = ConvexPolygon::random(4, 6);
        let r = minkowski_combine(0.5, &p, 0.5, &p);
        assert!(hausdorff_distance(&r, &p).distance < 1e-14);
        assert_eq!(r.len(), p.len());
    }

    #[test]
    fn square_plus_rotated_square_is_octagon() {
        let s = ConvexPolygon::square(1.0);
        let d = ConvexPolygon::regular(4, 1.0, PI / 4.0);
        let r = minkowski_combine(1.0, &s, 1.0, &d);
        assert_eq!(r.len(), 8);
        assert!(h_identity(1.0, &s, 1.0, &d) < 1e-10);
        // Both squares reach √2 along the other's normals: a regular octagon of inradius 1 + √2.
        for f in r.facets() {
            assert!((f.support - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn support_is_linear_on_random_pairs() {
        for seed in 0..25 {
            let pa = ConvexPolygon::random(seed, 5);
            let pb = ConvexPolygon::random(seed + 50, 8).translated(Vec2::new(0.2, -0.1));
            assert!(h_identity(0.3, &pa, 1.7, &pb) < 1e-10);
        }
    }
}
