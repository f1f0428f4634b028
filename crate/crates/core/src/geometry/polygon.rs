use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{wulff_shape, SupportVector, UnitVector, Vec2, NORMAL_MERGE_TOL};
use crate::error::{Error, Result};

/// Relative tolerance below which three consecutive vertices count as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

/// One edge of a polygon: outward normal, support number `h = x·ν` on the
/// edge, and edge length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: UnitVector,
    pub support: f64,
    pub length: f64,
}

/// A convex polygon with strictly convex CCW vertices. Facet `k` is the edge
/// from vertex `k` to vertex `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
    facets: Vec<Facet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolygonMetrics {
    pub area: f64,
    pub diameter: f64,
    /// Largest vertex norm, i.e. `max_u h(P, u)`.
    pub circumradius_from_origin: f64,
}

impl ConvexPolygon {
    /// Accepts CW or CCW input; drops repeated and collinear vertices.
    pub fn from_vertices(points: &[Vec2]) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex".into()));
        }
        let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len());
        for &p in points {
            if pts.last().is_none_or(|&q| (p - q).norm() > 1e-14 * scale) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= 1e-14 * scale {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::DegenerateGeometry(format!("{} distinct vertices", pts.len())));
        }
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        let pts = drop_collinear(pts);
        if pts.len() < 3 {
            return Err(Error::DegenerateGeometry("all vertices collinear".into()));
        }
        let n = pts.len();
        for k in 0..n {
            let a = pts[(k + n - 1) % n];
            let b = pts[k];
            let c = pts[(k + 1) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::InvalidInput(format!("vertex {k} breaks convexity")));
            }
        }
        // A strictly convex vertex loop can still wind twice around.
        let turning: f64 = (0..n)
            .map(|k| {
                let e0 = pts[(k + 1) % n] - pts[k];
                let e1 = pts[(k + 2) % n] - pts[(k + 1) % n];
                e0.cross(e1).atan2(e0.dot(e1))
            })
            .sum();
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidInput("vertex loop is not simple".into()));
        }
        let normals = (0..n)
            .map(|k| UnitVector::new((pts[(k + 1) % n] - pts[k]).perp_cw()).expect("nonzero edge"))
            .collect::<Vec<_>>();
        Ok(Self::from_parts(pts, normals))
    }

    /// Assembles facet records; `normals[k]` is the exact outward normal of
    /// the edge starting at `vertices[k]`.
    pub(crate) fn from_parts(vertices: Vec<Vec2>, normals: Vec<UnitVector>) -> Self {
        let n = vertices.len();
        let facets = (0..n)
            .map(|k| {
                let a = vertices[k];
                let b = vertices[(k + 1) % n];
                let normal = normals[k];
                Facet {
                    normal,
                    support: 0.5 * (normal.dot(a) + normal.dot(b)),
                    length: (b - a).norm(),
                }
            })
            .collect();
        ConvexPolygon { vertices, facets }
    }

    /// Axis-aligned square `[-half, half]²`.
    pub fn square(half: f64) -> Self {
        Self::regular(4, half, 0.0)
    }

    /// Regular `count`-gon with the given inradius about the origin, first
    /// facet normal at angle `phase`.
    pub fn regular(count: usize, inradius: f64, phase: f64) -> Self {
        let normals: Vec<UnitVector> = (0..count)
            .map(|k| UnitVector::from_angle(phase + 2.0 * PI * k as f64 / count as f64))
            .collect();
        wulff_shape(&normals, &SupportVector::new(vec![inradius; count]).expect("positive"))
            .expect("regular polygon is bounded with nonempty interior")
    }

    /// Seeded random polygon with `count` candidate facets: angular gaps
    /// between consecutive normals vary by up to a factor 3 (never reaching
    /// 0.9π) and supports lie in `[0.5, 1.5]`. The origin is interior.
    pub fn random(seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = count.max(4);
        loop {
            let gaps: Vec<f64> = (0..count).map(|_| rng.gen_range(0.5..1.5)).collect();
            let total: f64 = gaps.iter().sum();
            let phase = rng.gen_range(0.0..2.0 * PI);
            let y: Vec<f64> = (0..count).map(|_| rng.gen_range(0.5..1.5)).collect();
            if gaps.iter().any(|g| 2.0 * PI * g / total >= 0.9 * PI) {
                continue;
            }
            let normals: Vec<UnitVector> = gaps
                .iter()
                .scan(phase, |angle, g| {
                    let current = *angle;
                    *angle += 2.0 * PI * g / total;
                    Some(UnitVector::from_angle(current))
                })
                .collect();
            if let Ok(p) = wulff_shape(&normals, &SupportVector::new(y).expect("positive")) {
                return p;
            }
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn support(&self, u: UnitVector) -> f64 {
        support_function(self, u)
    }

    /// Index of the facet whose outward normal is within the merge tolerance of `normal`.
    pub fn facet_index(&self, normal: UnitVector) -> Option<usize> {
        self.facets
            .iter()
            .position(|f| f.normal.angular_distance(normal) <= NORMAL_MERGE_TOL)
    }

    /// `m·P` about the origin (`m > 0`).
    pub fn scaled(&self, m: f64) -> Self {
        let vertices = self.vertices.iter().map(|&v| m * v).collect();
        let normals = self.facets.iter().map(|f| f.normal).collect();
        Self::from_parts(vertices, normals)
    }

    pub fn translated(&self, t: Vec2) -> Self {
        let vertices = self.vertices.iter().map(|&v| v + t).collect();
        let normals = self.facets.iter().map(|f| f.normal).collect();
        Self::from_parts(vertices, normals)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    pub fn centroid(&self) -> Vec2 {
        let v = &self.vertices;
        let n = v.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for k in 0..n {
            let p = v[k];
            let q = v[(k + 1) % n];
            let c = p.cross(q);
            a2 += c;
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Vec2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    /// Smallest facet support number; positive iff the origin is interior.
    pub fn min_support(&self) -> f64 {
        self.facets.iter().map(|f| f.support).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(p) <= f.support + tol)
    }
}

pub fn support_function(p: &ConvexPolygon, u: UnitVector) -> f64 {
    p.vertices
        .iter()
        .map(|&v| u.dot(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn polygon_metrics(p: &ConvexPolygon) -> PolygonMetrics {
    PolygonMetrics {
        area: p.area(),
        diameter: p.diameter(),
        circumradius_from_origin: p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}

/// On-disk form: `{"vertices": [[x, y], ...]}`.
#[derive(Serialize, Deserialize)]
struct PolygonFile {
    vertices: Vec<[f64; 2]>,
}

impl Serialize for ConvexPolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonFile {
            vertices: self.vertices.iter().map(|v| [v.x, v.y]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = PolygonFile::deserialize(d)?;
        let pts: Vec<Vec2> = file.vertices.iter().map(|&[x, y]| Vec2::new(x, y)).collect();
        ConvexPolygon::from_vertices(&pts).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|k| v[k].cross(v[(k + 1) % n])).sum::<f64>()
}

fn drop_collinear(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let flat = (0..n).find(|&k| {
            let a = pts[(k + n - 1) % n];
            let b = pts[k];
            let c = pts[(k + 1) % n];
            let (e0, e1) = (b - a, c - b);
            e0.cross(e1).abs() <= COLLINEAR_TOL * e0.norm() * e1.norm() && e0.dot(e1) > 0.0
        });
        match flat {
            Some(k) => {
                pts.remove(k);
            }
            None => return pts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> ConvexPolygon {
        ConvexPolygon::square(1.0)
    }

    #[test]
    fn square_support_values() {
        let p = sq();
        assert!((p.support(UnitVector::e1()) - 1.0).abs() < 1e-14);
        let diag = UnitVector::new(Vec2::new(1.0, 1.0)).unwrap();
        assert!((p.support(diag) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn translation_rule() {
        let p = ConvexPolygon::random(3, 6);
        let t = 0.7;
        let q = p.translated(Vec2::new(t, 0.0));
        for k in 0..32 {
            let u = UnitVector::from_angle(k as f64 * 0.2);
            assert!((q.support(u) - (p.support(u) + t * u.x())).abs() < 1e-13);
        }
    }

    #[test]
    fn metrics_of_square() {
        let m = polygon_metrics(&sq());
        assert!((m.area - 4.0).abs() < 1e-14);
        assert!((m.diameter - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((m.circumradius_from_origin - 2f64.sqrt()).abs() < 1e-14);
        let m2 = polygon_metrics(&sq().scaled(2.0));
        assert!((m2.area - 16.0).abs() < 1e-13);
        assert!((m2.diameter - 4.0 * 2f64.sqrt()).abs() < 1e-13);
        assert!((m2.circumradius_from_origin - 2.0 * 2f64.sqrt()).abs() < 1e-13);
        let m3 = polygon_metrics(&sq().translated(Vec2::new(1.0, 0.0)));
        assert!((m3.area - 4.0).abs() < 1e-14 && (m3.diameter - m.diameter).abs() < 1e-14);
    }

    #[test]
    fn from_vertices_normalizes_orientation_and_collinear_points() {
        let cw = [
            Vec2::new(-1.0, -1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, -1.0),
        ];
        let p = ConvexPolygon::from_vertices(&cw).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.area() > 0.0);
        for f in p.facets() {
            assert!((f.support - 1.0).abs() < 1e-14);
            assert!((f.length - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nonconvex_rejected() {
        let dart = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, -1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 1.0),
        ];
        assert!(ConvexPolygon::from_vertices(&dart).is_err());
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(ConvexPolygon::from_vertices(&line).is_err());
    }

    #[test]
    fn random_polygons_contain_origin() {
        for seed in 0..20 {
            let p = ConvexPolygon::random(seed, 5 + (seed as usize % 4));
            assert!(p.min_support() > 0.0);
            assert!(p.area() > 0.0);
            assert_eq!(p, ConvexPolygon::random(seed, 5 + (seed as usize % 4)));
        }
    }

    #[test]
    fn facet_endpoints_on_support_lines() {
        let p = ConvexPolygon::random(11, 7);
        let d = p.diameter();
        let n = p.len();
        for (k, f) in p.facets().iter().enumerate() {
            for v in [p.vertices()[k], p.vertices()[(k + 1) % n]] {
                assert!((f.normal.dot(v) - f.support).abs() <= 1e-10 * d);
            }
        }
    }
}
