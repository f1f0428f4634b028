use std::collections::HashMap;

use serde::Serialize;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Vec2};

/// Target minimum angle handed to the refinement; the guaranteed floor is 20°.
const REFINE_ANGLE_DEG: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryEdge {
    /// Oriented so the mesh interior lies to the left (CCW traversal).
    pub nodes: [usize; 2],
    /// Index into the source polygon's facet list.
    pub facet: usize,
}

/// Triangulation of a convex polygon. Boundary edges are listed as one
/// closed CCW loop.
#[derive(Debug, Clone, Serialize)]
pub struct TriMesh {
    pub nodes: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub target_h: f64,
}

impl TriMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * (pb - pa).cross(pc - pa)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            mask[e.nodes[0]] = true;
            mask[e.nodes[1]] = true;
        }
        mask
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let p = [self.nodes[a], self.nodes[b], self.nodes[c]];
                (0..3)
                    .map(|k| {
                        let u = p[(k + 1) % 3] - p[k];
                        let v = p[(k + 2) % 3] - p[k];
                        u.cross(v).abs().atan2(u.dot(v)).to_degrees()
                    })
                    .fold(180.0, f64::min)
            })
            .fold(180.0, f64::min)
    }

    pub fn max_boundary_edge(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| (self.nodes[e.nodes[1]] - self.nodes[e.nodes[0]]).norm())
            .fold(0.0, f64::max)
    }
}

/// Meshes `p` with boundary edges no longer than `target_h` and a
/// Delaunay-refined interior of comparable element size.
pub fn triangulate(p: &ConvexPolygon, target_h: f64) -> Result<TriMesh> {
    let area = p.area();
    if !(area >= 1e-12) {
        return Err(Error::DegenerateGeometry(format!("polygon area {area:e}")));
    }
    let diam = p.diameter();
    if !(target_h > 0.0 && target_h <= diam) {
        return Err(Error::InvalidInput(format!(
            "mesh size {target_h} outside (0, diam = {diam}]"
        )));
    }

    let verts = p.vertices();
    let nv = verts.len();
    let mut points: Vec<Point2<f64>> = Vec::new();
    for k in 0..nv {
        let (a, b) = (verts[k], verts[(k + 1) % nv]);
        let segs = ((b - a).norm() / target_h).ceil().max(1.0) as usize;
        for j in 0..segs {
            let q = a + (j as f64 / segs as f64) * (b - a);
            points.push(Point2::new(q.x, q.y));
        }
    }
    let nb = points.len();
    let edges: Vec<[usize; 2]> = (0..nb).map(|k| [k, (k + 1) % nb]).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(points, edges)
            .map_err(|e| Error::DegenerateGeometry(format!("boundary insertion failed: {e:?}")))?;

    let equilateral = 3f64.sqrt() / 4.0 * target_h * target_h;
    let budget = (8.0 * area / equilateral) as usize + 10 * nb + 1000;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
            .with_max_allowed_area(equilateral)
            .with_max_additional_vertices(budget),
    );
    if !result.refinement_complete {
        return Err(Error::DegenerateGeometry("mesh refinement ran out of vertices".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let nodes: Vec<Vec2> = cdt
        .vertices()
        .map(|v| Vec2::new(v.position().x, v.position().y))
        .collect();
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let [a, b, c] = face.vertices();
        triangles.push([a.fix().index(), b.fix().index(), c.fix().index()]);
    }

    let mut boundary = Vec::new();
    for edge in cdt.directed_edges() {
        if !edge.is_constraint_edge() {
            continue;
        }
        let inside = edge
            .face()
            .as_inner()
            .is_some_and(|f| !excluded.contains(&f.fix()));
        if !inside {
            continue;
        }
        let a = edge.from().fix().index();
        let b = edge.to().fix().index();
        let mid = 0.5 * (nodes[a] + nodes[b]);
        let facet = nearest_facet(p, mid);
        boundary.push(BoundaryEdge { nodes: [a, b], facet });
    }
    let boundary_edges = order_loop(boundary)?;

    let mesh = TriMesh {
        nodes,
        triangles,
        boundary_edges,
        target_h,
    };
    if (0..mesh.triangles.len()).any(|t| !(mesh.triangle_area(t) > 0.0)) {
        return Err(Error::DegenerateGeometry("inverted or flat triangle".into()));
    }
    if (mesh.area() - area).abs() > 1e-10 * area {
        return Err(Error::DegenerateGeometry("mesh area differs from polygon area".into()));
    }
    Ok(mesh)
}

fn nearest_facet(p: &ConvexPolygon, x: Vec2) -> usize {
    p.facets()
        .iter()
        .enumerate()
        .map(|(k, f)| (k, (f.normal.dot(x) - f.support).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .expect("polygon has facets")
}

/// Chains boundary edges into a single CCW loop starting at the lowest node id.
fn order_loop(edges: Vec<BoundaryEdge>) -> Result<Vec<BoundaryEdge>> {
    let next: HashMap<usize, BoundaryEdge> = edges.iter().map(|e| (e.nodes[0], *e)).collect();
    if next.len() != edges.len() {
        return Err(Error::DegenerateGeometry("boundary is not a simple loop".into()));
    }
    let start = edges
        .iter()
        .map(|e| e.nodes[0])
        .min()
        .ok_or_else(|| Error::DegenerateGeometry("mesh has no boundary".into()))?;
    let mut ordered = Vec::with_capacity(edges.len());
    let mut at = start;
    loop {
        let e = next
            .get(&at)
            .ok_or_else(|| Error::DegenerateGeometry("boundary loop is open".into()))?;
        ordered.push(*e);
        at = e.nodes[1];
        if at == start {
            break;
        }
        if ordered.len() > edges.len() {
            return Err(Error::DegenerateGeometry("boundary loop does not close".into()));
        }
    }
    if ordered.len() != edges.len() {
        return Err(Error::DegenerateGeometry("boundary has several loops".into()));
    }
    Ok(ordered)
}
