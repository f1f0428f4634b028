use super::fem::{hat_gradients, TorsionField};
use super::mesh::{triangulate, TriMesh};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Vec2};

/// Barycentric weights below this snap to zero so that boundary and spoke
/// nodes land exactly on their lines after mapping.
const SNAP: f64 = 1e-12;

/// A mesh of a reference polygon that can be carried onto any polygon with
/// the same facet normals. Each node moves by the affine map of the fan
/// sector `(centroid, v_k, v_{k+1})` containing it; the map is continuous
/// across spokes and takes facets to facets, so connectivity is kept and
/// nodal positions depend smoothly on the support numbers.
#[derive(Debug, Clone)]
pub struct FanMesh {
    reference: ConvexPolygon,
    mesh: TriMesh,
    /// Per node: sector index and weights on (centroid, v_k, v_{k+1}).
    coords: Vec<(usize, [f64; 3])>,
}

impl FanMesh {
    pub fn new(reference: &ConvexPolygon, target_h: f64) -> Result<Self> {
        let center = reference.centroid();
        let mesh = triangulate(reference, target_h.min(reference.diameter()))?;
        let v = reference.vertices();
        let n = v.len();
        let coords = mesh
            .nodes
            .iter()
            .map(|&x| {
                let mut best = (0, [0.0; 3], f64::NEG_INFINITY);
                for k in 0..n {
                    let w = barycentric(x, center, v[k], v[(k + 1) % n]);
                    let worst = w.iter().copied().fold(f64::INFINITY, f64::min);
                    if worst > best.2 {
                        best = (k, w, worst);
                    }
                }
                let (k, mut w, _) = best;
                w.iter_mut().filter(|c| c.abs() < SNAP).for_each(|c| *c = 0.0);
                let sum: f64 = w.iter().sum();
                w.iter_mut().for_each(|c| *c /= sum);
                (k, w)
            })
            .collect();
        Ok(FanMesh {
            reference: reference.clone(),
            mesh,
            coords,
        })
    }

    pub fn reference(&self) -> &ConvexPolygon {
        &self.reference
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    /// Whether `target` has exactly the reference's facet normals.
    pub fn fits(&self, target: &ConvexPolygon) -> bool {
        target.len() == self.reference.len()
            && self.reference.facets().iter().all(|f| target.facet_index(f.normal).is_some())
    }

    /// Target facet index of each reference facet.
    fn slots(&self, target: &ConvexPolygon) -> Result<Vec<usize>> {
        if !self.fits(target) {
            return Err(Error::DegenerateGeometry("facet normals differ from the reference".into()));
        }
        Ok(self
            .reference
            .facets()
            .iter()
            .map(|f| target.facet_index(f.normal).expect("checked by fits"))
            .collect())
    }

    /// Carries the reference mesh onto `target`.
    pub fn map_to(&self, target: &ConvexPolygon) -> Result<TriMesh> {
        let slot = self.slots(target)?;
        let n = slot.len();
        let tv = target.vertices();
        let c = target.centroid();
        let nodes: Vec<Vec2> = self
            .coords
            .iter()
            .map(|&(k, [a, b, d])| a * c + b * tv[slot[k]] + d * tv[slot[(k + 1) % n]])
            .collect();
        let mut mesh = TriMesh {
            nodes,
            triangles: self.mesh.triangles.clone(),
            boundary_edges: self.mesh.boundary_edges.clone(),
            target_h: 0.0,
        };
        for e in &mut mesh.boundary_edges {
            e.facet = slot[e.facet];
        }
        mesh.target_h = mesh.max_boundary_edge();
        if (0..mesh.triangles.len()).any(|t| !(mesh.triangle_area(t) > 0.0)) {
            return Err(Error::DegenerateGeometry("mapped mesh has a flat triangle".into()));
        }
        Ok(mesh)
    }

    /// `∂T_h/∂h_k` for every facet `k` of `target`, where `T_h` is the
    /// discrete rigidity on the mapped mesh and `field` was solved on
    /// [`map_to`](Self::map_to)`(target)`.
    ///
    /// The Galerkin solution maximizes `J(v) = ∫4v − ∫|∇v|²` with `J(u_h) = T_h`,
    /// so the derivative in a node position is the explicit partial of `J`
    /// at frozen nodal values; node velocities come from the fan map.
    pub fn support_derivatives(&self, target: &ConvexPolygon, field: &TorsionField) -> Result<Vec<f64>> {
        let slot = self.slots(target)?;
        let n = slot.len();
        let mesh = &field.mesh;
        if mesh.nodes.len() != self.coords.len() {
            return Err(Error::InvalidInput("field was not solved on this fan mesh".into()));
        }

        let mut node_grad = vec![Vec2::ZERO; mesh.nodes.len()];
        for tri in &mesh.triangles {
            let (phi, area) = hat_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
            let g = field.u[tri[0]] * phi[0] + field.u[tri[1]] * phi[1] + field.u[tri[2]] * phi[2];
            let s = field.u[tri[0]] + field.u[tri[1]] + field.u[tri[2]];
            let k = 4.0 * s / 3.0 - g.dot(g);
            for i in 0..3 {
                node_grad[tri[i]] = node_grad[tri[i]] + area * (k * phi[i] + 2.0 * phi[i].dot(g) * g);
            }
        }

        // Collect the pull on the centroid and on each target vertex.
        let mut hub = Vec2::ZERO;
        let mut pull = vec![Vec2::ZERO; n];
        for (&(k, [a, b, d]), &gr) in self.coords.iter().zip(&node_grad) {
            hub = hub + a * gr;
            pull[slot[k]] = pull[slot[k]] + b * gr;
            pull[slot[(k + 1) % n]] = pull[slot[(k + 1) % n]] + d * gr;
        }

        let tv = target.vertices();
        let normals: Vec<Vec2> = target.facets().iter().map(|f| f.normal.vec()).collect();
        // Vertex t is the start of facet t: x·ν_{t−1} = h_{t−1}, x·ν_t = h_t.
        let dvertex = |t: usize| -> (Vec2, Vec2) {
            let (a, b) = (normals[(t + n - 1) % n], normals[t]);
            let det = a.cross(b);
            (Vec2::new(b.y, -b.x) * (1.0 / det), Vec2::new(-a.y, a.x) * (1.0 / det))
        };
        Ok((0..n)
            .map(|j| {
                let mut dv = vec![Vec2::ZERO; n];
                dv[j] = dvertex(j).1;
                dv[(j + 1) % n] = dvertex((j + 1) % n).0;
                hub.dot(centroid_derivative(tv, &dv)) + pull[j].dot(dv[j]) + pull[(j + 1) % n].dot(dv[(j + 1) % n])
            })
            .collect())
    }
}

/// Directional derivative of the polygon centroid for vertex velocities `dv`.
fn centroid_derivative(v: &[Vec2], dv: &[Vec2]) -> Vec2 {
    let n = v.len();
    let (mut s, mut ds, mut a2, mut da2) = (Vec2::ZERO, Vec2::ZERO, 0.0, 0.0);
    for i in 0..n {
        let j = (i + 1) % n;
        let c = v[i].cross(v[j]);
        let dc = dv[i].cross(v[j]) + v[i].cross(dv[j]);
        s = s + c * (v[i] + v[j]);
        ds = ds + c * (dv[i] + dv[j]) + dc * (v[i] + v[j]);
        a2 += c;
        da2 += dc;
    }
    (1.0 / (3.0 * a2)) * ds - (da2 / (3.0 * a2 * a2)) * s
}

fn barycentric(x: Vec2, a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let det = (b - a).cross(c - a);
    let wb = (x - a).cross(c - a) / det;
    let wc = (b - a).cross(x - a) / det;
    [1.0 - wb - wc, wb, wc]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wulff_shape, DiscreteMeasure, SupportVector};
    use crate::torsion::{analyze_mesh, torsion_data};

    fn pentagon(y: Vec<f64>) -> ConvexPolygon {
        let m = DiscreteMeasure::from_angles(&[0.0, 1.3, 2.2, 3.5, 4.9], &[1.0; 5]).unwrap();
        wulff_shape(m.normals(), &SupportVector::new(y).unwrap()).unwrap()
    }

    #[test]
    fn identity_map_reproduces_reference() {
        let p = pentagon(vec![1.0; 5]);
        let fan = FanMesh::new(&p, 0.1).unwrap();
        let m = fan.map_to(&p).unwrap();
        for (a, b) in m.nodes.iter().zip(&fan.mesh().nodes) {
            assert!((*a - *b).norm() < 1e-12);
        }
        assert!(fan.mesh().min_angle_deg() >= 20.0);
    }

    #[test]
    fn mapped_mesh_is_valid() {
        let p = pentagon(vec![1.0; 5]);
        let q = pentagon(vec![0.8, 1.3, 1.1, 0.7, 1.2]);
        let fan = FanMesh::new(&p, 0.1).unwrap();
        let m = fan.map_to(&q).unwrap();
        assert!((m.area() - q.area()).abs() < 1e-12 * q.area());
        let d = q.diameter();
        for e in &m.boundary_edges {
            let f = q.facets()[e.facet];
            for &n in &e.nodes {
                assert!((f.normal.dot(m.nodes[n]) - f.support).abs() <= 1e-10 * d);
            }
        }
        // Same body meshed two ways gives the same torsion to FEM accuracy.
        let a = analyze_mesh(&m, &q).unwrap().1;
        let b = torsion_data(&q, 0.1).unwrap();
        assert!((a.rigidity - b.rigidity).abs() < 5e-3 * b.rigidity);
    }

    #[test]
    fn rejects_other_facet_structure() {
        let p = pentagon(vec![1.0; 5]);
        let fan = FanMesh::new(&p, 0.2).unwrap();
        assert!(fan.map_to(&ConvexPolygon::square(1.0)).is_err());
    }

    #[test]
    fn support_derivatives_are_exact() {
        let q = pentagon(vec![0.8, 1.3, 1.1, 0.7, 1.2]);
        let fan = FanMesh::new(&pentagon(vec![1.0; 5]), 0.1).unwrap();
        let normals: Vec<_> = q.facets().iter().map(|f| f.normal).collect();
        let supports: Vec<f64> = q.facets().iter().map(|f| f.support).collect();
        let rigidity = |y: &[f64]| {
            let body = wulff_shape(&normals, &SupportVector::new(y.to_vec()).unwrap()).unwrap();
            analyze_mesh(&fan.map_to(&body).unwrap(), &body).unwrap().1.rigidity
        };
        let (field, data) = analyze_mesh(&fan.map_to(&q).unwrap(), &q).unwrap();
        let d = fan.support_derivatives(&q, &field).unwrap();

        // Degree-4 homogeneity of the discrete rigidity under the fan map.
        let euler: f64 = supports.iter().zip(&d).map(|(h, x)| h * x).sum();
        assert!((euler / (4.0 * data.rigidity) - 1.0).abs() < 1e-9, "{euler}");
        // Translation invariance: Σ ξ_i ∂T/∂h_i = 0.
        let drift = normals.iter().zip(&d).fold(Vec2::ZERO, |acc, (u, x)| acc + *x * u.vec());
        assert!(drift.norm() < 1e-9 * data.rigidity);

        let eps = 1e-5;
        for k in 0..supports.len() {
            let (mut up, mut down) = (supports.clone(), supports.clone());
            up[k] += eps;
            down[k] -= eps;
            let fd = (rigidity(&up) - rigidity(&down)) / (2.0 * eps);
            assert!((fd - d[k]).abs() < 1e-6 * d[k], "facet {k}: fd {fd} exact {}", d[k]);
        }
    }
}
