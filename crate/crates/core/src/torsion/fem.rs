use serde::Serialize;

use super::mesh::TriMesh;
use super::sparse::{pcg, CsrMatrix};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Relative residual for the interior stiffness solve.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Allowed relative gap between `∫|∇u|²` and `2∫u`.
pub const RIGIDITY_IDENTITY_TOL: f64 = 1e-2;

/// Right-hand side of `Δu = −2`.
const SOURCE: f64 = 2.0;

/// Piecewise-linear solution of the torsion problem on a mesh.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionField {
    pub mesh: TriMesh,
    /// Nodal values; exactly zero on boundary nodes.
    pub u: Vec<f64>,
    pub interior_dof_count: usize,
    pub cg_iterations: usize,
}

/// Both rigidity formulas on one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidityPair {
    /// `Σ_T |∇u_T|²·|T|`.
    pub energy: f64,
    /// `2∫u`.
    pub mean: f64,
}

impl RigidityPair {
    pub fn relative_gap(&self) -> f64 {
        (self.energy - self.mean).abs() / self.energy.abs().max(f64::MIN_POSITIVE)
    }
}

/// Gradients of the three hat functions on triangle `(a, b, c)`.
pub(crate) fn hat_gradients(pa: Vec2, pb: Vec2, pc: Vec2) -> ([Vec2; 3], f64) {
    let area = 0.5 * (pb - pa).cross(pc - pa);
    let inv = 1.0 / (2.0 * area);
    // ∇φ_i is the inward normal of the opposite edge scaled by its length / 2|T|.
    let g = |e: Vec2| Vec2::new(-e.y * inv, e.x * inv);
    ([g(pc - pb), g(pa - pc), g(pb - pa)], area)
}

/// Global stiffness triplets and load vector over all nodes.
pub(crate) fn assemble(mesh: &TriMesh) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
    let mut load = vec![0.0; mesh.nodes.len()];
    for tri in &mesh.triangles {
        let (grads, area) = hat_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
        for i in 0..3 {
            load[tri[i]] += SOURCE * area / 3.0;
            for j in 0..3 {
                triplets.push((tri[i], tri[j], area * grads[i].dot(grads[j])));
            }
        }
    }
    (triplets, load)
}

/// Galerkin solution of `∫∇u·∇v = ∫2v` over hat functions vanishing on the boundary.
pub fn solve_torsion(mesh: &TriMesh) -> Result<TorsionField> {
    let boundary = mesh.boundary_mask();
    let mut dof = vec![usize::MAX; mesh.nodes.len()];
    let mut count = 0;
    for (k, &b) in boundary.iter().enumerate() {
        if !b {
            dof[k] = count;
            count += 1;
        }
    }
    let (triplets, load) = assemble(mesh);
    let interior: Vec<(usize, usize, f64)> = triplets
        .into_iter()
        .filter(|&(r, c, _)| !boundary[r] && !boundary[c])
        .map(|(r, c, v)| (dof[r], dof[c], v))
        .collect();
    let k = CsrMatrix::from_triplets(count, &interior);
    let mut rhs = vec![0.0; count];
    for (node, &d) in dof.iter().enumerate() {
        if d != usize::MAX {
            rhs[d] = load[node];
        }
    }
    let (sol, outcome) = pcg(&k, &rhs, CG_TOLERANCE)?;
    let mut u = vec![0.0; mesh.nodes.len()];
    for (node, &d) in dof.iter().enumerate() {
        if d != usize::MAX {
            u[node] = sol[d];
        }
    }
    Ok(TorsionField {
        mesh: mesh.clone(),
        u,
        interior_dof_count: count,
        cg_iterations: outcome.iterations,
    })
}

impl TorsionField {
    /// Constant gradient of `u` on each triangle.
    pub fn gradients(&self) -> Vec<Vec2> {
        self.mesh
            .triangles
            .iter()
            .map(|t| {
                let (g, _) = hat_gradients(self.mesh.nodes[t[0]], self.mesh.nodes[t[1]], self.mesh.nodes[t[2]]);
                self.u[t[0]] * g[0] + self.u[t[1]] * g[1] + self.u[t[2]] * g[2]
            })
            .collect()
    }

    pub fn max_gradient(&self) -> f64 {
        self.gradients().iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    pub fn max_value(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    /// Piecewise-linear interpolant at `x`; `None` outside the mesh.
    pub fn value_at(&self, x: Vec2) -> Option<f64> {
        self.mesh.triangles.iter().find_map(|t| {
            let (a, b, c) = (self.mesh.nodes[t[0]], self.mesh.nodes[t[1]], self.mesh.nodes[t[2]]);
            let area = (b - a).cross(c - a);
            let l1 = (c - b).cross(x - b) / area;
            let l2 = (a - c).cross(x - c) / area;
            let l3 = 1.0 - l1 - l2;
            let eps = -1e-12;
            (l1 >= eps && l2 >= eps && l3 >= eps)
                .then(|| l1 * self.u[t[0]] + l2 * self.u[t[1]] + l3 * self.u[t[2]])
        })
    }

    pub fn rigidity_pair(&self) -> RigidityPair {
        let mut energy = 0.0;
        let mut mean = 0.0;
        for (t, g) in self.mesh.triangles.iter().zip(self.gradients()) {
            let area = self.mesh.triangle_area_of(t);
            energy += g.dot(g) * area;
            mean += SOURCE * area * (self.u[t[0]] + self.u[t[1]] + self.u[t[2]]) / 3.0;
        }
        RigidityPair { energy, mean }
    }
}

impl TriMesh {
    pub(crate) fn triangle_area_of(&self, t: &[usize; 3]) -> f64 {
        0.5 * (self.nodes[t[1]] - self.nodes[t[0]]).cross(self.nodes[t[2]] - self.nodes[t[0]])
    }
}

/// `T = ∫|∇u|²`, cross-checked against `2∫u`.
pub fn rigidity(field: &TorsionField) -> Result<f64> {
    let pair = field.rigidity_pair();
    let gap = pair.relative_gap();
    if !(gap <= RIGIDITY_IDENTITY_TOL) {
        return Err(Error::IdentityMismatch {
            identity: "energy/mean rigidity",
            gap,
            tolerance: RIGIDITY_IDENTITY_TOL,
        });
    }
    Ok(pair.energy)
}
