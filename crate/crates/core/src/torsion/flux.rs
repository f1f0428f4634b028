use std::collections::HashMap;

use serde::Serialize;

use super::fem::{assemble, TorsionField};
use super::sparse::{pcg, CsrMatrix};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, UnitVector, RIGIDITY_DEGREE};

/// Default relative tolerance for the support and divergence identities.
pub const DEFAULT_IDENTITY_TOL: f64 = 5e-2;

/// Rigidity, per-facet torsion measures and the recovered boundary flux of one field.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionData {
    /// `T(Ω) = ∫|∇u|²`.
    pub rigidity: f64,
    /// `2∫u`, kept as a mesh-quality diagnostic.
    pub rigidity_mean: f64,
    /// Outward facet normals of the source polygon, in facet order.
    pub normals: Vec<UnitVector>,
    /// Facet support numbers `h_i`.
    pub supports: Vec<f64>,
    /// `μ_i = ∫_{facet i} |∇u|²`.
    pub facet_measures: Vec<f64>,
    /// `∫_{facet i} |∂u/∂ν|`.
    pub facet_flux: Vec<f64>,
    /// Same measures from the gradient of the triangle adjacent to each boundary edge.
    pub naive_facet_measures: Vec<f64>,
    /// `(boundary node, λ = −∂u/∂ν)` along the CCW boundary loop.
    pub flux: Vec<(usize, f64)>,
    /// `|Σ h_i μ_i − (n+2)T| / ((n+2)T)`.
    pub support_identity_gap: f64,
    /// `|Σ ∫λ − 2·area| / (2·area)`.
    pub divergence_identity_gap: f64,
}

impl TorsionData {
    /// Torsion measure of the atom at `normal`; zero when the polygon has no such facet.
    pub fn measure_at(&self, normal: UnitVector) -> f64 {
        self.normals
            .iter()
            .position(|n| n.angular_distance(normal) <= crate::geometry::NORMAL_MERGE_TOL)
            .map_or(0.0, |k| self.facet_measures[k])
    }

    pub fn total_measure(&self) -> f64 {
        self.facet_measures.iter().sum()
    }
}

/// Recovers `λ = −∂u/∂ν` on the boundary by consistent flux and integrates
/// `λ²` over each facet. Fails if either identity is off by more than
/// [`DEFAULT_IDENTITY_TOL`].
pub fn facet_torsion_measure(field: &TorsionField, p: &ConvexPolygon) -> Result<TorsionData> {
    facet_torsion_measure_with_tol(field, p, DEFAULT_IDENTITY_TOL)
}

pub fn facet_torsion_measure_with_tol(
    field: &TorsionField,
    p: &ConvexPolygon,
    identity_tol: f64,
) -> Result<TorsionData> {
    let mesh = &field.mesh;
    let (triplets, load) = assemble(mesh);
    let stiffness = CsrMatrix::from_triplets(mesh.nodes.len(), &triplets);
    let mut ku = vec![0.0; mesh.nodes.len()];
    stiffness.mul_into(&field.u, &mut ku);

    // Boundary test functions: ∫_∂Ω (∂u/∂ν) v = ∫∇u·∇v − ∫2v.
    let loop_nodes: Vec<usize> = mesh.boundary_edges.iter().map(|e| e.nodes[0]).collect();
    let slot: HashMap<usize, usize> = loop_nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let nb = loop_nodes.len();
    let mut mass = Vec::with_capacity(4 * nb);
    for e in &mesh.boundary_edges {
        let (a, b) = (slot[&e.nodes[0]], slot[&e.nodes[1]]);
        let len = (mesh.nodes[e.nodes[1]] - mesh.nodes[e.nodes[0]]).norm();
        mass.push((a, a, len / 3.0));
        mass.push((b, b, len / 3.0));
        mass.push((a, b, len / 6.0));
        mass.push((b, a, len / 6.0));
    }
    let mass = CsrMatrix::from_triplets(nb, &mass);
    let rhs: Vec<f64> = loop_nodes.iter().map(|&n| load[n] - ku[n]).collect();
    let (lambda, _) = pcg(&mass, &rhs, 1e-13)?;

    let nf = p.facets().len();
    let mut measures = vec![0.0; nf];
    let mut facet_flux = vec![0.0; nf];
    let mut naive = vec![0.0; nf];
    let gradients = field.gradients();
    let mut owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            owner.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }
    for e in &mesh.boundary_edges {
        let (la, lb) = (lambda[slot[&e.nodes[0]]], lambda[slot[&e.nodes[1]]]);
        let len = (mesh.nodes[e.nodes[1]] - mesh.nodes[e.nodes[0]]).norm();
        // Simpson's rule is exact for the quadratic λ².
        measures[e.facet] += len / 3.0 * (la * la + la * lb + lb * lb);
        facet_flux[e.facet] += 0.5 * len * (la + lb);
        if let Some(&t) = owner.get(&(e.nodes[0], e.nodes[1])) {
            naive[e.facet] += len * gradients[t].dot(gradients[t]);
        }
    }

    let pair = field.rigidity_pair();
    let supports: Vec<f64> = p.facets().iter().map(|f| f.support).collect();
    let weighted: f64 = supports.iter().zip(&measures).map(|(h, m)| h * m).sum();
    let support_gap = (weighted - RIGIDITY_DEGREE * pair.energy).abs() / (RIGIDITY_DEGREE * pair.energy);
    let area = mesh.area();
    let total_flux: f64 = facet_flux.iter().sum();
    let divergence_gap = (total_flux - 2.0 * area).abs() / (2.0 * area);

    for (identity, gap) in [("support", support_gap), ("divergence", divergence_gap)] {
        if !(gap <= identity_tol) {
            return Err(Error::IdentityMismatch {
                identity,
                gap,
                tolerance: identity_tol,
            });
        }
    }

    Ok(TorsionData {
        rigidity: pair.energy,
        rigidity_mean: pair.mean,
        normals: p.facets().iter().map(|f| f.normal).collect(),
        supports,
        facet_measures: measures,
        facet_flux,
        naive_facet_measures: naive,
        flux: loop_nodes.into_iter().zip(lambda).collect(),
        support_identity_gap: support_gap,
        divergence_identity_gap: divergence_gap,
    })
}

/// `h_i^{1−p} μ_i` per facet.
pub fn lp_measure(data: &TorsionData, p_poly: &ConvexPolygon, p: f64) -> Result<Vec<f64>> {
    p_poly
        .facets()
        .iter()
        .zip(&data.facet_measures)
        .enumerate()
        .map(|(index, (f, &mu))| {
            if f.support > 0.0 {
                Ok(f.support.powf(1.0 - p) * mu)
            } else if mu > 0.0 && p != 1.0 {
                Err(Error::OriginOnBoundary { index })
            } else {
                Ok(mu)
            }
        })
        .collect()
}

/// `T(Ω₀, Ω₁) = (1/(n+2)) Σ_i h(Ω₁, ξ_i) μ_i(Ω₀)` over the facets of `Ω₀`.
pub fn mixed_rigidity(data0: &TorsionData, p1: &ConvexPolygon) -> f64 {
    data0
        .normals
        .iter()
        .zip(&data0.facet_measures)
        .map(|(&u, mu)| p1.support(u) * mu)
        .sum::<f64>()
        / RIGIDITY_DEGREE
}
