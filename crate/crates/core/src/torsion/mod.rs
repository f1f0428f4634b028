//! Finite-element torsion engine.
//!
//! A polygon is meshed, `Δu = −2` with `u = 0` on the boundary is solved with
//! linear elements, and the boundary normal derivative is recovered to give
//! the per-facet torsion measures.

mod fan;
mod fem;
mod flux;
mod mesh;
pub mod sparse;

pub use fan::FanMesh;
pub use fem::{rigidity, solve_torsion, RigidityPair, TorsionField, CG_TOLERANCE, RIGIDITY_IDENTITY_TOL};
pub use flux::{
    facet_torsion_measure, facet_torsion_measure_with_tol, lp_measure, mixed_rigidity, TorsionData,
    DEFAULT_IDENTITY_TOL,
};
pub use mesh::{triangulate, BoundaryEdge, TriMesh};

use crate::error::Result;
use crate::geometry::ConvexPolygon;

/// Mesh size used throughout unless a caller overrides it.
pub const DEFAULT_MESH_H: f64 = 0.02;

/// Mesh, solve and measure in one call.
pub fn analyze(p: &ConvexPolygon, mesh_h: f64) -> Result<(TorsionField, TorsionData)> {
    analyze_mesh(&triangulate(p, mesh_h.min(p.diameter()))?, p)
}

/// Solve and measure on a mesh already built for `p`.
pub fn analyze_mesh(mesh: &TriMesh, p: &ConvexPolygon) -> Result<(TorsionField, TorsionData)> {
    let field = solve_torsion(mesh)?;
    rigidity(&field)?;
    let data = facet_torsion_measure(&field, p)?;
    Ok((field, data))
}

/// Torsion data together with `∂T_h/∂h_i`, the exact derivative of the
/// discrete rigidity in each facet support. Unlike the recovered flux these
/// satisfy `Σ h_i ∂T_h/∂h_i = (n+2)T_h` to round-off.
pub fn analyze_with_derivatives(p: &ConvexPolygon, mesh_h: f64) -> Result<(TorsionData, Vec<f64>)> {
    let fan = FanMesh::new(p, mesh_h.min(p.diameter()))?;
    let (field, data) = analyze_mesh(&fan.map_to(p)?, p)?;
    let derivatives = fan.support_derivatives(p, &field)?;
    Ok((data, derivatives))
}

/// Torsion data only.
pub fn torsion_data(p: &ConvexPolygon, mesh_h: f64) -> Result<TorsionData> {
    analyze(p, mesh_h).map(|(_, d)| d)
}
