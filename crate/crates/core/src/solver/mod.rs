//! Variational solver for the discrete L_p torsional Minkowski problem.
//!
//! The descent runs on the scale-invariant quotient `G = F_p / T^{p/(n+2)}`
//! in log-support coordinates. Every iterate is rescaled to `F_p = 1`, which
//! leaves `G` unchanged and puts the optimality equation in the form
//! `μ_i / T = c_i h_i^{p−1}`.

pub(crate) mod descent;

use serde::Serialize;

pub use descent::{objective_and_gradient, solve_normalized, solve_normalized_from, Objective};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, DiscreteMeasure, UnitVector, RIGIDITY_DEGREE};
use crate::torsion::{TorsionData, DEFAULT_MESH_H};

/// Tuning knobs of one solve. `mesh_h` is the FEM element size on the
/// `F_p = 1` normalized body, so results do not depend on the input scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    pub p: f64,
    pub mesh_h: f64,
    pub tol_residual: f64,
    pub max_iters: usize,
    /// First trial step in log coordinates; later steps use Barzilai–Borwein.
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub seed: u64,
}

impl SolveConfig {
    pub fn new(p: f64) -> Self {
        SolveConfig {
            p,
            mesh_h: DEFAULT_MESH_H,
            tol_residual: 1e-2,
            max_iters: 500,
            step_init: 1.0,
            backtrack_factor: 0.5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p must be a finite number greater than 1");
        }
        if !(self.mesh_h > 0.0 && self.mesh_h.is_finite()) {
            return bad("mesh_h must be positive");
        }
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    /// `G` at the iterate.
    pub objective: f64,
    pub residual: f64,
    /// Accepted step length that produced this iterate; zero for the start.
    pub step: f64,
}

/// Per-atom terms of the optimality equation on one body.
#[derive(Debug, Clone, Serialize)]
pub struct FacetRow {
    pub normal: UnitVector,
    pub weight: f64,
    pub support: f64,
    pub measure: f64,
    /// `μ_i / T` on the normalized body, `μ_i` on the original one.
    pub lhs: f64,
    /// `c_i h_i^{p−1}`.
    pub rhs: f64,
    pub residual: f64,
}

/// Original-problem rescaling of the normalized solution with a fresh FEM check.
#[derive(Debug, Clone, Serialize)]
pub struct OriginalCheck {
    pub scale: f64,
    pub rigidity: f64,
    /// `max_i |μ_i − c_i h_i^{p−1}| / (c_i h_i^{p−1})`.
    pub residual: f64,
    pub flux_residual: f64,
    pub facets: Vec<FacetRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub p: f64,
    pub normalized_solution: ConvexPolygon,
    /// Absent for the normalized problem and at `p = n + 2`.
    pub original_solution: Option<ConvexPolygon>,
    /// Stopping residual, with `μ_i` the derivative of the discrete rigidity.
    pub residual: f64,
    /// Same residual with `μ_i` from the recovered boundary flux.
    pub flux_residual: f64,
    pub fp_value: f64,
    pub t_value: f64,
    pub iterations: Vec<IterationRecord>,
    /// Multiplier `(n+2)T/p` of the constrained maximization.
    pub lagrange_b: f64,
    pub facets: Vec<FacetRow>,
    pub original: Option<OriginalCheck>,
}

impl SolveReport {
    pub fn objective_is_monotone(&self) -> bool {
        self.iterations.windows(2).all(|w| w[1].objective <= w[0].objective)
    }
}

/// Which normalization a rescaled body should satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// `T = 1`.
    TEq1,
    /// `F_p = 1`.
    FpEq1,
    /// Original problem from a normalized solution: factor `T^{1/(p−n−2)}`.
    Original,
    /// Normalized problem from an original solution: factor `T^{−1/p}`.
    Normalized,
}

/// `F_p(P) = (1/(n+2)) Σ c_i h(P, ξ_i)^p`. Negative supports count as zero.
pub fn functional_fp(m: &DiscreteMeasure, poly: &ConvexPolygon, p: f64) -> f64 {
    m.normals()
        .iter()
        .zip(m.weights())
        .map(|(&u, c)| c * poly.support(u).max(0.0).powf(p))
        .sum::<f64>()
        / RIGIDITY_DEGREE
}

/// Per-atom rows of `μ_i / T` (or `μ_i` when not `normalized`) against
/// `c_i h_i^{p−1}`; `facet_measures` is indexed by the facets of `poly`.
pub fn facet_rows(
    m: &DiscreteMeasure,
    poly: &ConvexPolygon,
    facet_measures: &[f64],
    rigidity: f64,
    p: f64,
    normalized: bool,
) -> Result<Vec<FacetRow>> {
    m.normals()
        .iter()
        .zip(m.weights())
        .enumerate()
        .map(|(index, (&u, &c))| {
            let k = poly.facet_index(u).ok_or(Error::MissingFacet { index })?;
            let support = poly.facets()[k].support;
            let measure = facet_measures[k];
            let lhs = if normalized { measure / rigidity } else { measure };
            let rhs = c * support.powf(p - 1.0);
            Ok(FacetRow {
                normal: u,
                weight: c,
                support,
                measure,
                lhs,
                rhs,
                residual: (lhs - rhs).abs() / rhs,
            })
        })
        .collect()
}

/// `max_i |μ_i/T − c_i h_i^{p−1}| / (c_i h_i^{p−1})` on `poly` as given.
pub fn optimality_residual(m: &DiscreteMeasure, poly: &ConvexPolygon, d: &TorsionData, p: f64) -> Result<f64> {
    Ok(facet_rows(m, poly, &d.facet_measures, d.rigidity, p, true)?
        .iter().map(|r| r.residual).fold(0.0, f64::max))
}

fn is_critical(p: f64) -> bool {
    (p - RIGIDITY_DEGREE).abs() < 1e-12
}

/// Scale factor taking a body with rigidity `rigidity` and functional value
/// `fp` to `target`.
pub fn rescale_factor(p: f64, target: Target, rigidity: f64, fp: f64) -> Result<f64> {
    let factor = match target {
        Target::TEq1 => rigidity.powf(-1.0 / RIGIDITY_DEGREE),
        Target::FpEq1 => fp.powf(-1.0 / p),
        Target::Original if is_critical(p) => return Err(Error::PCritical),
        Target::Original => rigidity.powf(1.0 / (p - RIGIDITY_DEGREE)),
        Target::Normalized => rigidity.powf(-1.0 / p),
    };
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidInput(format!("rescale factor {factor} is not positive")));
    }
    Ok(factor)
}

/// Scaled copy of `poly` per [`rescale_factor`], with `T` taken from `d` and
/// `F_p` evaluated against `m`.
pub fn rescale_solution(poly: &ConvexPolygon, p: f64, target: Target, m: &DiscreteMeasure, d: &TorsionData) -> Result<ConvexPolygon> {
    let fp = functional_fp(m, poly, p);
    Ok(poly.scaled(rescale_factor(p, target, d.rigidity, fp)?))
}

/// Original problem: solve the normalized problem, rescale by `T^{1/(p−n−2)}` and
/// re-check `μ_i = c_i h_i^{p−1}` with a mesh scaled alongside the body.
pub fn solve_original(m: &DiscreteMeasure, cfg: &SolveConfig) -> Result<SolveReport> {
    if is_critical(cfg.p) {
        return Err(Error::PCritical);
    }
    let report = solve_normalized(m, cfg)?;
    attach_original(m, cfg, report)
}

pub(crate) fn attach_original(m: &DiscreteMeasure, cfg: &SolveConfig, mut report: SolveReport) -> Result<SolveReport> {
    let scale = rescale_factor(cfg.p, Target::Original, report.t_value, report.fp_value)?;
    let body = report.normalized_solution.scaled(scale);
    let (d, derivatives) = descent::Mesher::new(cfg.mesh_h).solve(m, cfg.p, &body)?;
    let facets = facet_rows(m, &body, &derivatives, d.rigidity, cfg.p, false)?;
    let max_residual = |rows: &[FacetRow]| rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    report.original = Some(OriginalCheck {
        scale,
        rigidity: d.rigidity,
        residual: max_residual(&facets),
        flux_residual: max_residual(&facet_rows(m, &body, &d.facet_measures, d.rigidity, cfg.p, false)?),
        facets,
    });
    report.original_solution = Some(body);
    Ok(report)
}

/// `((n+2)/C)^{1/p}` with `C = min_u Σ c_i (u·ξ_i)_+^p` over 720 directions;
/// bounds the circumradius of the normalized solution.
pub fn circumradius_bound(m: &DiscreteMeasure, p: f64) -> f64 {
    let c = (0..720)
        .map(|k| m.positive_moment(UnitVector::from_angle(k as f64 * std::f64::consts::TAU / 720.0), p))
        .fold(f64::INFINITY, f64::min);
    (RIGIDITY_DEGREE / c).powf(1.0 / p)
}
