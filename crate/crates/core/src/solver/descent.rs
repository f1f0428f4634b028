use serde::Serialize;

use super::{facet_rows, functional_fp, optimality_residual, IterationRecord, SolveConfig, SolveReport};
use crate::error::{Error, Result};
use crate::geometry::{hemisphere_check, wulff_from_values, NORMAL_MERGE_TOL, ConvexPolygon, DiscreteMeasure, SupportVector, RIGIDITY_DEGREE};
use crate::torsion::{analyze_mesh, FanMesh, TorsionData};

/// Sufficient-decrease constant of the Armijo test.
const ARMIJO: f64 = 1e-4;
/// Largest change of any log-support in one step.
const MAX_LOG_STEP: f64 = 0.5;
/// Line search gives up once no coordinate moves by more than this.
const MIN_LOG_STEP: f64 = 1e-12;
/// Mapped meshes worse than this fall back to direct triangulation.
const MIN_MAPPED_ANGLE_DEG: f64 = 10.0;

/// Builds the FEM mesh of a normalized body as a function of the body alone:
/// the fan mesh of the circumscribed reference `P(1, …, 1)` with the same
/// facet normals, mapped onto the body. Remeshing from scratch at every
/// point would add noise of order 1e-6 to `G`, which stalls the line search
/// long before the residual is small. References are memoized.
pub(crate) struct Mesher {
    mesh_h: f64,
    references: Vec<FanMesh>,
    local: Option<FanMesh>,
}

impl Mesher {
    pub(crate) fn new(mesh_h: f64) -> Self {
        Mesher {
            mesh_h,
            references: Vec::new(),
            local: None,
        }
    }

    /// Fan mesh carried onto `body`, the field on it, and `∂T_h/∂h_k` per facet.
    pub(crate) fn solve(&mut self, m: &DiscreteMeasure, p: f64, body: &ConvexPolygon) -> Result<(TorsionData, Vec<f64>)> {
        let k = match self.references.iter().position(|r| r.fits(body)) {
            Some(k) => k,
            None => {
                let normals: Vec<_> = body.facets().iter().map(|f| f.normal).collect();
                let unit = wulff_from_values(&normals, &vec![1.0; normals.len()])?;
                let reference = unit.scaled(functional_fp(m, &unit, p).powf(-1.0 / p));
                self.references.push(FanMesh::new(&reference, self.mesh_h)?);
                self.references.len() - 1
            }
        };
        let mapped = self.references[k].map_to(body);
        let (fan, mesh) = match mapped {
            Ok(mesh) if mesh.min_angle_deg() >= MIN_MAPPED_ANGLE_DEG => (&self.references[k], mesh),
            _ => {
                // Too distorted: mesh the body itself. Derivatives stay exact,
                // but the objective is no longer continuous across this switch.
                self.local = Some(FanMesh::new(&snapped(body), self.mesh_h)?);
                let fan = self.local.as_ref().expect("just set");
                (fan, fan.map_to(body)?)
            }
        };
        let (field, data) = analyze_mesh(&mesh, body)?;
        let derivatives = fan.support_derivatives(body, &field)?;
        Ok((data, derivatives))
    }
}

/// `body` with its supports rounded to about twenty bits below the largest
/// one. Delaunay meshing is discontinuous in its input, so the fallback mesh
/// is generated from this copy and then mapped onto `body`: bodies that differ
/// by rounding, such as `s·P(y)` and `(s/m)·P(m·y)`, get the same mesh.
fn snapped(body: &ConvexPolygon) -> ConvexPolygon {
    let normals: Vec<_> = body.facets().iter().map(|f| f.normal).collect();
    let top = body.facets().iter().map(|f| f.support.abs()).fold(0.0, f64::max);
    let quantum = (2.0_f64).powi(top.log2().floor() as i32 - 20);
    let values: Vec<f64> = body.facets().iter().map(|f| (f.support / quantum).round() * quantum).collect();
    match wulff_from_values(&normals, &values) {
        Ok(q) if q.len() == body.len() => q,
        _ => body.clone(),
    }
}

/// `G`, its gradient in `y`, and the torsion data behind them.
#[derive(Debug, Clone, Serialize)]
pub struct Objective {
    pub value: f64,
    /// `∂G/∂y_i` at the cleaned support vector.
    pub gradient: Vec<f64>,
    /// `∂T/∂y_i` on the normalized body, i.e. the torsion measure of atom `i`
    /// as the exact derivative of the discrete rigidity.
    pub rigidity_derivatives: Vec<f64>,
    /// Factor `s` with `F_p(s·P(y)) = 1`.
    pub scale: f64,
    /// `s·P(y)`, the body the FEM was run on.
    pub normalized_body: ConvexPolygon,
    pub data: TorsionData,
}

/// Everything the descent needs at one point, evaluated on the `F_p = 1` body.
struct Evaluation {
    scale: f64,
    supports: Vec<f64>,
    body: ConvexPolygon,
    data: TorsionData,
    fp: f64,
    log_g: f64,
    /// `∂ log G / ∂ log y_i`.
    grad_log: Vec<f64>,
    /// `∂T_h/∂y_i` per atom, zero for atoms without a facet.
    measures: Vec<f64>,
    /// Infinite while some atom has no facet.
    residual: f64,
}

fn evaluate(m: &DiscreteMeasure, y: &[f64], cfg: &SolveConfig, mesher: &mut Mesher) -> Result<Evaluation> {
    let p = cfg.p;
    let raw = wulff_from_values(m.normals(), y)?;
    if !(raw.min_support() > 0.0) {
        return Err(Error::InvalidInput("origin is not interior to P(y)".into()));
    }
    let scale = functional_fp(m, &raw, p).powf(-1.0 / p);
    let body = raw.scaled(scale);
    let supports: Vec<f64> = m.normals().iter().map(|&u| body.support(u)).collect();
    let (data, derivatives) = mesher.solve(m, p, &body)?;
    let t = data.rigidity;
    let fp = functional_fp(m, &body, p);

    let mut grad_log = Vec::with_capacity(m.len());
    let mut measures = Vec::with_capacity(m.len());
    let mut residual: f64 = 0.0;
    for (i, (&u, &c)) in m.normals().iter().zip(m.weights()).enumerate() {
        let h = supports[i];
        let mu = body.facet_index(u).map_or(0.0, |k| derivatives[k]);
        measures.push(mu);
        grad_log.push(p / RIGIDITY_DEGREE * (c * h.powf(p) / fp - h * mu / t));
        let rhs = c * h.powf(p - 1.0);
        residual = residual.max(if mu > 0.0 { (mu / t - rhs).abs() / rhs } else { f64::INFINITY });
    }
    Ok(Evaluation {
        scale,
        supports,
        body,
        log_g: fp.ln() - p / RIGIDITY_DEGREE * t.ln(),
        data,
        fp,
        grad_log,
        measures,
        residual,
    })
}

/// `G(y) = F_p(P(y)) / T(P(y))^{p/(n+2)}` and `∇_y G` after cleaning `y`.
///
/// `G` is homogeneous of degree zero, so it is evaluated on the rescaled body
/// with `F_p = 1` and the gradient is carried back by the chain rule.
pub fn objective_and_gradient(m: &DiscreteMeasure, y: &SupportVector, cfg: &SolveConfig) -> Result<Objective> {
    cfg.validate()?;
    if y.len() != m.len() || y.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("support vector must be strictly positive and match the measure".into()));
    }
    let e = evaluate(m, y.values(), cfg, &mut Mesher::new(cfg.mesh_h))?;
    let value = e.log_g.exp();
    // ∂G/∂y_i = G·(∂ log G/∂ log y_i)/y_i at the cleaned point, and the
    // degree-zero homogeneity gives ∇G(y) = s·∇G(s·y).
    let gradient = e
        .grad_log
        .iter()
        .zip(&e.supports)
        .map(|(g, h)| e.scale * value * g / h)
        .collect();
    Ok(Objective {
        value,
        gradient,
        rigidity_derivatives: e.measures,
        scale: e.scale,
        normalized_body: e.body,
        data: e.data,
    })
}

/// Normalized problem from the start `y_i = 1`.
pub fn solve_normalized(m: &DiscreteMeasure, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_normalized_from(m, cfg, &vec![1.0; m.len()])
}

/// Normalized problem from an explicit positive start.
pub fn solve_normalized_from(m: &DiscreteMeasure, cfg: &SolveConfig, y0: &[f64]) -> Result<SolveReport> {
    cfg.validate()?;
    let (ok, max_gap) = hemisphere_check(m);
    if !ok {
        return Err(Error::HemisphereViolation { max_gap });
    }
    if y0.len() != m.len() || y0.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("initial supports must be positive, one per atom".into()));
    }

    let mut mesher = Mesher::new(cfg.mesh_h);
    let mut cur = evaluate(m, y0, cfg, &mut mesher)?;
    let mut history = vec![record(&cur, 0.0)];
    let mut step = cfg.step_init;
    for _ in 0..cfg.max_iters {
        if cur.residual < cfg.tol_residual {
            break;
        }
        let z: Vec<f64> = cur.supports.iter().map(|h| h.ln()).collect();
        let g = &cur.grad_log;
        let gg: f64 = g.iter().map(|v| v * v).sum();
        let gmax = g.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        if !(gmax > 0.0) {
            break;
        }
        let mut t = step.min(MAX_LOG_STEP / gmax);
        let accepted = loop {
            let y: Vec<f64> = z.iter().zip(g).map(|(zi, gi)| (zi - t * gi).exp()).collect();
            match evaluate(m, &y, cfg, &mut mesher) {
                Ok(e) if e.log_g <= cur.log_g - ARMIJO * t * gg => break Some((e, t)),
                Ok(_)
                | Err(Error::EmptyInterior)
                | Err(Error::DegenerateGeometry(_))
                | Err(Error::IdentityMismatch { .. })
                | Err(Error::SolverDiverged { .. })
                | Err(Error::InvalidInput(_)) => {}
                Err(e) => return Err(e),
            }
            t *= cfg.backtrack_factor;
            if t * gmax < MIN_LOG_STEP {
                break None;
            }
        };
        let Some((next, t)) = accepted else {
            // Line search exhausted: the objective is flat to FEM precision.
            break;
        };

        // Barzilai–Borwein length from the change in log supports with the
        // common rescaling shift removed.
        let mut s: Vec<f64> = next.supports.iter().zip(&z).map(|(h, zi)| h.ln() - zi).collect();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        s.iter_mut().for_each(|v| *v -= mean);
        let r: Vec<f64> = next.grad_log.iter().zip(g).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let sr: f64 = s.iter().zip(&r).map(|(a, b)| a * b).sum();
        step = if sr > 0.0 { ss / sr } else { 2.0 * t };

        history.push(record(&next, t));
        cur = next;
    }

    if !(cur.residual < cfg.tol_residual) {
        return Err(Error::MaxItersExceeded {
            iterations: history.len() - 1,
            residual: cur.residual,
            history,
        });
    }
    finish(m, cfg, cur, history)
}

fn record(e: &Evaluation, step: f64) -> IterationRecord {
    IterationRecord {
        objective: e.log_g.exp(),
        residual: e.residual,
        step,
    }
}

fn finish(m: &DiscreteMeasure, cfg: &SolveConfig, e: Evaluation, history: Vec<IterationRecord>) -> Result<SolveReport> {
    let per_facet: Vec<f64> = e
        .body
        .facets()
        .iter()
        .map(|f| {
            let i = m.normals().iter().position(|&u| u.angular_distance(f.normal) <= NORMAL_MERGE_TOL);
            i.map_or(0.0, |i| e.measures[i])
        })
        .collect();
    let facets = facet_rows(m, &e.body, &per_facet, e.data.rigidity, cfg.p, true)?;
    let residual = facets.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SolveReport {
        p: cfg.p,
        residual,
        flux_residual: optimality_residual(m, &e.body, &e.data, cfg.p)?,
        fp_value: e.fp,
        t_value: e.data.rigidity,
        lagrange_b: RIGIDITY_DEGREE * e.data.rigidity / cfg.p,
        normalized_solution: e.body,
        original_solution: None,
        iterations: history,
        facets,
        original: None,
    })
}
