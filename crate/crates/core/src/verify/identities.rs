use serde::Serialize;
use serde_json::json;

use super::{CheckReport, Relation, VerifyConfig};
use crate::error::{Error, Result};
use crate::geometry::{minkowski_combine, ConvexPolygon, DiscreteMeasure, UnitVector, Vec2, RIGIDITY_DEGREE};
use crate::solver::functional_fp;
use crate::torsion::{analyze, analyze_with_derivatives, torsion_data};

/// Second body of a Minkowski sum `Ω + tΩ₁`. A point is the degenerate body
/// with support `x₀·u`, for which the sum is a translation.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Summand {
    Body(ConvexPolygon),
    Point(Vec2),
}

impl Summand {
    pub fn support(&self, u: UnitVector) -> f64 {
        match self {
            Summand::Body(p) => p.support(u),
            Summand::Point(x) => u.dot(*x),
        }
    }

    /// `base + t·self`.
    pub fn added_to(&self, base: &ConvexPolygon, t: f64) -> ConvexPolygon {
        match self {
            Summand::Body(p) => minkowski_combine(1.0, base, t, p),
            Summand::Point(x) => base.translated(t * *x),
        }
    }
}

/// `Σ_i |b_i − s·a_i| / Σ_i s·a_i` for facet-aligned measure vectors.
fn variation_gap(scaled: &[f64], base: &[f64], s: f64) -> f64 {
    let total: f64 = base.iter().map(|a| s * a).sum();
    scaled.iter().zip(base).map(|(b, a)| (b - s * a).abs()).sum::<f64>() / total
}

/// Homogeneity (`m ∈ {0.5, 2}`), translation invariance, gradient bound,
/// support and divergence identities and the volume bound on one polygon.
/// A check whose FEM fails is reported as failed, never propagated.
pub fn identity_suite(poly: &ConvexPolygon, cfg: &VerifyConfig) -> Vec<CheckReport> {
    let (field, data) = match analyze(poly, cfg.mesh_h) {
        Ok(v) => v,
        Err(e) => return vec![CheckReport::error("identities", &e)],
    };
    let t = data.rigidity;
    let diam = poly.diameter();
    let mut out = Vec::new();

    for m in [0.5_f64, 2.0] {
        match torsion_data(&poly.scaled(m), cfg.mesh_h) {
            Ok(d) => {
                out.push(CheckReport::new(
                    format!("homogeneity_rigidity_m{m}"),
                    Relation::Within,
                    d.rigidity / (m.powi(4) * t),
                    1.0,
                    cfg.identity_tol,
                    json!({ "scale": m, "rigidity": t, "scaled_rigidity": d.rigidity }),
                ));
                out.push(CheckReport::new(
                    format!("homogeneity_measure_m{m}"),
                    Relation::AtMost,
                    variation_gap(&d.facet_measures, &data.facet_measures, m.powi(3)),
                    0.0,
                    cfg.measure_tol,
                    json!({ "scale": m }),
                ));
            }
            Err(e) => out.push(CheckReport::error(format!("homogeneity_m{m}"), &e)),
        }
    }

    let shift = Vec2::new(0.37, -0.21) * diam;
    match torsion_data(&poly.translated(shift), cfg.mesh_h) {
        Ok(d) => {
            out.push(CheckReport::new(
                "translation_rigidity",
                Relation::Within,
                d.rigidity / t,
                1.0,
                cfg.identity_tol,
                json!({ "shift": [shift.x, shift.y], "rigidity": t, "shifted_rigidity": d.rigidity }),
            ));
            out.push(CheckReport::new(
                "translation_measure",
                Relation::AtMost,
                variation_gap(&d.facet_measures, &data.facet_measures, 1.0),
                0.0,
                cfg.measure_tol,
                json!({ "shift": [shift.x, shift.y] }),
            ));
        }
        Err(e) => out.push(CheckReport::error("translation", &e)),
    }

    out.push(CheckReport::new(
        "gradient_bound",
        Relation::AtMost,
        field.max_gradient(),
        diam,
        cfg.identity_tol * diam,
        json!({ "diameter": diam }),
    ));
    out.push(CheckReport::new(
        "support_identity",
        Relation::AtMost,
        data.support_identity_gap,
        0.0,
        cfg.identity_tol,
        json!({ "rigidity": t, "weighted_measure": data.supports.iter().zip(&data.facet_measures).map(|(h, m)| h * m).sum::<f64>() }),
    ));
    out.push(CheckReport::new(
        "divergence_identity",
        Relation::AtMost,
        data.divergence_identity_gap,
        0.0,
        cfg.identity_tol,
        json!({ "total_flux": data.facet_flux.iter().sum::<f64>(), "area": poly.area() }),
    ));
    let volume_floor = t / (diam * diam);
    out.push(CheckReport::new(
        "volume_bound",
        Relation::AtLeast,
        poly.area(),
        volume_floor,
        cfg.identity_tol * volume_floor,
        json!({ "rigidity": t, "diameter": diam }),
    ));
    out
}

/// Polynomial extrapolation of `(t, D(t))` samples to `t = 0` (Neville).
fn extrapolate_to_zero(samples: &[(f64, f64)]) -> f64 {
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut d: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = d.len();
    for k in 1..n {
        for i in 0..n - k {
            d[i] = (t[i + k] * d[i] - t[i] * d[i + 1]) / (t[i + k] - t[i]);
        }
    }
    d[0]
}

/// Finite-difference derivative of `t ↦ T(Ω + tΩ₁)` at zero, extrapolated
/// over `steps`, against `Σ h(Ω₁, ξ_i) μ_i(Ω)`. The tolerance is relative to
/// `Σ |h(Ω₁, ξ_i)| μ_i(Ω)` so that summands with vanishing derivative
/// (translations of symmetric bodies) still get a meaningful scale.
pub fn hadamard_check(body: &ConvexPolygon, summand: &Summand, steps: &[f64], cfg: &VerifyConfig) -> CheckReport {
    const NAME: &str = "hadamard";
    let diam = body.diameter();
    let mut sorted = steps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    if sorted.is_empty() || sorted.iter().any(|&t| !(t > 0.0 && t < 0.1 * diam)) {
        let e = Error::InvalidInput(format!("steps must lie in (0, {})", 0.1 * diam));
        return CheckReport::error(NAME, &e);
    }
    let run = || -> Result<CheckReport> {
        let base = torsion_data(body, cfg.mesh_h)?;
        let quotients = sorted
            .iter()
            .map(|&t| Ok((t, (torsion_data(&summand.added_to(body, t), cfg.mesh_h)?.rigidity - base.rigidity) / t)))
            .collect::<Result<Vec<_>>>()?;
        let derivative = extrapolate_to_zero(&quotients);
        let terms: Vec<f64> = base
            .normals
            .iter()
            .zip(&base.facet_measures)
            .map(|(&u, mu)| summand.support(u) * mu)
            .collect();
        let formula: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        Ok(CheckReport::new(
            NAME,
            Relation::Within,
            derivative,
            formula,
            cfg.hadamard_tol * scale,
            json!({ "difference_quotients": quotients, "rigidity": base.rigidity, "scale": scale }),
        ))
    };
    run().unwrap_or_else(|e| CheckReport::error(NAME, &e))
}

/// `T(λΩ₀ + (1−λ)Ω₁)^{1/4} ≥ λT(Ω₀)^{1/4} + (1−λ)T(Ω₁)^{1/4}` with relative
/// slack; `details.equality` flags `|LHS − RHS| ≤ slack·RHS`.
pub fn bm_check(a: &ConvexPolygon, b: &ConvexPolygon, lambda: f64, cfg: &VerifyConfig) -> CheckReport {
    const NAME: &str = "brunn_minkowski";
    if !(0.0..=1.0).contains(&lambda) {
        return CheckReport::error(NAME, &Error::InvalidInput(format!("lambda {lambda} outside [0, 1]")));
    }
    let run = || -> Result<CheckReport> {
        let mix = if lambda == 1.0 {
            a.clone()
        } else if lambda == 0.0 {
            b.clone()
        } else {
            minkowski_combine(lambda, a, 1.0 - lambda, b)
        };
        let root = |p: &ConvexPolygon| -> Result<f64> { Ok(torsion_data(p, cfg.mesh_h)?.rigidity.powf(1.0 / RIGIDITY_DEGREE)) };
        let (ra, rb) = (root(a)?, root(b)?);
        let lhs = root(&mix)?;
        let rhs = lambda * ra + (1.0 - lambda) * rb;
        let slack = cfg.slack * rhs;
        Ok(CheckReport::new(
            NAME,
            Relation::AtLeast,
            lhs,
            rhs,
            slack,
            json!({ "lambda": lambda, "margin": (lhs - rhs) / rhs, "equality": (lhs - rhs).abs() <= slack }),
        ))
    };
    run().unwrap_or_else(|e| CheckReport::error(NAME, &e))
}

/// `T(Ω₀, Ω₁) ≥ T(Ω₀)^{3/4} T(Ω₁)^{1/4}`, the fourth root of the Minkowski
/// inequality, with relative slack. The mixed rigidity uses the exact shape
/// derivative of the discrete rigidity, which makes `T(Ω, Ω) = T(Ω)` and
/// translation invariance hold to round-off; the flux-based value is kept
/// in the details.
pub fn minkowski_ineq_check(a: &ConvexPolygon, b: &ConvexPolygon, cfg: &VerifyConfig) -> CheckReport {
    const NAME: &str = "minkowski";
    let run = || -> Result<CheckReport> {
        let (da, derivatives) = analyze_with_derivatives(a, cfg.mesh_h)?;
        let tb = if a == b { da.rigidity } else { analyze_with_derivatives(b, cfg.mesh_h)?.0.rigidity };
        let mixed = da.normals.iter().zip(&derivatives).map(|(&u, d)| b.support(u) * d).sum::<f64>() / RIGIDITY_DEGREE;
        let rhs = da.rigidity.powf(0.75) * tb.powf(0.25);
        let slack = cfg.slack * rhs;
        Ok(CheckReport::new(
            NAME,
            Relation::AtLeast,
            mixed,
            rhs,
            slack,
            json!({
                "rigidity_0": da.rigidity,
                "rigidity_1": tb,
                "flux_mixed_rigidity": crate::torsion::mixed_rigidity(&da, b),
                "margin": (mixed - rhs) / rhs,
                "equality": (mixed - rhs).abs() <= slack,
            }),
        ))
    };
    run().unwrap_or_else(|e| CheckReport::error(NAME, &e))
}

/// The maximizing property of the normalized solution: with every body
/// rescaled to `F_p = 1`, `T(solution) ≥ max_Q T(Q)·(1 − identity_tol)`.
pub fn jensen_check(m: &DiscreteMeasure, p: f64, solution: &ConvexPolygon, rivals: &[ConvexPolygon], cfg: &VerifyConfig) -> CheckReport {
    const NAME: &str = "jensen_chain";
    let run = || -> Result<CheckReport> {
        let normalized = |q: &ConvexPolygon| -> Result<f64> {
            let fp = functional_fp(m, q, p);
            if !(fp > 0.0) {
                return Err(Error::InvalidInput("body has F_p = 0".into()));
            }
            Ok(torsion_data(&q.scaled(fp.powf(-1.0 / p)), cfg.mesh_h)?.rigidity)
        };
        let best = normalized(solution)?;
        let rivals = rivals.iter().map(normalized).collect::<Result<Vec<_>>>()?;
        let top = rivals.iter().copied().fold(0.0, f64::max);
        Ok(CheckReport::new(
            NAME,
            Relation::AtLeast,
            best,
            top,
            cfg.identity_tol * top,
            json!({ "rival_rigidities": rivals }),
        ))
    };
    run().unwrap_or_else(|e| CheckReport::error(NAME, &e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomial_intercept() {
        let f = |t: f64| 3.0 - 2.0 * t + 0.5 * t * t;
        let samples: Vec<(f64, f64)> = [0.4, 0.2, 0.1].iter().map(|&t| (t, f(t))).collect();
        assert!((extrapolate_to_zero(&samples) - 3.0).abs() < 1e-12);
        assert_eq!(extrapolate_to_zero(&[(0.1, 7.0)]), 7.0);
    }

    #[test]
    fn point_summand_translates() {
        let sq = ConvexPolygon::square(1.0);
        let s = Summand::Point(Vec2::new(1.0, 2.0));
        assert_eq!(s.support(UnitVector::e2()), 2.0);
        let moved = s.added_to(&sq, 0.5);
        assert!((moved.support(UnitVector::e1()) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs_fail_without_panicking() {
        let sq = ConvexPolygon::square(1.0);
        let cfg = VerifyConfig::default();
        assert!(!bm_check(&sq, &sq, 1.5, &cfg).passed);
        let r = hadamard_check(&sq, &Summand::Body(sq.clone()), &[0.5], &cfg);
        assert!(!r.passed && r.details["error"].is_string());
    }
}
