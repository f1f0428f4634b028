//! Executable checks of the torsion identities and inequalities, plus the
//! continuity, uniqueness and weak-convergence experiments.
//!
//! Every check produces a [`CheckReport`] whose `passed` flag is a pure
//! function of `measured`, `bound`, `tolerance` and `relation`, so a report
//! read back from disk can be re-judged without the FEM.

mod continuity;
mod identities;

use serde::Serialize;
use serde_json::{json, Value};

pub use continuity::{
    continuity_in_measure, continuity_in_p, direction_jitter, uniqueness_probe, weak_convergence_probe, UNIQUENESS_TOL,
    weight_perturbations, ConvergenceRow, ConvergenceTable, Perturbation, TestFunction,
};
pub use identities::{bm_check, hadamard_check, identity_suite, jensen_check, minkowski_ineq_check, Summand};

use crate::error::Error;

/// How `measured` is compared with `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured ≤ bound + tolerance`.
    AtMost,
    /// `measured ≥ bound − tolerance`.
    AtLeast,
    /// `|measured − bound| ≤ tolerance`.
    Within,
}

impl Relation {
    /// False whenever either number is not finite.
    pub fn holds(self, measured: f64, bound: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => measured <= bound + tolerance,
            Relation::AtLeast => measured >= bound - tolerance,
            Relation::Within => (measured - bound).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    /// Absolute slack in the units of `measured`.
    pub tolerance: f64,
    pub relation: Relation,
    pub details: Value,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, relation: Relation, measured: f64, bound: f64, tolerance: f64, details: Value) -> Self {
        CheckReport {
            name: name.into(),
            passed: relation.holds(measured, bound, tolerance),
            measured,
            bound,
            tolerance,
            relation,
            details,
        }
    }

    /// A check that could not be evaluated. `measured` is NaN, so it fails.
    pub fn error(name: impl Into<String>, err: &Error) -> Self {
        Self::new(name, Relation::Within, f64::NAN, 0.0, 0.0, json!({ "error": err.to_string() }))
    }

    /// Re-judges the stored numbers; always equals `passed`.
    pub fn recheck(&self) -> bool {
        self.relation.holds(self.measured, self.bound, self.tolerance)
    }
}

/// Tolerances of the identity and inequality checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Absolute FEM element size.
    pub mesh_h: f64,
    /// Relative tolerance of scalar identities (homogeneity, translation,
    /// support and divergence identities, the two bounds).
    pub identity_tol: f64,
    /// Relative total-variation tolerance when two torsion measures are compared.
    pub measure_tol: f64,
    /// Relative tolerance of the Hadamard formula.
    pub hadamard_tol: f64,
    /// Relative slack of the Brunn–Minkowski and Minkowski inequalities.
    pub slack: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            mesh_h: crate::torsion::DEFAULT_MESH_H,
            identity_tol: 1e-2,
            measure_tol: 2e-2,
            hadamard_tol: 2e-2,
            slack: 1e-3,
        }
    }
}

/// Worker pool for independent solves, capped by `TORSMINK_THREADS` when set.
pub fn worker_pool() -> rayon::ThreadPool {
    let threads = std::env::var("TORSMINK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("rayon thread pool")
}
