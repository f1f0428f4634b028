use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::UnitVector;
use crate::error::{Error, Result};

/// Atoms closer than this (radians) are the same atom.
pub const NORMAL_MERGE_TOL: f64 = 1e-9;

/// Slack below π that still counts as a half-circle gap.
const HEMISPHERE_SLACK: f64 = 1e-12;

/// A finite measure `Σ c_i δ_{ξ_i}` on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    normals: Vec<UnitVector>,
    weights: Vec<f64>,
}

/// Validates and canonicalizes atoms. Near-coincident normals are merged
/// into the first occurrence with their weights summed.
pub fn build_measure(normals: &[UnitVector], weights: &[f64]) -> Result<DiscreteMeasure> {
    if normals.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} normals but {} weights",
            normals.len(),
            weights.len()
        )));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    let mut merged_normals: Vec<UnitVector> = Vec::with_capacity(normals.len());
    let mut merged_weights: Vec<f64> = Vec::with_capacity(normals.len());
    for (&n, &w) in normals.iter().zip(weights) {
        match merged_normals
            .iter()
            .position(|&m| m.angular_distance(n) <= NORMAL_MERGE_TOL)
        {
            Some(k) => merged_weights[k] += w,
            None => {
                merged_normals.push(n);
                merged_weights.push(w);
            }
        }
    }
    if merged_normals.len() < 3 {
        return Err(Error::TooFewNormals(merged_normals.len()));
    }
    let m = DiscreteMeasure {
        normals: merged_normals,
        weights: merged_weights,
    };
    let (ok, max_gap) = hemisphere_check(&m);
    if !ok {
        return Err(Error::HemisphereViolation { max_gap });
    }
    Ok(m)
}

/// `(true, gap)` iff the largest angular gap between consecutive atoms is
/// strictly below π, i.e. no closed half-circle carries the whole measure.
pub fn hemisphere_check(m: &DiscreteMeasure) -> (bool, f64) {
    let gap = max_angular_gap(&m.normals);
    (gap < PI - HEMISPHERE_SLACK, gap)
}

pub(crate) fn max_angular_gap(normals: &[UnitVector]) -> f64 {
    if normals.is_empty() {
        return 2.0 * PI;
    }
    let mut angles: Vec<f64> = normals.iter().map(|u| u.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    angles
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap, f64::max)
}

/// On-disk form: atoms given either as normals or as angles in radians.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    normals: Option<Vec<UnitVector>>,
    angles: Option<Vec<f64>>,
    weights: Vec<f64>,
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = MeasureFile::deserialize(d)?;
        let built = match (file.normals, file.angles) {
            (Some(normals), None) => build_measure(&normals, &file.weights),
            (None, Some(angles)) => DiscreteMeasure::from_angles(&angles, &file.weights),
            _ => return Err(D::Error::custom("exactly one of `normals` or `angles` is required")),
        };
        built.map_err(D::Error::custom)
    }
}

impl DiscreteMeasure {
    pub fn new(normals: &[UnitVector], weights: &[f64]) -> Result<Self> {
        build_measure(normals, weights)
    }

    pub fn from_angles(angles: &[f64], weights: &[f64]) -> Result<Self> {
        let normals: Vec<UnitVector> = angles.iter().map(|&a| UnitVector::from_angle(a)).collect();
        build_measure(&normals, weights)
    }

    /// `count` equally spaced atoms of equal weight, first atom at angle `phase`.
    pub fn regular(count: usize, weight: f64, phase: f64) -> Result<Self> {
        let angles: Vec<f64> = (0..count)
            .map(|k| phase + 2.0 * PI * k as f64 / count as f64)
            .collect();
        Self::from_angles(&angles, &vec![weight; count])
    }

    pub fn normals(&self) -> &[UnitVector] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Rebuilds with the weights multiplied atom-wise by `factors`.
    pub fn reweighted(&self, factors: &[f64]) -> Result<Self> {
        let w: Vec<f64> = self.weights.iter().zip(factors).map(|(a, b)| a * b).collect();
        build_measure(&self.normals, &w)
    }

    /// `Σ c_i (u·ξ_i)_+^p`, the lower-bound integrand for circumradius estimates.
    pub fn positive_moment(&self, u: UnitVector, p: f64) -> f64 {
        self.normals
            .iter()
            .zip(&self.weights)
            .map(|(xi, c)| c * u.dot(xi.vec()).max(0.0).powf(p))
            .sum()
    }
}
