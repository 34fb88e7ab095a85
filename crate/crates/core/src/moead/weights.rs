use serde::{Deserialize, Serialize};

use super::MoeadError;
use crate::ObjectiveVector;

/// Lower clamp for each weight coordinate so both stay strictly inside (0, 1).
pub const WEIGHT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w1: f64,
    pub w2: f64,
}

impl WeightVector {
    fn distance(&self, other: &WeightVector) -> f64 {
        (self.w1 - other.w1).hypot(self.w2 - other.w2)
    }
}

/// Ideal point `z*`: the best value seen so far in each objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub z1: f64,
    pub z2: f64,
}

impl ReferencePoint {
    pub fn from_objectives(f: &ObjectiveVector) -> Self {
        Self { z1: f.f1, z2: f.f2 }
    }

    /// Coordinatewise minimum with `f`.
    pub fn updated(self, f: &ObjectiveVector) -> Self {
        Self {
            z1: self.z1.min(f.f1),
            z2: self.z2.min(f.f2),
        }
    }
}

/// Das-Dennis lattice for two objectives, ascending in `w1`, with the two
/// endpoints pulled in to `[WEIGHT_EPS, 1 - WEIGHT_EPS]`.
pub fn das_dennis_weights(n: usize) -> Result<Vec<WeightVector>, MoeadError> {
    if n < 2 {
        return Err(MoeadError::InvalidParams(format!(
            "need at least 2 weight vectors, got {n}"
        )));
    }
    Ok((0..n)
        .map(|j| {
            let w1 = (j as f64 / (n - 1) as f64).clamp(WEIGHT_EPS, 1.0 - WEIGHT_EPS);
            WeightVector { w1, w2: 1.0 - w1 }
        })
        .collect())
}

/// For each weight, the indices of its `s` nearest weights (itself included),
/// ties broken toward the lower index, returned in ascending index order.
pub fn build_neighborhoods(weights: &[WeightVector], s: usize) -> Vec<Vec<usize>> {
    let s = s.min(weights.len());
    weights
        .iter()
        .map(|w| {
            // Distances quantized to 1e-12 so rounding noise cannot break exact lattice ties.
            let mut order: Vec<(i64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(i, other)| ((w.distance(other) * 1e12).round() as i64, i))
                .collect();
            order.sort_unstable();
            let mut hood: Vec<usize> = order.into_iter().take(s).map(|(_, i)| i).collect();
            hood.sort_unstable();
            hood
        })
        .collect()
}

/// Tchebycheff scalarization `max(w1 (f1 - z1), w2 (f2 - z2))`.
pub fn tchebycheff(f: &ObjectiveVector, w: &WeightVector, z: &ReferencePoint) -> f64 {
    (w.w1 * (f.f1 - z.z1)).max(w.w2 * (f.f2 - z.z2))
}
