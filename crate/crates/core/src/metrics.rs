//! Front normalization and 2-D hypervolume (minimization).

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

/// Reference point used on normalized fronts.
pub const NORMALIZED_REFERENCE: [f64; 2] = [1.1, 1.1];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("degenerate normalization bounds in objective {axis}: min {min} >= max {max}")]
    DegenerateBounds { axis: usize, min: f64, max: f64 },
    #[error("cannot derive normalization bounds from an empty point set")]
    Empty,
}

/// Per-objective affine map onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontNormalization {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl FrontNormalization {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Result<Self, MetricsError> {
        for axis in 0..2 {
            if !(min[axis] < max[axis]) || !min[axis].is_finite() || !max[axis].is_finite() {
                return Err(MetricsError::DegenerateBounds {
                    axis,
                    min: min[axis],
                    max: max[axis],
                });
            }
        }
        Ok(Self { min, max })
    }

    /// Coordinatewise bounds over a point set (typically the union of all compared fronts).
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a [f64; 2]>) -> Result<Self, MetricsError> {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut any = false;
        for p in points {
            any = true;
            for axis in 0..2 {
                min[axis] = min[axis].min(p[axis]);
                max[axis] = max[axis].max(p[axis]);
            }
        }
        if !any {
            return Err(MetricsError::Empty);
        }
        Self::new(min, max)
    }

    pub fn apply(&self, p: &[f64; 2]) -> [f64; 2] {
        [0, 1].map(|i| (p[i] - self.min[i]) / (self.max[i] - self.min[i]))
    }
}

/// Maps every point through `norm`; values outside `[0, 1]` are kept.
pub fn normalize_front(points: &[[f64; 2]], norm: &FrontNormalization) -> Vec<[f64; 2]> {
    points.iter().map(|p| norm.apply(p)).collect()
}

/// Exact hypervolume dominated by `points` and bounded by `reference`.
///
/// Points not strictly better than the reference in both coordinates add nothing.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        // Sorted by f1, so only points lowering the f2 staircase are non-dominated.
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

/// Monte-Carlo hypervolume: the dominated fraction of uniform samples in the
/// box spanned by the points' minimum corner and `reference`, times the box area.
pub fn hv_oracle_mc(points: &[[f64; 2]], reference: [f64; 2], samples: usize, rng: &mut Rng) -> f64 {
    if points.is_empty() || samples == 0 {
        return 0.0;
    }
    let lo = [0, 1].map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min));
    if lo[0] >= reference[0] || lo[1] >= reference[1] {
        return 0.0;
    }
    let area = (reference[0] - lo[0]) * (reference[1] - lo[1]);
    let hits = (0..samples)
        .filter(|_| {
            let s = [
                rng.random_range(lo[0]..reference[0]),
                rng.random_range(lo[1]..reference[1]),
            ];
            points.iter().any(|p| p[0] <= s[0] && p[1] <= s[1])
        })
        .count();
    area * hits as f64 / samples as f64
}
