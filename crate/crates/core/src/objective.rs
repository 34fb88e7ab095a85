use serde::{Deserialize, Serialize};

/// A bi-objective value pair, both coordinates minimized.
///
/// For the ISAC problem `f1` is the negated network utility and `f2` is the
/// natural log of the summed per-user CRB traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    /// Pareto dominance under minimization: no worse in both, strictly better in one.
    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        self.f1 <= other.f1 && self.f2 <= other.f2 && (self.f1 < other.f1 || self.f2 < other.f2)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.f1, self.f2]
    }
}

impl From<[f64; 2]> for ObjectiveVector {
    fn from(v: [f64; 2]) -> Self {
        Self { f1: v[0], f2: v[1] }
    }
}
