use serde::{Deserialize, Serialize};

use crate::ObjectiveVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub x: Vec<f64>,
    pub f: ObjectiveVector,
}

/// External population of mutually non-dominated solutions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops every entry dominated by `f`, then inserts `(x, f)` unless an
    /// entry dominates it or already has exactly the same objectives.
    /// Returns whether the candidate was inserted.
    pub fn update(&mut self, x: &[f64], f: ObjectiveVector) -> bool {
        if self.entries.iter().any(|e| e.f.dominates(&f) || e.f == f) {
            return false;
        }
        self.entries.retain(|e| !f.dominates(&e.f));
        self.entries.push(ArchiveEntry { x: x.to_vec(), f });
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.f).collect()
    }

    /// Entries sorted by `f1` ascending (then `f2`), the order used for export.
    pub fn sorted(&self) -> Vec<ArchiveEntry> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| a.f.f1.total_cmp(&b.f.f1).then(a.f.f2.total_cmp(&b.f.f2)));
        v
    }

    /// True when no entry dominates or duplicates another.
    pub fn is_mutually_non_dominated(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !(a.f.dominates(&b.f) || a.f == b.f))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(a: f64, b: f64) -> ObjectiveVector {
        ObjectiveVector::new(a, b)
    }

    #[test]
    fn dominated_entry_is_replaced() {
        let mut ep = Archive::new();
        ep.update(&[0.1], f(1.0, 1.0));
        assert!(ep.update(&[0.2], f(0.0, 0.0)));
        assert_eq!(ep.objectives(), vec![f(0.0, 0.0)]);
    }

    #[test]
    fn incomparable_entries_coexist() {
        let mut ep = Archive::new();
        ep.update(&[0.1], f(1.0, 1.0));
        ep.update(&[0.2], f(2.0, 0.0));
        assert_eq!(ep.objectives(), vec![f(1.0, 1.0), f(2.0, 0.0)]);
    }

    #[test]
    fn duplicates_are_rejected() {
        let mut ep = Archive::new();
        ep.update(&[0.1], f(0.0, 0.0));
        assert!(!ep.update(&[0.9], f(0.0, 0.0)));
        assert_eq!(ep.len(), 1);
        assert_eq!(ep.entries()[0].x, vec![0.1]);
    }

    #[test]
    fn dominated_candidate_is_rejected() {
        let mut ep = Archive::new();
        ep.update(&[0.1], f(0.0, 0.0));
        assert!(!ep.update(&[0.2], f(0.0, 1.0)));
        assert_eq!(ep.len(), 1);
    }

    proptest! {
        #[test]
        fn stays_non_dominated(points in prop::collection::vec((0u8..20, 0u8..20), 1..80)) {
            let mut ep = Archive::new();
            for (a, b) in &points {
                ep.update(&[], f(*a as f64, *b as f64));
                prop_assert!(ep.is_mutually_non_dominated());
            }
            // Every inserted point is either in the archive or weakly dominated by it.
            for (a, b) in &points {
                let p = f(*a as f64, *b as f64);
                prop_assert!(ep.entries().iter().any(|e| e.f == p || e.f.dominates(&p)));
            }
        }
    }
}
