//! Decomposition-based multi-objective evolutionary framework.
//!
//! The bi-objective problem is split into `N` Tchebycheff subproblems with
//! evenly spaced weights. Each generation visits the subproblems in index
//! order: select parents, ask the [`OffspringOperator`] for `n_o` children,
//! then fold every child into the ideal point, the neighboring incumbents and
//! the external archive.

mod archive;
mod run;
mod weights;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{Archive, ArchiveEntry};
pub use run::{
    run, run_observed, select_parents, update_neighbors, GenerationRecord, NoopObserver, RunObserver, RunResult,
    Subproblem,
};
pub use weights::{build_neighborhoods, das_dennis_weights, tchebycheff, ReferencePoint, WeightVector, WEIGHT_EPS};

use crate::rng::Rng;
use crate::ObjectiveVector;

/// A bi-objective minimization problem over the unit hypercube.
pub trait Problem: Sync {
    fn dim(&self) -> usize;

    /// Objectives of `x`; `x` always has length `dim()` with components in `[0, 1]`.
    fn evaluate(&self, x: &[f64]) -> ObjectiveVector;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoeadError {
    #[error("invalid algorithm parameters: {0}")]
    InvalidParams(String),
}

/// Failure reported by an offspring operator; the framework substitutes
/// genetic offspring and keeps going.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("offspring operator failed: {0}")]
pub struct OperatorError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgoParams {
    /// Number of subproblems `N`.
    pub population: usize,
    /// Neighborhood size `S`.
    pub neighbor_size: usize,
    /// Parents per mating event `d`.
    pub parents: usize,
    /// Offspring per operator call `n_o`.
    pub offspring: usize,
    /// Generations `N_iter`.
    pub iterations: usize,
    /// Probability of mating within the neighborhood.
    pub neighbor_prob: f64,
    pub seed: u64,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            population: 50,
            neighbor_size: 15,
            parents: 10,
            offspring: 2,
            iterations: 260,
            neighbor_prob: 0.9,
            seed: 1,
        }
    }
}

impl AlgoParams {
    pub fn validate(&self) -> Result<(), MoeadError> {
        let bad = |m: String| Err(MoeadError::InvalidParams(m));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if !(1..=self.population).contains(&self.neighbor_size) {
            return bad(format!(
                "neighbor_size must be in 1..={}, got {}",
                self.population, self.neighbor_size
            ));
        }
        if !(1..=self.population).contains(&self.parents) {
            return bad(format!(
                "parents must be in 1..={}, got {}",
                self.population, self.parents
            ));
        }
        if self.offspring == 0 {
            return bad("offspring must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.neighbor_prob) {
            return bad(format!("neighbor_prob must be in [0, 1], got {}", self.neighbor_prob));
        }
        Ok(())
    }

    /// `N + N_iter * N * n_o`.
    pub fn evaluation_budget(&self) -> usize {
        self.population + self.iterations * self.population * self.offspring
    }
}

/// One parent handed to an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Parent {
    pub x: Vec<f64>,
    pub f: ObjectiveVector,
    /// Tchebycheff value for the subproblem being reproduced.
    pub fitness: f64,
}

/// What an operator sees for one mating event. Parents are best-first.
#[derive(Debug, Clone)]
pub struct ReproductionContext<'a> {
    pub generation: usize,
    pub subproblem: usize,
    pub weight: WeightVector,
    pub reference: ReferencePoint,
    pub parents: &'a [Parent],
    pub dim: usize,
    pub n_offspring: usize,
}

/// Generates offspring for one subproblem.
///
/// Implementations should return `n_offspring` vectors of length `dim`; the
/// framework clamps components into `[0, 1]`, drops malformed vectors and pads
/// any shortfall with genetic offspring.
pub trait OffspringOperator {
    fn name(&self) -> &str;

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError>;
}

impl<T: OffspringOperator + ?Sized> OffspringOperator for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
        (**self).reproduce(ctx, rng)
    }
}
