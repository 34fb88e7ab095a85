use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{
    build_neighborhoods, das_dennis_weights, tchebycheff, AlgoParams, Archive, ArchiveEntry, MoeadError,
    OffspringOperator, Parent, Problem, ReferencePoint, ReproductionContext, WeightVector,
};
use crate::model::clamp_unit;
use crate::operators::GaOperator;
use crate::rng::{self, Rng};
use crate::ObjectiveVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub index: usize,
    pub weight: WeightVector,
    /// Ascending indices of the `S` nearest weights, self included.
    pub neighbors: Vec<usize>,
    pub incumbent_x: Vec<f64>,
    pub incumbent_f: ObjectiveVector,
}

/// State after one generation (generation 0 is the initial population).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Cumulative objective evaluations.
    pub evaluations: usize,
    pub reference: ReferencePoint,
    pub archive: Vec<ArchiveEntry>,
    /// Cumulative operator calls that failed or returned malformed output.
    pub operator_failures: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub archive: Archive,
    pub population: Vec<Subproblem>,
    pub reference: ReferencePoint,
    pub trace: Vec<GenerationRecord>,
    pub evaluations: usize,
    pub operator_failures: usize,
}

/// Hooks for auditing a run from tests and tools.
pub trait RunObserver {
    fn on_evaluation(&mut self, _x: &[f64], _f: &ObjectiveVector) {}

    /// An incumbent of `subproblem` was replaced; fitness values use the
    /// reference point current at the moment of replacement.
    fn on_replacement(&mut self, _subproblem: usize, _old_fitness: f64, _new_fitness: f64) {}

    fn on_generation(&mut self, _record: &GenerationRecord) {}
}

pub struct NoopObserver;

impl RunObserver for NoopObserver {}

/// Picks `d` distinct parents for subproblem `j`.
///
/// One Bernoulli(`neighbor_prob`) draw chooses the mating pool: the
/// neighborhood or the whole population (also used when the neighborhood is
/// smaller than `d`). The result is sorted best-first by the Tchebycheff value
/// of subproblem `j`, keeping sampling order among ties.
pub fn select_parents(
    j: usize,
    pop: &[Subproblem],
    params: &AlgoParams,
    z: &ReferencePoint,
    rng: &mut Rng,
) -> Vec<Parent> {
    let all: Vec<usize> = (0..pop.len()).collect();
    let mut pool = if rng.random_bool(params.neighbor_prob) {
        &pop[j].neighbors
    } else {
        &all
    };
    if pool.len() < params.parents {
        pool = &all;
    }
    let d = params.parents.min(pool.len());
    let weight = pop[j].weight;
    let mut parents: Vec<Parent> = rand::seq::index::sample(rng, pool.len(), d)
        .into_iter()
        .map(|i| {
            let sp = &pop[pool[i]];
            Parent {
                x: sp.incumbent_x.clone(),
                f: sp.incumbent_f,
                fitness: tchebycheff(&sp.incumbent_f, &weight, z),
            }
        })
        .collect();
    parents.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    parents
}

/// Replaces every neighbor incumbent of `j` that the offspring matches or
/// beats on that neighbor's subproblem. Returns the number replaced.
pub fn update_neighbors(
    j: usize,
    x: &[f64],
    f: &ObjectiveVector,
    pop: &mut [Subproblem],
    z: &ReferencePoint,
    observer: &mut dyn RunObserver,
) -> usize {
    let hood = pop[j].neighbors.clone();
    let mut replaced = 0;
    for i in hood {
        let sp = &mut pop[i];
        let new_fit = tchebycheff(f, &sp.weight, z);
        let old_fit = tchebycheff(&sp.incumbent_f, &sp.weight, z);
        if new_fit <= old_fit {
            sp.incumbent_x.clear();
            sp.incumbent_x.extend_from_slice(x);
            sp.incumbent_f = *f;
            observer.on_replacement(i, old_fit, new_fit);
            replaced += 1;
        }
    }
    replaced
}

/// Runs the full decomposition loop with `operator` as the reproduction step.
pub fn run<P, O>(problem: &P, operator: &mut O, params: &AlgoParams) -> Result<RunResult, MoeadError>
where
    P: Problem + ?Sized,
    O: OffspringOperator + ?Sized,
{
    run_observed(problem, operator, params, &mut NoopObserver)
}

pub fn run_observed<P, O>(
    problem: &P,
    operator: &mut O,
    params: &AlgoParams,
    observer: &mut dyn RunObserver,
) -> Result<RunResult, MoeadError>
where
    P: Problem + ?Sized,
    O: OffspringOperator + ?Sized,
{
    params.validate()?;
    let n = params.population;
    let dim = problem.dim();
    let weights = das_dennis_weights(n)?;
    let hoods = build_neighborhoods(&weights, params.neighbor_size);

    let mut init_rng = rng::stream(params.seed, 0, n, 0);
    let mut pop: Vec<Subproblem> = weights
        .iter()
        .zip(hoods)
        .enumerate()
        .map(|(index, (&weight, neighbors))| {
            let x: Vec<f64> = (0..dim).map(|_| init_rng.random::<f64>()).collect();
            let f = problem.evaluate(&x);
            observer.on_evaluation(&x, &f);
            Subproblem {
                index,
                weight,
                neighbors,
                incumbent_x: x,
                incumbent_f: f,
            }
        })
        .collect();

    let mut z = ReferencePoint::from_objectives(&pop[0].incumbent_f);
    let mut archive = Archive::new();
    for sp in &pop {
        z = z.updated(&sp.incumbent_f);
        archive.update(&sp.incumbent_x, sp.incumbent_f);
    }
    let mut evaluations = n;
    let mut failures = 0;
    let mut trace = Vec::with_capacity(params.iterations + 1);
    let record = GenerationRecord {
        generation: 0,
        evaluations,
        reference: z,
        archive: archive.entries().to_vec(),
        operator_failures: 0,
    };
    observer.on_generation(&record);
    trace.push(record);

    let mut fallback = GaOperator::default();
    for generation in 1..=params.iterations {
        for j in 0..n {
            let mut rng = rng::stream(params.seed, generation, n, j);
            let parents = select_parents(j, &pop, params, &z, &mut rng);
            let ctx = ReproductionContext {
                generation,
                subproblem: j,
                weight: pop[j].weight,
                reference: z,
                parents: &parents,
                dim,
                n_offspring: params.offspring,
            };
            let (children, failed) = reproduce_checked(operator, &mut fallback, &ctx, &mut rng);
            if failed {
                failures += 1;
            }
            for child in children {
                let f = problem.evaluate(&child);
                observer.on_evaluation(&child, &f);
                evaluations += 1;
                z = z.updated(&f);
                update_neighbors(j, &child, &f, &mut pop, &z, observer);
                archive.update(&child, f);
            }
        }
        let record = GenerationRecord {
            generation,
            evaluations,
            reference: z,
            archive: archive.entries().to_vec(),
            operator_failures: failures,
        };
        observer.on_generation(&record);
        trace.push(record);
    }

    Ok(RunResult {
        archive,
        population: pop,
        reference: z,
        trace,
        evaluations,
        operator_failures: failures,
    })
}

/// Calls the operator and coerces its output into exactly `n_offspring`
/// clamped vectors of length `dim`. The flag reports an error or malformed output.
fn reproduce_checked<O: OffspringOperator + ?Sized>(
    operator: &mut O,
    fallback: &mut GaOperator,
    ctx: &ReproductionContext<'_>,
    rng: &mut Rng,
) -> (Vec<Vec<f64>>, bool) {
    let (mut children, mut failed) = match operator.reproduce(ctx, rng) {
        Ok(out) => {
            let total = out.len();
            let valid: Vec<Vec<f64>> = out.into_iter().filter(|c| c.len() == ctx.dim).collect();
            let malformed = valid.len() != total || valid.len() < ctx.n_offspring;
            (valid, malformed)
        }
        Err(e) => {
            log::warn!(
                "generation {} subproblem {}: {e}; using genetic fallback",
                ctx.generation,
                ctx.subproblem
            );
            (Vec::new(), true)
        }
    };
    children.truncate(ctx.n_offspring);
    if children.len() < ctx.n_offspring {
        let missing = ctx.n_offspring - children.len();
        match fallback.reproduce(ctx, rng) {
            Ok(extra) => children.extend(extra.into_iter().take(missing)),
            Err(_) => failed = true,
        }
    }
    while children.len() < ctx.n_offspring {
        children.push((0..ctx.dim).map(|_| rng.random::<f64>()).collect());
    }
    for c in &mut children {
        c.iter_mut().for_each(|v| *v = clamp_unit(*v));
    }
    (children, failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moead::OperatorError;

    /// Schaffer's single-variable problem on `[-5, 5]`.
    struct Schaffer;

    impl Problem for Schaffer {
        fn dim(&self) -> usize {
            1
        }

        fn evaluate(&self, x: &[f64]) -> ObjectiveVector {
            let v = -5.0 + 10.0 * x[0];
            ObjectiveVector::new(v * v, (v - 2.0) * (v - 2.0))
        }
    }

    fn population(fs: &[(f64, f64)], s: usize) -> Vec<Subproblem> {
        let weights = das_dennis_weights(fs.len()).unwrap();
        let hoods = build_neighborhoods(&weights, s);
        fs.iter()
            .zip(weights)
            .zip(hoods)
            .enumerate()
            .map(|(index, ((&(a, b), weight), neighbors))| Subproblem {
                index,
                weight,
                neighbors,
                incumbent_x: vec![index as f64 / 100.0],
                incumbent_f: ObjectiveVector::new(a, b),
            })
            .collect()
    }

    fn small_params(n: usize) -> AlgoParams {
        AlgoParams {
            population: n,
            neighbor_size: 15.min(n),
            parents: 10.min(n),
            offspring: 2,
            iterations: 5,
            neighbor_prob: 0.9,
            seed: 3,
        }
    }

    #[test]
    fn forced_neighborhood_selection() {
        let fs: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 50.0 - i as f64)).collect();
        let pop = population(&fs, 15);
        let params = AlgoParams {
            neighbor_prob: 1.0,
            ..AlgoParams::default()
        };
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        for seed in 0..20 {
            let mut rng = rng::from_seed(seed);
            let parents = select_parents(20, &pop, &params, &z, &mut rng);
            assert_eq!(parents.len(), 10);
            let hood: Vec<Vec<f64>> = pop[20].neighbors.iter().map(|&i| pop[i].incumbent_x.clone()).collect();
            assert!(parents.iter().all(|p| hood.contains(&p.x)));
            assert!(parents.windows(2).all(|w| w[0].fitness <= w[1].fitness));
            let mut xs: Vec<f64> = parents.iter().map(|p| p.x[0]).collect();
            xs.dedup();
            assert_eq!(xs.len(), 10);
        }
    }

    #[test]
    fn whole_population_selection_reaches_outside() {
        let fs: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 50.0 - i as f64)).collect();
        let pop = population(&fs, 15);
        let params = AlgoParams {
            neighbor_prob: 0.0,
            ..AlgoParams::default()
        };
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let mut outside = false;
        for seed in 0..20 {
            let mut rng = rng::from_seed(seed);
            for p in select_parents(0, &pop, &params, &z, &mut rng) {
                outside |= !pop[0].neighbors.contains(&((p.x[0] * 100.0).round() as usize));
            }
        }
        assert!(outside);
    }

    #[test]
    fn selection_is_seed_deterministic() {
        let fs: Vec<(f64, f64)> = (0..50).map(|i| ((i * 7 % 13) as f64, (i * 3 % 11) as f64)).collect();
        let pop = population(&fs, 15);
        let params = AlgoParams::default();
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let a = select_parents(7, &pop, &params, &z, &mut rng::from_seed(99));
        let b = select_parents(7, &pop, &params, &z, &mut rng::from_seed(99));
        assert_eq!(a, b);
    }

    #[test]
    fn small_neighborhood_falls_back_to_population() {
        let fs: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 10.0 - i as f64)).collect();
        let pop = population(&fs, 3);
        let params = AlgoParams {
            population: 10,
            neighbor_size: 3,
            parents: 5,
            neighbor_prob: 1.0,
            ..AlgoParams::default()
        };
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let parents = select_parents(4, &pop, &params, &z, &mut rng::from_seed(1));
        assert_eq!(parents.len(), 5);
    }

    #[test]
    fn dominating_offspring_replaces_whole_neighborhood() {
        let fs: Vec<(f64, f64)> = (0..20).map(|i| (1.0 + i as f64, 21.0 - i as f64)).collect();
        let mut pop = population(&fs, 5);
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let n = update_neighbors(
            10,
            &[0.5],
            &ObjectiveVector::new(0.0, 0.0),
            &mut pop,
            &z,
            &mut NoopObserver,
        );
        assert_eq!(n, 5);
        for &i in &pop[10].neighbors.clone() {
            assert_eq!(pop[i].incumbent_x, vec![0.5]);
        }
    }

    #[test]
    fn penalized_offspring_replaces_nothing() {
        let fs: Vec<(f64, f64)> = (0..20).map(|i| (1.0 + i as f64, 21.0 - i as f64)).collect();
        let mut pop = population(&fs, 5);
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let f = ObjectiveVector::new(1e12, 1e12);
        assert_eq!(update_neighbors(3, &[0.5], &f, &mut pop, &z, &mut NoopObserver), 0);
    }

    #[test]
    fn equal_fitness_replaces() {
        let fs = vec![(1.0, 1.0); 4];
        let mut pop = population(&fs, 4);
        let z = ReferencePoint { z1: 0.0, z2: 0.0 };
        let f = ObjectiveVector::new(1.0, 1.0);
        assert_eq!(update_neighbors(0, &[0.9], &f, &mut pop, &z, &mut NoopObserver), 4);
    }

    struct Uniform;

    impl OffspringOperator for Uniform {
        fn name(&self) -> &str {
            "uniform"
        }

        fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
            Ok((0..ctx.n_offspring)
                .map(|_| (0..ctx.dim).map(|_| rng.random::<f64>()).collect())
                .collect())
        }
    }

    struct Broken;

    impl OffspringOperator for Broken {
        fn name(&self) -> &str {
            "broken"
        }

        fn reproduce(&mut self, ctx: &ReproductionContext<'_>, _rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
            if ctx.subproblem.is_multiple_of(2) {
                Err(OperatorError("down".into()))
            } else {
                Ok(vec![vec![7.0, -3.0]])
            }
        }
    }

    #[test]
    fn zero_iterations_archive_is_initial_front() {
        let params = AlgoParams {
            iterations: 0,
            ..small_params(20)
        };
        let res = run(&Schaffer, &mut Uniform, &params).unwrap();
        assert_eq!(res.evaluations, 20);
        let mut expected = Archive::new();
        for sp in &res.population {
            expected.update(&sp.incumbent_x, sp.incumbent_f);
        }
        assert_eq!(res.archive, expected);
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn evaluation_count() {
        struct Count(usize);
        impl RunObserver for Count {
            fn on_evaluation(&mut self, _x: &[f64], _f: &ObjectiveVector) {
                self.0 += 1;
            }
        }
        let params = small_params(20);
        let mut count = Count(0);
        let res = run_observed(&Schaffer, &mut Uniform, &params, &mut count).unwrap();
        assert_eq!(res.evaluations, 20 + 5 * 20 * 2);
        assert_eq!(count.0, res.evaluations);
        assert_eq!(res.evaluations, params.evaluation_budget());
    }

    #[test]
    fn deterministic_under_seed() {
        let params = small_params(20);
        let a = run(&Schaffer, &mut Uniform, &params).unwrap();
        let b = run(&Schaffer, &mut Uniform, &params).unwrap();
        assert_eq!(a.archive, b.archive);
        assert_eq!(a.trace, b.trace);
        let c = run(&Schaffer, &mut Uniform, &AlgoParams { seed: 4, ..params }).unwrap();
        assert_ne!(a.archive, c.archive);
    }

    #[test]
    fn operator_failures_never_abort() {
        let params = small_params(10);
        let res = run(&Schaffer, &mut Broken, &params).unwrap();
        assert_eq!(res.evaluations, params.evaluation_budget());
        assert_eq!(res.operator_failures, 5 * 10);
        assert!(res.archive.entries().iter().all(|e| (0.0..=1.0).contains(&e.x[0])));
    }

    #[test]
    fn run_invariants_hold() {
        #[derive(Default)]
        struct Audit {
            min: Option<(f64, f64)>,
            bad_replacements: usize,
            bad_reference: usize,
            bad_archive: usize,
        }
        impl RunObserver for Audit {
            fn on_evaluation(&mut self, _x: &[f64], f: &ObjectiveVector) {
                let (a, b) = self.min.unwrap_or((f.f1, f.f2));
                self.min = Some((a.min(f.f1), b.min(f.f2)));
            }
            fn on_replacement(&mut self, _j: usize, old: f64, new: f64) {
                if new > old {
                    self.bad_replacements += 1;
                }
            }
            fn on_generation(&mut self, r: &GenerationRecord) {
                let (a, b) = self.min.unwrap();
                if r.reference.z1 > a || r.reference.z2 > b {
                    self.bad_reference += 1;
                }
                let mut ep = Archive::new();
                for e in &r.archive {
                    ep.update(&e.x, e.f);
                }
                if ep.len() != r.archive.len() || !ep.is_mutually_non_dominated() {
                    self.bad_archive += 1;
                }
            }
        }
        let mut audit = Audit::default();
        run_observed(&Schaffer, &mut GaOperator::default(), &small_params(30), &mut audit).unwrap();
        assert_eq!(audit.bad_replacements, 0);
        assert_eq!(audit.bad_reference, 0);
        assert_eq!(audit.bad_archive, 0);
    }
}
