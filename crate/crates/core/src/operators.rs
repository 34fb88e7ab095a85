//! Classical offspring operators on the unit hypercube.
//!
//! * [`ga_offspring`] applies simulated binary crossover, then polynomial mutation.
//! * [`de_offspring`] is DE/rand/1/bin.
//! * [`random_offspring`] samples uniformly, as a control baseline.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::model::clamp_unit;
use crate::moead::{OffspringOperator, OperatorError, ReproductionContext};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaParams {
    pub sbx_eta: f64,
    pub mut_eta: f64,
    /// Per-gene mutation probability; `None` means `1 / dim`.
    pub mut_prob: Option<f64>,
    pub crossover_prob: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            sbx_eta: 20.0,
            mut_eta: 20.0,
            mut_prob: None,
            crossover_prob: 0.9,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.sbx_eta > 0.0 && self.mut_eta > 0.0) {
            return Err("distribution indices must be positive".into());
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.crossover_prob) || self.mut_prob.is_some_and(|p| !unit.contains(&p)) {
            return Err("probabilities must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeParams {
    /// Differential weight `F`.
    pub f: f64,
    /// Binomial crossover rate `CR`.
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self { f: 0.5, cr: 0.9 }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.f > 0.0 && self.f <= 2.0) {
            return Err(format!("F must be in (0, 2], got {}", self.f));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(format!("CR must be in [0, 1], got {}", self.cr));
        }
        Ok(())
    }
}

/// SBX crossover of two parents within `[0, 1]`.
fn sbx(p1: &[f64], p2: &[f64], eta: f64, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for i in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[i] - p2[i]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if p1[i] < p2[i] { (p1[i], p2[i]) } else { (p2[i], p1[i]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let beta_lo = 1.0 + 2.0 * y1 / (y2 - y1);
        let beta_hi = 1.0 + 2.0 * (1.0 - y2) / (y2 - y1);
        let lo = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
        let hi = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
        let (lo, hi) = (clamp_unit(lo), clamp_unit(hi));
        if rng.random::<f64>() <= 0.5 {
            c1[i] = hi;
            c2[i] = lo;
        } else {
            c1[i] = lo;
            c2[i] = hi;
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation within `[0, 1]`.
fn polynomial_mutation(x: &mut [f64], eta: f64, prob: f64, rng: &mut Rng) {
    let pow = 1.0 / (eta + 1.0);
    for v in x.iter_mut() {
        if prob <= 0.0 || rng.random::<f64>() >= prob {
            continue;
        }
        let y = *v;
        let u: f64 = rng.random();
        let delta = if u < 0.5 {
            let xy = 1.0 - y;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let xy = y;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = clamp_unit(y + delta);
    }
}

/// Genetic offspring: two parents picked uniformly, SBX with probability
/// `crossover_prob`, then polynomial mutation. A single parent is paired with itself.
pub fn ga_offspring(parents: &[&[f64]], n_offspring: usize, params: &GaParams, rng: &mut Rng) -> Vec<Vec<f64>> {
    let Some(first) = parents.first() else {
        return Vec::new();
    };
    let dim = first.len();
    let mut_prob = params.mut_prob.unwrap_or(if dim == 0 { 0.0 } else { 1.0 / dim as f64 });
    let mut out = Vec::with_capacity(n_offspring);
    while out.len() < n_offspring {
        let (a, b) = if parents.len() < 2 {
            (parents[0], parents[0])
        } else {
            let pick = sample(rng, parents.len(), 2);
            (parents[pick.index(0)], parents[pick.index(1)])
        };
        let (c1, c2) = if rng.random::<f64>() < params.crossover_prob {
            sbx(a, b, params.sbx_eta, rng)
        } else {
            (a.to_vec(), b.to_vec())
        };
        for mut c in [c1, c2] {
            if out.len() == n_offspring {
                break;
            }
            polynomial_mutation(&mut c, params.mut_eta, mut_prob, rng);
            c.iter_mut().for_each(|v| *v = clamp_unit(*v));
            out.push(c);
        }
    }
    out
}

/// DE/rand/1/bin: `v = a + F (b - c)` from three distinct donors, crossed
/// binomially with the best parent (`parents[0]`). Needs four parents;
/// otherwise falls back to [`ga_offspring`] with default settings.
pub fn de_offspring(parents: &[&[f64]], n_offspring: usize, params: &DeParams, rng: &mut Rng) -> Vec<Vec<f64>> {
    if parents.len() < 4 {
        return ga_offspring(parents, n_offspring, &GaParams::default(), rng);
    }
    let base = parents[0];
    let dim = base.len();
    (0..n_offspring)
        .map(|_| {
            let pick = sample(rng, parents.len() - 1, 3);
            let [a, b, c] = [0, 1, 2].map(|i| parents[pick.index(i) + 1]);
            let forced = rng.random_range(0..dim.max(1));
            (0..dim)
                .map(|i| {
                    let v = if i == forced || rng.random::<f64>() < params.cr {
                        a[i] + params.f * (b[i] - c[i])
                    } else {
                        base[i]
                    };
                    clamp_unit(v)
                })
                .collect()
        })
        .collect()
}

/// `n_offspring` i.i.d. uniform points in `[0, 1]^dim`.
pub fn random_offspring(dim: usize, n_offspring: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..n_offspring)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn parent_slices<'a>(ctx: &'a ReproductionContext<'_>) -> Vec<&'a [f64]> {
    ctx.parents.iter().map(|p| p.x.as_slice()).collect()
}

#[derive(Debug, Clone, Default)]
pub struct GaOperator {
    pub params: GaParams,
}

impl OffspringOperator for GaOperator {
    fn name(&self) -> &str {
        "moead-ga"
    }

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
        let parents = parent_slices(ctx);
        if parents.is_empty() {
            return Ok(random_offspring(ctx.dim, ctx.n_offspring, rng));
        }
        Ok(ga_offspring(&parents, ctx.n_offspring, &self.params, rng))
    }
}

#[derive(Debug, Clone, Default)]
pub struct DeOperator {
    pub params: DeParams,
}

impl OffspringOperator for DeOperator {
    fn name(&self) -> &str {
        "moead-de"
    }

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
        let parents = parent_slices(ctx);
        if parents.is_empty() {
            return Ok(random_offspring(ctx.dim, ctx.n_offspring, rng));
        }
        Ok(de_offspring(&parents, ctx.n_offspring, &self.params, rng))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RandomOperator;

impl OffspringOperator for RandomOperator {
    fn name(&self) -> &str {
        "random"
    }

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
        Ok(random_offspring(ctx.dim, ctx.n_offspring, rng))
    }
}
