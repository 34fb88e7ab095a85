use serde::{Deserialize, Serialize};

use crate::moead::{ReferencePoint, ReproductionContext, WeightVector};
use crate::ObjectiveVector;

/// Version tag of the bundled prompt template; bump on any wording change.
pub const PROMPT_TEMPLATE_VERSION: &str = "v1";

const PROMPT_TEMPLATE: &str = include_str!("../../assets/prompt_v1.txt");

/// Decimal places used for normalized variables in the prompt.
pub const PROMPT_DECIMALS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptParent {
    /// Normalized genome rounded to [`PROMPT_DECIMALS`] places.
    pub x: Vec<f64>,
    pub f: ObjectiveVector,
    pub fitness: f64,
}

/// Everything the prompt needs for one subproblem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub subproblem: usize,
    pub weight: WeightVector,
    pub reference: ReferencePoint,
    /// Sorted best-first by fitness; ties keep their input order.
    pub parents: Vec<PromptParent>,
    pub dim: usize,
    pub n_offspring: usize,
}

fn round_to(v: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (v.clamp(0.0, 1.0) * scale).round() / scale
}

impl PromptContext {
    pub fn from_reproduction(ctx: &ReproductionContext<'_>) -> Self {
        let mut parents: Vec<PromptParent> = ctx
            .parents
            .iter()
            .map(|p| PromptParent {
                x: p.x.iter().map(|&v| round_to(v, PROMPT_DECIMALS)).collect(),
                f: p.f,
                fitness: p.fitness,
            })
            .collect();
        parents.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        Self {
            subproblem: ctx.subproblem,
            weight: ctx.weight,
            reference: ctx.reference,
            parents,
            dim: ctx.dim,
            n_offspring: ctx.n_offspring,
        }
    }
}

/// Formats a normalized vector the way the prompt and the mock backend write it.
pub fn format_point(x: &[f64]) -> String {
    x.iter()
        .map(|v| format!("{:.*}", PROMPT_DECIMALS, v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Instantiates the three-section prompt (problem, examples, instructions).
pub fn build_prompt(ctx: &PromptContext) -> String {
    let examples = ctx
        .parents
        .iter()
        .map(|p| format!("point: {} fitness: {}", format_point(&p.x), p.fitness))
        .collect::<Vec<_>>()
        .join("\n");
    let pairs: [(&str, String); 10] = [
        ("{{num_uavs}}", (ctx.dim / 4).to_string()),
        ("{{dim}}", ctx.dim.to_string()),
        ("{{subproblem}}", ctx.subproblem.to_string()),
        ("{{w1}}", ctx.weight.w1.to_string()),
        ("{{w2}}", ctx.weight.w2.to_string()),
        ("{{z1}}", ctx.reference.z1.to_string()),
        ("{{z2}}", ctx.reference.z2.to_string()),
        ("{{num_examples}}", ctx.parents.len().to_string()),
        ("{{examples}}", examples),
        ("{{n_o}}", ctx.n_offspring.to_string()),
    ];
    pairs.iter().fold(PROMPT_TEMPLATE.to_string(), |text, (key, value)| {
        text.replace(key, value)
    })
}
