use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::prompt::format_point;
use super::{BackendError, ChatBackend};
use crate::model::clamp_unit;
use crate::rng::Rng;

/// Standard deviation of the per-component Gaussian noise.
pub const MOCK_NOISE_STD: f64 = 0.05;

fn number_after(prompt: &str, key: &str) -> Option<usize> {
    let start = prompt.find(key)? + key.len();
    let digits: String = prompt[start..].chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

fn example_points(prompt: &str) -> Vec<(Vec<f64>, f64)> {
    prompt
        .lines()
        .filter_map(|line| {
            let rest = line.trim().strip_prefix("point:")?;
            let (point, fitness) = rest.split_once("fitness:")?;
            let x = point
                .split(',')
                .map(|t| t.trim().parse::<f64>().ok())
                .collect::<Option<Vec<f64>>>()?;
            Some((x, fitness.trim().parse::<f64>().ok()?))
        })
        .collect()
}

/// Offline stand-in for the LLM.
///
/// Reads the example points back out of the prompt, keeps the two with the
/// lowest fitness and answers `n_o` lines of
/// `u * best + (1 - u) * second + N(0, 0.05^2)` with `u ~ U[0, 1]` per line,
/// clamped and written with four decimals. Without examples it answers with
/// uniform random points.
pub fn mock_backend(prompt: &str, rng: &mut Rng) -> String {
    let n_o = number_after(prompt, "Generate exactly ").unwrap_or(1);
    let mut examples = example_points(prompt);
    examples.sort_by(|a, b| a.1.total_cmp(&b.1));
    let dim = number_after(prompt, "D = ")
        .or_else(|| examples.first().map(|e| e.0.len()))
        .unwrap_or(0);
    let noise = Normal::new(0.0, MOCK_NOISE_STD).expect("valid normal");

    let lines: Vec<String> = (0..n_o)
        .map(|_| {
            let child: Vec<f64> = match examples.as_slice() {
                [] => (0..dim).map(|_| rng.random::<f64>()).collect(),
                [only] => only.0.iter().map(|&v| clamp_unit(v + noise.sample(rng))).collect(),
                [best, second, ..] => {
                    let u: f64 = rng.random();
                    best.0
                        .iter()
                        .zip(&second.0)
                        .map(|(&a, &b)| clamp_unit(u * a + (1.0 - u) * b + noise.sample(rng)))
                        .collect()
                }
            };
            format_point(&child)
        })
        .collect();
    lines.join("\n")
}

/// [`ChatBackend`] wrapper around [`mock_backend`].
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    pub calls: usize,
}

impl ChatBackend for MockBackend {
    fn complete(&mut self, prompt: &str, rng: &mut Rng) -> Result<String, BackendError> {
        self.calls += 1;
        Ok(mock_backend(prompt, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::parse_response;
    use crate::llm::prompt::{build_prompt, PromptContext, PromptParent};
    use crate::moead::{ReferencePoint, WeightVector};
    use crate::rng::from_seed;
    use crate::ObjectiveVector;

    fn ctx(parents: Vec<(Vec<f64>, f64)>, dim: usize, n_o: usize) -> PromptContext {
        PromptContext {
            subproblem: 0,
            weight: WeightVector { w1: 0.3, w2: 0.7 },
            reference: ReferencePoint { z1: -1.0, z2: -1.0 },
            parents: parents
                .into_iter()
                .map(|(x, fitness)| PromptParent {
                    x,
                    f: ObjectiveVector::new(0.0, 0.0),
                    fitness,
                })
                .collect(),
            dim,
            n_offspring: n_o,
        }
    }

    #[test]
    fn output_is_clamped_and_parseable() {
        let prompt = build_prompt(&ctx(
            vec![
                (vec![0.0, 1.0, 0.5, 0.99], 0.1),
                (vec![0.01, 0.98, 0.5, 1.0], 0.2),
                (vec![0.5; 4], 0.3),
            ],
            4,
            3,
        ));
        let text = mock_backend(&prompt, &mut from_seed(4));
        let pts = parse_response(&text, 3, 4).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        // Blend of the two best stays near them, far from the third parent's 0.5 on the first axis.
        assert!(pts.iter().all(|p| p[0] < 0.3));
    }

    #[test]
    fn same_seed_same_text() {
        let prompt = build_prompt(&ctx(vec![(vec![0.2; 8], 1.0), (vec![0.6; 8], 2.0)], 8, 2));
        assert_eq!(
            mock_backend(&prompt, &mut from_seed(9)),
            mock_backend(&prompt, &mut from_seed(9))
        );
        assert_ne!(
            mock_backend(&prompt, &mut from_seed(9)),
            mock_backend(&prompt, &mut from_seed(10))
        );
    }

    #[test]
    fn picks_two_lowest_fitness_examples() {
        // Listed worst-first on purpose.
        let prompt = build_prompt(&ctx(
            vec![(vec![0.9; 2], 5.0), (vec![0.1; 2], 0.5), (vec![0.12; 2], 0.7)],
            2,
            4,
        ));
        let pts = parse_response(&mock_backend(&prompt, &mut from_seed(1)), 4, 2).unwrap();
        assert!(pts.iter().flatten().all(|&v| v < 0.4));
    }

    #[test]
    fn no_examples_gives_uniform_lines() {
        let prompt = build_prompt(&ctx(vec![], 6, 2));
        let pts = parse_response(&mock_backend(&prompt, &mut from_seed(2)), 2, 6).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.len() == 6));
    }
}
