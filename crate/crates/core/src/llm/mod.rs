//! LLM-driven offspring generation.
//!
//! Each mating event becomes one stateless chat request: [`build_prompt`]
//! renders the subproblem and its parents, a [`ChatBackend`] answers, and
//! [`parse_response`] pulls the new points out of the reply. Failures are
//! retried and finally replaced by genetic offspring, so the evolutionary loop
//! always receives exactly `n_o` valid vectors.

mod http;
mod mock;
mod parse;
mod prompt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpBackend, LlmConfig, OPERATOR_ROLE};
pub use mock::{mock_backend, MockBackend, MOCK_NOISE_STD};
pub use parse::{parse_response, ParseError};
pub use prompt::{build_prompt, format_point, PromptContext, PromptParent, PROMPT_DECIMALS, PROMPT_TEMPLATE_VERSION};

use crate::moead::{OffspringOperator, OperatorError, ReproductionContext};
use crate::operators::GaOperator;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited,
    #[error("HTTP status {0}: {1}")]
    Status(u16, String),
    #[error("malformed completion: {0}")]
    InvalidResponse(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_) | BackendError::RateLimited)
    }
}

/// A text-in, text-out completion service.
pub trait ChatBackend {
    fn complete(&mut self, prompt: &str, rng: &mut Rng) -> Result<String, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&mut self, prompt: &str, rng: &mut Rng) -> Result<String, BackendError> {
        (**self).complete(prompt, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParseOutcome {
    /// All requested points were parsed.
    Complete { parsed: usize },
    /// Some points were parsed; the rest came from the fallback operator.
    Partial { parsed: usize },
    /// Every attempt failed; all points came from the fallback operator.
    Failed { reason: String },
}

/// Audit record of one operator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTranscript {
    pub generation: usize,
    pub subproblem: usize,
    pub prompt: String,
    /// Text of the last backend reply, if any attempt got one.
    pub raw_response: Option<String>,
    pub attempts: usize,
    pub outcome: ParseOutcome,
    pub fallback: bool,
}

/// Offspring plus the transcript of how they were obtained.
#[derive(Debug, Clone)]
pub struct Generated {
    pub offspring: Vec<Vec<f64>>,
    pub transcript: OperatorTranscript,
}

/// Prompts `backend` for `ctx.n_offspring` points, making up to `max_attempts`
/// fresh calls on transport or parse failure.
///
/// A partial reply is padded from `fallback`; after the last failed attempt
/// every point comes from `fallback`. Never returns an error.
pub fn generate(
    ctx: &ReproductionContext<'_>,
    backend: &mut dyn ChatBackend,
    fallback: &mut dyn OffspringOperator,
    max_attempts: usize,
    rng: &mut Rng,
) -> Generated {
    let prompt = build_prompt(&PromptContext::from_reproduction(ctx));
    let max_attempts = max_attempts.max(1);
    let mut raw_response = None;
    let mut last_error = String::new();
    let mut attempts = 0;
    let mut parsed = Vec::new();

    while attempts < max_attempts {
        attempts += 1;
        match backend.complete(&prompt, rng) {
            Ok(text) => {
                let result = parse_response(&text, ctx.n_offspring, ctx.dim);
                raw_response = Some(text);
                match result {
                    Ok(points) => {
                        parsed = points;
                        break;
                    }
                    Err(e) => last_error = e.to_string(),
                }
            }
            Err(e) => last_error = e.to_string(),
        }
    }

    let n_parsed = parsed.len();
    let (outcome, is_fallback) = if n_parsed == ctx.n_offspring {
        (ParseOutcome::Complete { parsed: n_parsed }, false)
    } else if n_parsed > 0 {
        (ParseOutcome::Partial { parsed: n_parsed }, false)
    } else {
        (ParseOutcome::Failed { reason: last_error }, true)
    };

    let mut offspring = parsed;
    if offspring.len() < ctx.n_offspring {
        let missing = ctx.n_offspring - offspring.len();
        let extra = fallback
            .reproduce(ctx, rng)
            .unwrap_or_else(|_| crate::operators::random_offspring(ctx.dim, missing, rng));
        offspring.extend(extra.into_iter().take(missing));
        while offspring.len() < ctx.n_offspring {
            offspring.extend(crate::operators::random_offspring(ctx.dim, 1, rng));
        }
    }

    Generated {
        offspring,
        transcript: OperatorTranscript {
            generation: ctx.generation,
            subproblem: ctx.subproblem,
            prompt,
            raw_response,
            attempts,
            outcome,
            fallback: is_fallback,
        },
    }
}

/// Offspring operator backed by a chat model, with a genetic fallback.
pub struct LlmOperator<B> {
    pub backend: B,
    pub fallback: GaOperator,
    pub max_attempts: usize,
    transcripts: Vec<OperatorTranscript>,
}

impl<B: ChatBackend> LlmOperator<B> {
    pub fn new(backend: B, max_attempts: usize) -> Self {
        Self {
            backend,
            fallback: GaOperator::default(),
            max_attempts,
            transcripts: Vec::new(),
        }
    }

    pub fn transcripts(&self) -> &[OperatorTranscript] {
        &self.transcripts
    }

    pub fn into_transcripts(self) -> Vec<OperatorTranscript> {
        self.transcripts
    }

    /// Fraction of calls that fell back entirely to genetic offspring.
    pub fn fallback_rate(&self) -> f64 {
        if self.transcripts.is_empty() {
            return 0.0;
        }
        self.transcripts.iter().filter(|t| t.fallback).count() as f64 / self.transcripts.len() as f64
    }
}

impl<B: ChatBackend> OffspringOperator for LlmOperator<B> {
    fn name(&self) -> &str {
        "ledma"
    }

    fn reproduce(&mut self, ctx: &ReproductionContext<'_>, rng: &mut Rng) -> Result<Vec<Vec<f64>>, OperatorError> {
        let out = generate(ctx, &mut self.backend, &mut self.fallback, self.max_attempts, rng);
        self.transcripts.push(out.transcript);
        Ok(out.offspring)
    }
}
