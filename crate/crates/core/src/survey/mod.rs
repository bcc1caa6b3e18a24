//! Informants and survey execution.
//!
//! An informant turns a rendered prompt into raw answer text. Each call is
//! a single independent request; no informant keeps conversation state.

mod parse;
mod remote;
mod runner;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::questionnaire::{Format, Question};
use crate::rng::{SeededRng, Stream};

pub use parse::{format_selection, parse_mcqf, parse_response, parse_ynqf, InvalidReason, ParsedResponse};
pub use remote::RemoteLlm;
pub use runner::{run_survey, BatchRef, ResponseRecord, RunConfig, SurveyRun};

pub const YES: &str = "Sí";
pub const NO: &str = "No";

/// Serializable informant descriptor, recorded in every run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InformantSpec {
    RemoteLlm {
        model: String,
        base_url: String,
        /// Name of the environment variable holding the API key.
        api_key_env: String,
        temperature: f64,
        timeout_ms: u64,
    },
    BaselineYes,
    BaselineFirst3,
    Oracle,
    NoisyOracle {
        epsilon: f64,
        seed: u64,
    },
}

impl InformantSpec {
    pub fn build(&self, corpus: Arc<Corpus>) -> Result<Box<dyn Informant>, SurveyError> {
        Ok(match self {
            InformantSpec::RemoteLlm { .. } => Box::new(RemoteLlm::from_spec(self)?),
            InformantSpec::BaselineYes => Box::new(BaselineYes),
            InformantSpec::BaselineFirst3 => Box::new(BaselineFirst3),
            InformantSpec::Oracle => Box::new(Oracle { corpus }),
            &InformantSpec::NoisyOracle { epsilon, seed } => {
                Box::new(NoisyOracle::new(corpus, epsilon, seed)?)
            }
        })
    }

    /// The reference informant for a format.
    pub fn baseline_for(format: Format) -> InformantSpec {
        match format {
            Format::Ynqf => InformantSpec::BaselineYes,
            Format::Mcqf => InformantSpec::BaselineFirst3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnswerError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("unsupported question: {0}")]
    Unsupported(String),
}

impl AnswerError {
    pub fn is_retryable(&self) -> bool {
        match self {
            AnswerError::Transport(_) | AnswerError::Malformed(_) => true,
            AnswerError::Status { status, .. } => *status == 429 || *status >= 500,
            AnswerError::Unsupported(_) => false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SurveyError {
    #[error("batch is empty")]
    EmptyBatch,
    #[error("informant {informant} cannot answer {format} questions")]
    UnsupportedFormat { informant: String, format: Format },
    #[error("noise rate {0} outside [0, 1]")]
    BadEpsilon(f64),
    #[error("environment variable {0} is not set")]
    MissingCredentials(String),
    #[error("informant setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Batch(#[from] crate::questionnaire::BatchError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed run manifest: {0}")]
    Json(#[from] serde_json::Error),
}

pub trait Informant: Send + Sync {
    fn spec(&self) -> InformantSpec;

    fn answer(&self, prompt: &str, question: &Question) -> Result<String, AnswerError>;

    fn supports(&self, _format: Format) -> bool {
        true
    }

    /// Pure informants produce the same text for the same question every
    /// time; their runs are recorded without wall-clock data.
    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Answers "Sí" to every yes/no question.
pub struct BaselineYes;

impl Informant for BaselineYes {
    fn spec(&self) -> InformantSpec {
        InformantSpec::BaselineYes
    }

    fn answer(&self, _prompt: &str, question: &Question) -> Result<String, AnswerError> {
        match question {
            Question::YesNo(_) => Ok(YES.to_string()),
            Question::MultipleChoice(_) => Err(AnswerError::Unsupported("baseline-yes is yes/no only".into())),
        }
    }

    fn supports(&self, format: Format) -> bool {
        format == Format::Ynqf
    }
}

/// Selects the first three options (both options for two-variant items).
pub struct BaselineFirst3;

impl Informant for BaselineFirst3 {
    fn spec(&self) -> InformantSpec {
        InformantSpec::BaselineFirst3
    }

    fn answer(&self, _prompt: &str, question: &Question) -> Result<String, AnswerError> {
        match question {
            Question::MultipleChoice(q) => Ok(format_selection(1..=q.options.len().min(3))),
            Question::YesNo(_) => Err(AnswerError::Unsupported("baseline-first3 is multiple-choice only".into())),
        }
    }

    fn supports(&self, format: Format) -> bool {
        format == Format::Mcqf
    }
}

/// Reads the answer straight from the gold annotation.
pub struct Oracle {
    pub corpus: Arc<Corpus>,
}

fn gold_answer(corpus: &Corpus, question: &Question) -> Result<String, AnswerError> {
    let gold = corpus
        .gold_set(question.item(), question.country())
        .map_err(|e| AnswerError::Unsupported(e.to_string()))?;
    Ok(match question {
        Question::YesNo(q) => {
            if gold.contains(q.variant.as_str()) { YES } else { NO }.to_string()
        }
        Question::MultipleChoice(q) => format_selection(
            q.options
                .iter()
                .enumerate()
                .filter(|(_, o)| gold.contains(o.as_str()))
                .map(|(i, _)| i + 1),
        ),
    })
}

impl Informant for Oracle {
    fn spec(&self) -> InformantSpec {
        InformantSpec::Oracle
    }

    fn answer(&self, _prompt: &str, question: &Question) -> Result<String, AnswerError> {
        gold_answer(&self.corpus, question)
    }
}

pub struct NoisyOracle {
    corpus: Arc<Corpus>,
    epsilon: f64,
    seed: u64,
}

impl NoisyOracle {
    pub fn new(corpus: Arc<Corpus>, epsilon: f64, seed: u64) -> Result<Self, SurveyError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(SurveyError::BadEpsilon(epsilon));
        }
        Ok(NoisyOracle { corpus, epsilon, seed })
    }
}

impl Informant for NoisyOracle {
    fn spec(&self) -> InformantSpec {
        InformantSpec::NoisyOracle {
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }

    fn answer(&self, _prompt: &str, question: &Question) -> Result<String, AnswerError> {
        noisy_answer(&self.corpus, question, self.epsilon, self.seed)
    }
}

/// Gold answer with independent bit flips at rate `epsilon`.
///
/// Yes/no: the verdict flips with probability `epsilon`. Multiple choice:
/// each option's membership flips independently; an empty result is
/// replaced by one uniformly chosen option. Draws come from a stream keyed
/// by `(seed, question id)`, so the answer does not depend on batch order.
pub fn noisy_answer(
    corpus: &Corpus,
    question: &Question,
    epsilon: f64,
    seed: u64,
) -> Result<String, AnswerError> {
    let gold = corpus
        .gold_set(question.item(), question.country())
        .map_err(|e| AnswerError::Unsupported(e.to_string()))?;
    let mut rng = SeededRng::derived(seed, question.id(), Stream::Noise);
    Ok(match question {
        Question::YesNo(q) => {
            let verdict = gold.contains(q.variant.as_str()) ^ rng.bernoulli(epsilon);
            if verdict { YES } else { NO }.to_string()
        }
        Question::MultipleChoice(q) => {
            let mut picked: Vec<usize> = q
                .options
                .iter()
                .enumerate()
                .filter(|(_, o)| gold.contains(o.as_str()) ^ rng.bernoulli(epsilon))
                .map(|(i, _)| i + 1)
                .collect();
            if picked.is_empty() {
                picked.push(rng.below(q.options.len() as u64) as usize + 1);
            }
            format_selection(picked)
        }
    })
}
