use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Informant, InformantSpec, SurveyError};
use crate::corpus::Corpus;
use crate::questionnaire::{render_prompt, Format, QuestionBatch};

/// Run settings. Serialized verbatim into every run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub corpus: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub sample: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub informant: InformantSpec,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    /// Attempts per question, including the first.
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles on each further attempt.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_in_flight() -> usize {
    4
}

fn default_attempts() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

impl RunConfig {
    pub fn new(informant: InformantSpec) -> Self {
        RunConfig {
            corpus: None,
            format: None,
            sample: None,
            seed: 0,
            informant,
            max_in_flight: default_in_flight(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub digest: String,
    pub format: Format,
    pub seed: u64,
    pub questions: usize,
}

impl BatchRef {
    pub fn of(batch: &QuestionBatch, path: Option<String>) -> Self {
        BatchRef {
            path,
            digest: batch.digest(),
            format: batch.format,
            seed: batch.seed,
            questions: batch.len(),
        }
    }
}

/// One record per batch question. Exactly one of `raw` and `failure` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    #[serde(default)]
    pub raw: Option<String>,
    #[serde(default)]
    pub failure: Option<String>,
    pub attempts: u32,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRun {
    pub informant: InformantSpec,
    pub batch: BatchRef,
    pub seed: u64,
    pub config: RunConfig,
    /// Unix seconds; absent for deterministic informants so their runs
    /// reproduce byte for byte.
    #[serde(default)]
    pub created_at: Option<u64>,
    pub responses: Vec<ResponseRecord>,
}

impl SurveyRun {
    pub fn failures(&self) -> usize {
        self.responses.iter().filter(|r| r.failure.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SurveyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SurveyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SurveyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SurveyError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| SurveyError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Asks every batch question once (with retries), keeping at most
/// `config.max_in_flight` requests outstanding. Questions that fail every
/// attempt are recorded with a failure reason; the run is still returned.
pub fn run_survey(
    informant: &dyn Informant,
    batch: &QuestionBatch,
    corpus: &Corpus,
    config: &RunConfig,
    batch_path: Option<String>,
) -> Result<SurveyRun, SurveyError> {
    if batch.is_empty() {
        return Err(SurveyError::EmptyBatch);
    }
    if !informant.supports(batch.format) {
        return Err(SurveyError::UnsupportedFormat {
            informant: format!("{:?}", informant.spec()),
            format: batch.format,
        });
    }
    batch.check_against(corpus)?;

    let deterministic = informant.is_deterministic();
    let created_at = (!deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });

    let ask = |index: usize| -> ResponseRecord {
        let question = &batch.questions[index];
        let prompt = render_prompt(question, corpus).expect("batch checked against corpus");
        let start = Instant::now();
        let mut attempts = 0;
        let outcome = loop {
            attempts += 1;
            match informant.answer(&prompt, question) {
                Ok(text) => break Ok(text),
                Err(e) if e.is_retryable() && attempts < config.max_attempts.max(1) => {
                    let delay = config.backoff_ms.saturating_mul(1 << (attempts - 1).min(16));
                    if delay > 0 {
                        std::thread::sleep(Duration::from_millis(delay));
                    }
                }
                Err(e) => break Err(e),
            }
        };
        let latency_ms = if deterministic {
            0
        } else {
            start.elapsed().as_millis() as u64
        };
        let (raw, failure) = match outcome {
            Ok(text) => (Some(text), None),
            Err(e) => (None, Some(e.to_string())),
        };
        ResponseRecord {
            id: question.id().to_string(),
            raw,
            failure,
            attempts,
            latency_ms,
        }
    };

    let workers = config.max_in_flight.clamp(1, batch.len());
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<ResponseRecord>> = vec![None; batch.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= batch.len() {
                            break;
                        }
                        done.push((i, ask(i)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, record) in h.join().expect("survey worker panicked") {
                slots[i] = Some(record);
            }
        }
    });

    Ok(SurveyRun {
        informant: informant.spec(),
        batch: BatchRef::of(batch, batch_path),
        seed: config.seed,
        config: config.clone(),
        created_at,
        responses: slots.into_iter().map(|r| r.expect("every slot filled")).collect(),
    })
}
