use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{Corpus, Country};
use crate::metrics::{adjusted_jaccard, jaccard, BinaryConfusion};
use crate::questionnaire::{Format, Question, QuestionBatch};
use crate::survey::{parse_response, InformantSpec, InvalidReason, ParsedResponse, SurveyRun};

/// Per-country row of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryResult {
    pub country: Country,
    pub n_q: usize,
    pub n_a: usize,
    /// F1 or mean adjusted Jaccard; `None` when no answer was valid.
    pub metric: Option<f64>,
    pub baseline: Option<f64>,
    pub delta: Option<f64>,
}

impl CountryResult {
    pub fn new(country: Country, n_q: usize, n_a: usize, metric: Option<f64>, baseline: Option<f64>) -> Self {
        let delta = metric.zip(baseline).map(|(m, b)| m - b);
        CountryResult {
            country,
            n_q,
            n_a,
            metric,
            baseline,
            delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    F1,
    AdjustedJaccard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Tp,
    Fp,
    Fn,
    Tn,
}

/// One line of the score file. For yes/no questions `raw` is 1 when the
/// verdict matches gold; for multiple choice it is the Jaccard coefficient
/// and `adjusted` the clipped chance-corrected value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub question_id: String,
    pub country: Country,
    pub item: String,
    pub metric: MetricKind,
    pub raw: f64,
    pub adjusted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub format: Format,
    pub countries: Vec<CountryResult>,
    pub scores: Vec<ScoreRecord>,
}

impl Evaluation {
    pub fn scores_jsonl(&self) -> String {
        self.scores
            .iter()
            .map(|s| serde_json::to_string(s).expect("score serializes") + "\n")
            .collect()
    }

    /// Mean of country metrics over countries with a value.
    pub fn mean_metric(&self) -> Option<f64> {
        let vals: Vec<f64> = self.countries.iter().filter_map(|c| c.metric).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

#[derive(Default)]
struct Tally {
    n_q: usize,
    n_a: usize,
    confusion: BinaryConfusion,
    adjusted: Vec<f64>,
}

impl Tally {
    fn metric(&self, format: Format) -> Option<f64> {
        if self.n_a == 0 {
            return None;
        }
        Some(match format {
            Format::Ynqf => self.confusion.f1(),
            Format::Mcqf => self.adjusted.iter().sum::<f64>() / self.adjusted.len() as f64,
        })
    }
}

/// Scores one parsed answer. Returns `None` for invalid answers.
fn score(
    question: &Question,
    parsed: &ParsedResponse,
    corpus: &Corpus,
) -> Result<Option<ScoreRecord>, AnalysisError> {
    let gold = corpus.gold_set(question.item(), question.country())?;
    let base = |metric, raw, adjusted, outcome| ScoreRecord {
        question_id: question.id().to_string(),
        country: question.country(),
        item: question.item().to_string(),
        metric,
        raw,
        adjusted,
        outcome,
    };
    Ok(match (question, parsed) {
        (Question::YesNo(q), ParsedResponse::Yes | ParsedResponse::No) => {
            let g = gold.contains(q.variant.as_str());
            let p = *parsed == ParsedResponse::Yes;
            let outcome = match (g, p) {
                (true, true) => Outcome::Tp,
                (false, true) => Outcome::Fp,
                (true, false) => Outcome::Fn,
                (false, false) => Outcome::Tn,
            };
            Some(base(MetricKind::F1, if g == p { 1.0 } else { 0.0 }, None, Some(outcome)))
        }
        (Question::MultipleChoice(q), ParsedResponse::Selection(sel)) => {
            if gold.is_empty() {
                return Err(AnalysisError::EmptyGold(q.id.clone()));
            }
            let predicted: BTreeSet<&str> = sel.iter().map(|&i| q.options[i - 1].as_str()).collect();
            let raw = jaccard(&gold, &predicted);
            let adj = adjusted_jaccard(&gold, &predicted, q.options.len())?;
            Some(base(MetricKind::AdjustedJaccard, raw, Some(adj), None))
        }
        _ => None,
    })
}

fn accumulate(tally: &mut Tally, record: &ScoreRecord) {
    tally.n_a += 1;
    match record.outcome {
        Some(Outcome::Tp) => tally.confusion.record(true, true),
        Some(Outcome::Fp) => tally.confusion.record(false, true),
        Some(Outcome::Fn) => tally.confusion.record(true, false),
        Some(Outcome::Tn) => tally.confusion.record(false, false),
        None => tally.adjusted.extend(record.adjusted),
    }
}

/// Per-country baseline values for a batch.
fn baseline_scores(batch: &QuestionBatch, corpus: &Corpus) -> Result<BTreeMap<Country, Option<f64>>, AnalysisError> {
    let spec = InformantSpec::baseline_for(batch.format);
    let informant = spec.build(std::sync::Arc::new(corpus.clone()))?;
    let mut tallies: BTreeMap<Country, Tally> = BTreeMap::new();
    for q in &batch.questions {
        let tally = tallies.entry(q.country()).or_default();
        tally.n_q += 1;
        let raw = informant
            .answer("", q)
            .map_err(|e| AnalysisError::Mismatch(e.to_string()))?;
        if let Some(record) = score(q, &parse_response(q, &raw), corpus)? {
            accumulate(tally, &record);
        }
    }
    Ok(tallies
        .into_iter()
        .map(|(c, t)| (c, t.metric(batch.format)))
        .collect())
}

/// Scores a run against gold and against the format's baseline on the
/// same batch. Failed or invalid answers count toward `n_q` only.
pub fn evaluate_run(run: &SurveyRun, batch: &QuestionBatch, corpus: &Corpus) -> Result<Evaluation, AnalysisError> {
    if run.batch.digest != batch.digest() {
        return Err(AnalysisError::Mismatch(format!(
            "run was recorded for batch {} but batch {} was supplied",
            run.batch.digest,
            batch.digest()
        )));
    }
    batch.check_against(corpus)?;

    let mut responses: HashMap<&str, &crate::survey::ResponseRecord> = HashMap::new();
    for r in &run.responses {
        if responses.insert(r.id.as_str(), r).is_some() {
            return Err(AnalysisError::Mismatch(format!("duplicate response for {}", r.id)));
        }
    }
    if let Some(extra) = run
        .responses
        .iter()
        .find(|r| !batch.questions.iter().any(|q| q.id() == r.id))
    {
        return Err(AnalysisError::Mismatch(format!("unknown question id {}", extra.id)));
    }

    let mut tallies: BTreeMap<Country, Tally> = BTreeMap::new();
    let mut scores = Vec::new();
    for q in &batch.questions {
        let record = responses
            .get(q.id())
            .ok_or_else(|| AnalysisError::Mismatch(format!("no response recorded for {}", q.id())))?;
        let parsed = match &record.raw {
            Some(raw) => parse_response(q, raw),
            None => ParsedResponse::Invalid(InvalidReason::Failed),
        };
        let tally = tallies.entry(q.country()).or_default();
        tally.n_q += 1;
        if let Some(s) = score(q, &parsed, corpus)? {
            accumulate(tally, &s);
            scores.push(s);
        }
    }

    let baselines = baseline_scores(batch, corpus)?;
    let countries = tallies
        .iter()
        .map(|(&c, t)| CountryResult::new(c, t.n_q, t.n_a, t.metric(batch.format), baselines.get(&c).copied().flatten()))
        .collect();

    Ok(Evaluation {
        format: batch.format,
        countries,
        scores,
    })
}
