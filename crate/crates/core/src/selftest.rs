//! Bundled end-to-end checks: oracle and baseline runs over the fixture
//! corpus plus numerical identities of the adjusted Jaccard metric.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::analysis::{evaluate_run, Evaluation};
use crate::corpus::{Corpus, CorpusError};
use crate::metrics::{self, oracle, MetricError};
use crate::questionnaire::{mcqf_questions, sample_questions, ynqf_universe, QuestionBatch};
use crate::rng::{SeededRng, Stream};
use crate::survey::{run_survey, BaselineYes, Informant, Oracle, RunConfig};

/// Signature of the adjusted Jaccard implementation under test.
pub type AdjustedFn = fn(&BTreeSet<usize>, &BTreeSet<usize>, usize) -> Result<f64, MetricError>;

const SEED: u64 = 20240601;
const TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

/// Runs every check against the bundled corpus and the library metric.
pub fn self_test() -> Result<SelfTestReport, CorpusError> {
    self_test_with(crate::fixtures::CORPUS_JSON, metrics::adjusted_jaccard::<usize>)
}

/// The corpus is loaded and validated before any check runs; a bad corpus
/// is reported as an error rather than as failed checks.
pub fn self_test_with(corpus_json: &str, adjusted: AdjustedFn) -> Result<SelfTestReport, CorpusError> {
    let corpus = Corpus::from_json(corpus_json)?;
    let shared = Arc::new(corpus.clone());
    let oracle = Oracle { corpus: shared };

    let universe = ynqf_universe(&corpus);
    let ynqf = sample_questions(&universe, universe.len(), SEED).expect("full sample");
    let mcqf = mcqf_questions(&corpus, SEED);

    let checks = vec![
        check("oracle-ynqf", perfect(&oracle, &ynqf, &corpus)),
        check("oracle-mcqf", perfect(&oracle, &mcqf, &corpus)),
        check("baseline-yes-closed-form", baseline_closed_form(&ynqf, &corpus)),
        check("null-model-enumeration", null_model()),
        check("adjusted-bounds", adjusted_bounds(adjusted)),
        check("adjusted-identity", adjusted_identity(adjusted)),
        check("adjusted-symmetry", adjusted_symmetry(adjusted)),
    ];
    Ok(SelfTestReport { checks })
}

fn evaluate(informant: &dyn Informant, batch: &QuestionBatch, corpus: &Corpus) -> Result<Evaluation, String> {
    let config = RunConfig::new(informant.spec());
    let run = run_survey(informant, batch, corpus, &config, None).map_err(|e| e.to_string())?;
    evaluate_run(&run, batch, corpus).map_err(|e| e.to_string())
}

fn perfect(oracle: &Oracle, batch: &QuestionBatch, corpus: &Corpus) -> Result<String, String> {
    let eval = evaluate(oracle, batch, corpus)?;
    for c in &eval.countries {
        if c.metric != Some(1.0) || c.n_a != c.n_q {
            return Err(format!("{}: metric {:?} with {}/{} answers", c.country, c.metric, c.n_a, c.n_q));
        }
    }
    Ok(format!("{} questions, {} countries at 1.0", batch.len(), eval.countries.len()))
}

fn baseline_closed_form(batch: &QuestionBatch, corpus: &Corpus) -> Result<String, String> {
    let eval = evaluate(&BaselineYes, batch, corpus)?;
    for c in &eval.countries {
        let (mut pos, mut total) = (0usize, 0usize);
        for q in batch.questions.iter().filter(|q| q.country() == c.country) {
            let crate::questionnaire::Question::YesNo(q) = q else {
                return Err("expected yes/no questions".into());
            };
            total += 1;
            let gold = corpus.gold_set(&q.item, q.country).map_err(|e| e.to_string())?;
            pos += usize::from(gold.contains(q.variant.as_str()));
        }
        let p = pos as f64 / total as f64;
        let expected = 2.0 * p / (1.0 + p);
        let got = c.metric.unwrap_or(f64::NAN);
        if (got - expected).abs() > 1e-9 {
            return Err(format!("{}: F1 {got} but 2p/(1+p) = {expected}", c.country));
        }
    }
    Ok(format!("{} countries match 2p/(1+p)", eval.countries.len()))
}

fn null_model() -> Result<String, String> {
    let mut cases = 0;
    for n in 1..=8 {
        for s in 1..=n {
            for t in 1..=n {
                let closed = metrics::expected_intersection(n, s, t).map_err(|e| e.to_string())?;
                let exact = oracle::exact_expected_intersection(n, s, t).map_err(|e| e.to_string())?;
                if (closed - exact).abs() > 1e-12 {
                    return Err(format!("N={n} s={s} t={t}: {closed} vs {exact}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (N, s, t) cases agree"))
}

/// Seeded random pairs of non-empty subsets of `0..n`, `n <= 10`.
fn random_pairs() -> Vec<(usize, BTreeSet<usize>, BTreeSet<usize>)> {
    let mut rng = SeededRng::new(SEED, Stream::MonteCarlo);
    (0..TRIALS)
        .map(|_| {
            let n = 1 + rng.below(10) as usize;
            let subset = |rng: &mut SeededRng| {
                let k = 1 + rng.below(n as u64) as usize;
                rng.sample_indices(n, k).into_iter().collect::<BTreeSet<usize>>()
            };
            let a = subset(&mut rng);
            let b = subset(&mut rng);
            (n, a, b)
        })
        .collect()
}

fn adjusted_bounds(adjusted: AdjustedFn) -> Result<String, String> {
    for (n, a, b) in random_pairs() {
        let v = adjusted(&a, &b, n).map_err(|e| e.to_string())?;
        if !(0.0..=1.0).contains(&v) {
            return Err(format!("value {v} outside [0, 1] for N={n} A={a:?} B={b:?}"));
        }
        if a != b && v >= 1.0 {
            return Err(format!("distinct sets scored 1 for N={n} A={a:?} B={b:?}"));
        }
    }
    Ok(format!("{TRIALS} random pairs within [0, 1]"))
}

fn adjusted_identity(adjusted: AdjustedFn) -> Result<String, String> {
    for (n, a, _) in random_pairs() {
        let v = adjusted(&a, &a, n).map_err(|e| e.to_string())?;
        if v != 1.0 {
            return Err(format!("A vs A scored {v} for N={n} A={a:?}"));
        }
    }
    Ok(format!("{TRIALS} self-comparisons equal 1"))
}

fn adjusted_symmetry(adjusted: AdjustedFn) -> Result<String, String> {
    for (n, a, b) in random_pairs() {
        let ab = adjusted(&a, &b, n).map_err(|e| e.to_string())?;
        let ba = adjusted(&b, &a, n).map_err(|e| e.to_string())?;
        if ab != ba {
            return Err(format!("{ab} != {ba} for N={n} A={a:?} B={b:?}"));
        }
    }
    Ok(format!("{TRIALS} pairs symmetric"))
}
