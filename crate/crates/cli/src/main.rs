mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lexsurvey::analysis::{
    aggregate_area, correlate, emit_report, evaluate_run, read_country_tsv, write_country_tsv, Correlation,
    CountryResult, CountrySeries, CovariateField, CovariateTable, Field, PValueMethod,
};
use lexsurvey::corpus::{self, Corpus};
use lexsurvey::questionnaire::{mcqf_questions, sample_questions, ynqf_universe, Format, QuestionBatch};
use lexsurvey::survey::{run_survey, InformantSpec, RunConfig, SurveyRun};

use config::ConfigFile;
use output::write_atomic;

/// Process outcome. Anything but `Ok` means some requested artifact is
/// missing or incomplete.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Partial(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Partial(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Partial(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "lexsurvey", version, about = "Dialectal lexical surveys of language-model informants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an annotation TSV into a corpus JSON file.
    Ingest {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a question batch manifest.
    Gen(GenArgs),
    /// Ask every question in a batch and record a run manifest.
    Survey(SurveyArgs),
    /// Score a run against gold and the format baseline.
    Eval(EvalArgs),
    /// Spearman correlation between two per-country quantities.
    Analyze(AnalyzeArgs),
    /// Country and area tables plus scatter data.
    Report(ReportArgs),
    /// Run the bundled fixture checks.
    Selftest,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Number of yes/no questions to sample; defaults to all of them.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ynqf,
    Mcqf,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ynqf => Format::Ynqf,
            FormatArg::Mcqf => Format::Mcqf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InformantKind {
    Oracle,
    NoisyOracle,
    BaselineYes,
    BaselineFirst3,
    RemoteLlm,
}

#[derive(Args)]
struct SurveyArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    batch: PathBuf,
    #[arg(long, value_enum)]
    informant: Option<InformantKind>,
    /// Flip probability for the noisy oracle.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    base_url: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long)]
    max_attempts: Option<u32>,
    #[arg(long)]
    backoff_ms: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    run: PathBuf,
    /// Defaults to the batch path recorded in the run manifest.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    /// Country table as `name=path` or `path`; repeatable.
    #[arg(long = "table", required = true)]
    tables: Vec<String>,
    /// Covariate TSV with columns country_code, tokens, gdp_usd.
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// Exact permutation p-values (at most 10 countries).
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    tables: TableArgs,
    /// Quantity as `[table.]field`; `tokens` and `gdp_usd` name covariates.
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    tables: TableArgs,
    /// Correlation to include as `X,Y`; repeatable.
    #[arg(long = "correlate")]
    pairs: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Ingest { input, out } => ingest(&input, &out),
        Command::Gen(args) => gen(args),
        Command::Survey(args) => survey(args),
        Command::Eval(args) => eval(args),
        Command::Analyze(args) => analyze(args),
        Command::Report(args) => report(args),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    corpus::load_corpus(path).map_err(data)
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("missing --{flag} (flag or config key)")))
}

fn ingest(input: &Path, out: &Path) -> Outcome {
    let text = std::fs::read_to_string(input).map_err(|e| data(format!("{}: {e}", input.display())))?;
    let corpus = corpus::ingest::ingest_tsv(&text).map_err(data)?;
    write_atomic(&out.join("corpus.json"), &corpus.to_json())
}

fn gen(args: GenArgs) -> Outcome {
    let cfg = load_config(args.config.as_deref())?;
    let corpus_path = require(args.corpus.or(cfg.corpus.map(PathBuf::from)), "corpus")?;
    let format: Format = require(args.format.map(Format::from).or(cfg.format), "format")?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let sample = args.sample.or(cfg.sample);
    let out = require(args.out.or(cfg.out_dir.map(PathBuf::from)), "out")?;
    let corpus = load_corpus(&corpus_path)?;

    let batch = match format {
        Format::Ynqf => {
            let universe = ynqf_universe(&corpus);
            sample_questions(&universe, sample.unwrap_or(universe.len()), seed).map_err(data)?
        }
        Format::Mcqf => {
            if sample.is_some() {
                return Err(Failure::Usage("--sample applies to ynqf only".into()));
            }
            mcqf_questions(&corpus, seed)
        }
    };
    if batch.is_empty() {
        return Err(Failure::Data("corpus yields no questions".into()));
    }
    write_atomic(&out.join("batch.json"), &batch.to_json())
}

fn informant_spec(args: &SurveyArgs, cfg: &ConfigFile, seed: u64) -> Result<InformantSpec, Failure> {
    let Some(kind) = args.informant else {
        return require(cfg.informant.clone(), "informant");
    };
    Ok(match kind {
        InformantKind::Oracle => InformantSpec::Oracle,
        InformantKind::BaselineYes => InformantSpec::BaselineYes,
        InformantKind::BaselineFirst3 => InformantSpec::BaselineFirst3,
        InformantKind::NoisyOracle => InformantSpec::NoisyOracle {
            epsilon: require(args.epsilon, "epsilon")?,
            seed,
        },
        InformantKind::RemoteLlm => InformantSpec::RemoteLlm {
            model: require(args.model.clone(), "model")?,
            base_url: args.base_url.clone().unwrap_or_else(|| "https://api.openai.com/v1".into()),
            api_key_env: args.api_key_env.clone().unwrap_or_else(|| "OPENAI_API_KEY".into()),
            temperature: args.temperature.unwrap_or(0.0),
            timeout_ms: args.timeout_ms.unwrap_or(60_000),
        },
    })
}

fn survey(args: SurveyArgs) -> Outcome {
    let cfg = load_config(args.config.as_deref())?;
    let corpus_path = require(args.corpus.clone().or(cfg.corpus.clone().map(PathBuf::from)), "corpus")?;
    let out = require(args.out.clone().or(cfg.out_dir.clone().map(PathBuf::from)), "out")?;
    let batch = QuestionBatch::load(&args.batch).map_err(data)?;
    let corpus = load_corpus(&corpus_path)?;
    let spec = informant_spec(&args, &cfg, batch.seed)?;

    let mut config = RunConfig::new(spec.clone());
    config.corpus = Some(corpus_path.display().to_string());
    config.format = Some(batch.format);
    config.sample = cfg.sample;
    config.seed = batch.seed;
    config.out_dir = Some(out.display().to_string());
    if let Some(v) = args.max_in_flight.or(cfg.max_in_flight) {
        config.max_in_flight = v.max(1);
    }
    if let Some(v) = args.max_attempts.or(cfg.max_attempts) {
        config.max_attempts = v.max(1);
    }
    if let Some(v) = args.backoff_ms.or(cfg.backoff_ms) {
        config.backoff_ms = v;
    }

    let informant = spec.build(Arc::new(corpus.clone())).map_err(|e| match e {
        lexsurvey::survey::SurveyError::MissingCredentials(_) | lexsurvey::survey::SurveyError::BadEpsilon(_) => {
            Failure::Usage(e.to_string())
        }
        other => data(other),
    })?;
    let run = run_survey(
        informant.as_ref(),
        &batch,
        &corpus,
        &config,
        Some(args.batch.display().to_string()),
    )
    .map_err(data)?;
    write_atomic(&out.join("run.json"), &run.to_json())?;
    match run.failures() {
        0 => Ok(()),
        n => Err(Failure::Partial(format!("{n} of {} questions failed; see run.json", run.responses.len()))),
    }
}

fn eval(args: EvalArgs) -> Outcome {
    let corpus = load_corpus(&args.corpus)?;
    let run = SurveyRun::load(&args.run).map_err(data)?;
    let batch_path = match args.batch {
        Some(p) => p,
        None => PathBuf::from(require(run.batch.path.clone(), "batch")?),
    };
    let batch = QuestionBatch::load(&batch_path).map_err(data)?;
    let evaluation = evaluate_run(&run, &batch, &corpus).map_err(data)?;
    write_atomic(&args.out.join("scores.jsonl"), &evaluation.scores_jsonl())?;
    write_atomic(&args.out.join("countries.tsv"), &write_country_tsv(&evaluation.countries))
}

struct Tables {
    named: Vec<(String, Vec<CountryResult>)>,
    covariates: Option<CovariateTable>,
    method: PValueMethod,
}

impl Tables {
    fn load(args: &TableArgs) -> Result<Self, Failure> {
        let mut named = Vec::new();
        for spec in &args.tables {
            let (name, path) = match spec.split_once('=') {
                Some((n, p)) => (n.to_string(), p),
                None => ("table".to_string(), spec.as_str()),
            };
            if named.iter().any(|(n, _)| *n == name) {
                return Err(Failure::Usage(format!("table name `{name}` given twice")));
            }
            let text = std::fs::read_to_string(path).map_err(|e| data(format!("{path}: {e}")))?;
            let rows = read_country_tsv(&text).map_err(|e| data(format!("{path}: {e}")))?;
            named.push((name, rows));
        }
        let covariates = match &args.covariates {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| data(format!("{}: {e}", p.display())))?;
                Some(CovariateTable::from_tsv(&text).map_err(|e| data(format!("{}: {e}", p.display())))?)
            }
            None => None,
        };
        let method = if args.exact { PValueMethod::Exact } else { PValueMethod::TApprox };
        Ok(Tables { named, covariates, method })
    }

    /// Resolves `[table.]field`, or a covariate column name.
    fn series(&self, spec: &str) -> Result<CountrySeries, Failure> {
        if let Ok(field) = spec.parse::<CovariateField>() {
            let cov = self
                .covariates
                .as_ref()
                .ok_or_else(|| Failure::Usage(format!("`{spec}` needs --covariates")))?;
            return Ok(cov.series(field));
        }
        let (table, field) = match spec.split_once('.') {
            Some((t, f)) => (Some(t), f),
            None => (None, spec),
        };
        let field: Field = field.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
        let rows = match table {
            Some(t) => self
                .named
                .iter()
                .find(|(n, _)| n == t)
                .map(|(_, r)| r)
                .ok_or_else(|| Failure::Usage(format!("no table named `{t}`")))?,
            None if self.named.len() == 1 => &self.named[0].1,
            None => return Err(Failure::Usage(format!("`{spec}` is ambiguous; prefix it with a table name"))),
        };
        Ok(CountrySeries::from_results(spec, rows, field))
    }

    fn correlate(&self, x: &str, y: &str) -> Result<Correlation, Failure> {
        correlate(&self.series(x)?, &self.series(y)?, self.method).map_err(data)
    }
}

fn analyze(args: AnalyzeArgs) -> Outcome {
    let tables = Tables::load(&args.tables)?;
    let c = tables.correlate(&args.x, &args.y)?;
    let json = serde_json::to_string_pretty(&c).expect("correlation serializes") + "\n";
    write_atomic(&args.out.join("correlation.json"), &json)
}

fn report(args: ReportArgs) -> Outcome {
    let tables = Tables::load(&args.tables)?;
    let mut correlations = Vec::new();
    for pair in &args.pairs {
        let (x, y) = pair
            .split_once(',')
            .ok_or_else(|| Failure::Usage(format!("--correlate expects X,Y, got `{pair}`")))?;
        correlations.push(tables.correlate(x.trim(), y.trim())?);
    }
    let results = &tables.named[0].1;
    emit_report(results, &aggregate_area(results), &correlations, &args.out).map_err(data)?;
    Ok(())
}

fn selftest() -> Outcome {
    let report = lexsurvey::selftest::self_test().map_err(|e| data(format!("bundled corpus: {e}")))?;
    for check in &report.checks {
        println!("{check}");
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        Err(Failure::Partial(format!("failed checks: {}", names.join(", "))))
    }
}
