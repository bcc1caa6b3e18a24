use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lexsurvey");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("LEXSURVEY_TEST_KEY").output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// gen, oracle survey, and eval, run from `dir` with outputs in `dir/out`.
fn oracle_pipeline(dir: &Path, format: &str, seed: &str) {
    let corpus = fixture("corpus.json");
    let steps: [&[&str]; 3] = [
        &["gen", "--corpus", s(&corpus), "--format", format, "--seed", seed, "--out", "out"],
        &["survey", "--corpus", s(&corpus), "--batch", "out/batch.json", "--informant", "oracle", "--out", "out"],
        &["eval", "--corpus", s(&corpus), "--run", "out/run.json", "--out", "out"],
    ];
    for args in steps {
        let out = run_in(dir, args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.json");
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        assert_eq!(code(&run(&["gen", "--corpus", s(&corpus), "--format", "mcqf", "--seed", "7", "--out", s(&out)])), 0);
    }
    let a = read(dir.path().join("a/batch.json"));
    assert_eq!(a, read(dir.path().join("b/batch.json")));
    assert!(a.contains("\"format\": \"mcqf\""));
}

#[test]
fn oracle_pipeline_scores_one_everywhere() {
    for format in ["ynqf", "mcqf"] {
        let dir = tempfile::tempdir().unwrap();
        oracle_pipeline(dir.path(), format, "3");
        let table = read(dir.path().join("out/countries.tsv"));
        let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split('\t').collect()).collect();
        assert_eq!(rows.len(), 21, "{format}");
        for r in rows {
            assert_eq!(r[3], "1", "{format} {}", r[0]);
            assert_eq!(r[1], r[2]);
        }
        assert!(!read(dir.path().join("out/scores.jsonl")).is_empty());
    }
}

#[test]
fn pipeline_is_idempotent_and_leaves_inputs_alone() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let corpus_before = read(fixture("corpus.json"));
    oracle_pipeline(a.path(), "ynqf", "11");
    oracle_pipeline(b.path(), "ynqf", "11");
    for f in ["batch.json", "run.json", "scores.jsonl", "countries.tsv"] {
        let (fa, fb) = (a.path().join("out").join(f), b.path().join("out").join(f));
        assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap(), "{f}");
    }
    assert_eq!(read(fixture("corpus.json")), corpus_before);
}

#[test]
fn sampled_ynqf_batch() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.json");
    let out = run(&["gen", "--corpus", s(&corpus), "--format", "ynqf", "--sample", "40", "--seed", "1", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0);
    let batch: serde_json::Value = serde_json::from_str(&read(dir.path().join("batch.json"))).unwrap();
    assert_eq!(batch["questions"].as_array().unwrap().len(), 40);

    let too_many = run(&["gen", "--corpus", s(&corpus), "--format", "ynqf", "--sample", "100000", "--out", s(dir.path())]);
    assert_eq!(code(&too_many), 2);
    let mcqf_sample = run(&["gen", "--corpus", s(&corpus), "--format", "mcqf", "--sample", "3", "--out", s(dir.path())]);
    assert_eq!(code(&mcqf_sample), 1);
}

#[test]
fn analyze_table_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let yn_table = fixture("published_ynqf.tsv");
    let out = run(&["analyze", "--table", s(&yn_table), "--x", "f1", "--y", "baseline", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path().join("correlation.json"))).unwrap();
    assert!((json["rho"].as_f64().unwrap() - 0.794).abs() < 0.02);
    assert_eq!(json["n"], 21);
}

#[test]
fn analyze_across_tables_and_covariates() {
    let dir = tempfile::tempdir().unwrap();
    let yn_table = format!("ynqf={}", s(&fixture("published_ynqf.tsv")));
    let mc_table = format!("mcqf={}", s(&fixture("published_mcqf.tsv")));
    let out = run(&["analyze", "--table", &yn_table, "--table", &mc_table, "--x", "ynqf.delta", "--y", "mcqf.jadj", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path().join("correlation.json"))).unwrap();
    assert!((json["rho"].as_f64().unwrap() - 0.679).abs() < 0.02);

    let ambiguous = run(&["analyze", "--table", &yn_table, "--table", &mc_table, "--x", "delta", "--y", "mcqf.jadj", "--out", s(dir.path())]);
    assert_eq!(code(&ambiguous), 1);

    let cov = dir.path().join("cov.tsv");
    std::fs::write(&cov, "country_code\ttokens\tgdp_usd\nES\t900\t\nMX\t700\t\nAR\t300\t\nCL\t100\t\n").unwrap();
    let out = run(&["analyze", "--table", &mc_table, "--covariates", s(&cov), "--x", "jadj", "--y", "tokens", "--exact", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path().join("correlation.json"))).unwrap();
    assert_eq!(json["n"], 4);
    assert_eq!(json["p_method"], "exact");

    let empty = fixture("covariates.tsv");
    let out = run(&["analyze", "--table", &mc_table, "--covariates", s(&empty), "--x", "jadj", "--y", "gdp_usd", "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    let missing = run(&["analyze", "--table", &mc_table, "--x", "jadj", "--y", "tokens", "--out", s(dir.path())]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn report_writes_tables_and_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let yn_table = format!("ynqf={}", s(&fixture("published_ynqf.tsv")));
    let mc_table = format!("mcqf={}", s(&fixture("published_mcqf.tsv")));
    let out = run(&[
        "report", "--table", &mc_table, "--table", &yn_table, "--correlate", "ynqf.delta,mcqf.metric", "--correlate",
        "mcqf.metric,mcqf.baseline", "--out", s(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path().join("countries.tsv")).lines().count(), 22);
    let areas = read(dir.path().join("areas.tsv"));
    let antilles: f64 = areas
        .lines()
        .find_map(|l| l.strip_prefix("Antilles\t"))
        .and_then(|rest| rest.split('\t').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((antilles - 0.321).abs() < 0.0005);
    assert_eq!(read(dir.path().join("scatter_ynqf_delta__mcqf_metric.csv")).lines().count(), 22);
    assert!(dir.path().join("scatter_mcqf_metric__mcqf_baseline.csv").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["gen", "--bogus"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, read(fixture("corpus.json")).replacen("\"coche\"", "\"coche\", \"coche\"", 1)).unwrap();
    let out = run(&["gen", "--corpus", s(&bad), "--format", "ynqf", "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("A141"));
    assert!(!dir.path().join("batch.json").exists());
}

#[test]
fn survey_failures_give_partial_status() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.json");
    run(&["gen", "--corpus", s(&corpus), "--format", "ynqf", "--sample", "5", "--out", s(dir.path())]);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let batch = dir.path().join("batch.json");
    let args = [
        "survey", "--corpus", s(&corpus), "--batch", s(&batch), "--informant", "remote-llm", "--model", "m",
        "--base-url", &url, "--api-key-env", "LEXSURVEY_TEST_KEY", "--max-attempts", "1", "--out", s(dir.path()),
    ];
    let out = run(&args);
    assert_eq!(code(&out), 1, "missing key must be a usage error");

    let out = Command::new(BIN).args(args).env("LEXSURVEY_TEST_KEY", "secret-value").output().unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read(dir.path().join("run.json"));
    assert!(!manifest.contains("secret-value"));
    let run_json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(run_json["responses"].as_array().unwrap().len(), 5);
    assert!(run_json["responses"][0]["failure"].is_string());

    let out = run(&["eval", "--corpus", s(&corpus), "--run", s(&dir.path().join("run.json")), "--out", s(dir.path())]);
    assert_eq!(code(&out), 0);
    let n_a: usize = read(dir.path().join("countries.tsv"))
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(2).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(n_a, 0);
}

#[test]
fn config_file_supplies_run_settings() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.json");
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "corpus = {:?}\nformat = \"ynqf\"\nseed = 5\nout_dir = {:?}\nmax_in_flight = 2\n\n[informant]\nkind = \"noisy-oracle\"\nepsilon = 0.2\nseed = 9\n",
            s(&corpus),
            s(&out_dir)
        ),
    )
    .unwrap();
    assert_eq!(code(&run(&["gen", "--config", s(&cfg)])), 0);
    let batch = out_dir.join("batch.json");
    let out = run(&["survey", "--config", s(&cfg), "--batch", s(&batch)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(out_dir.join("run.json"))).unwrap();
    assert_eq!(manifest["informant"]["kind"], "noisy-oracle");
    assert_eq!(manifest["informant"]["epsilon"], 0.2);
    assert_eq!(manifest["config"]["max_in_flight"], 2);
    assert_eq!(manifest["seed"], 5);

    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    assert_eq!(code(&run(&["gen", "--config", s(&cfg)])), 1);
}

#[test]
fn ingest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("matrix.tsv");
    std::fs::write(
        &tsv,
        "index\tdescription\tenglish\tvariant\tcountry\tmark\n\
         A1\tvehículo\tCAR\tcoche\tES\t+\n\
         A1\tvehículo\tCAR\tcarro\tES\t-\n\
         A1\tvehículo\tCAR\tcarro\tMX\t+\n\
         A1\tvehículo\tCAR\tcoche\tMX\t-\n",
    )
    .unwrap();
    assert_eq!(code(&run(&["ingest", s(&tsv), "--out", s(dir.path())])), 0);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path().join("corpus.json"))).unwrap();
    assert_eq!(json["items"][0]["gold"]["MX"][0], "carro");
    std::fs::write(&tsv, "index\tdescription\n").unwrap();
    assert_eq!(code(&run(&["ingest", s(&tsv), "--out", s(dir.path())])), 2);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}
