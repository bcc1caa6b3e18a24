mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use common::{prompt_of, reply, MockServer};
use lexsurvey::analysis::evaluate_run;
use lexsurvey::fixtures;
use lexsurvey::questionnaire::{render_prompt, sample_questions, ynqf_universe, QuestionBatch};
use lexsurvey::survey::{run_survey, AnswerError, Informant, InformantSpec, RemoteLlm, RunConfig, SurveyError};

fn spec(base_url: &str, key_env: &str) -> InformantSpec {
    InformantSpec::RemoteLlm {
        model: "test-model".into(),
        base_url: base_url.into(),
        api_key_env: key_env.into(),
        temperature: 0.0,
        timeout_ms: 5_000,
    }
}

fn config(spec: InformantSpec) -> RunConfig {
    RunConfig {
        max_in_flight: 3,
        backoff_ms: 1,
        ..RunConfig::new(spec)
    }
}

fn small_batch() -> (lexsurvey::corpus::Corpus, QuestionBatch) {
    let corpus = fixtures::corpus();
    let universe = ynqf_universe(&corpus);
    let batch = sample_questions(&universe, 30, 9).unwrap();
    (corpus, batch)
}

#[test]
fn sends_chat_completion_request() {
    let server = MockServer::start(|_| reply("Sí"));
    let client = RemoteLlm::with_key(&spec(&server.base_url, "UNUSED"), "sk-test".into()).unwrap();
    let (corpus, batch) = small_batch();
    let q = &batch.questions[0];
    let prompt = render_prompt(q, &corpus).unwrap();
    assert_eq!(client.answer(&prompt, q).unwrap(), "Sí");

    let captured = server.requests.lock().unwrap()[0].clone();
    assert_eq!(captured.path, "/v1/chat/completions");
    assert_eq!(captured.authorization.as_deref(), Some("Bearer sk-test"));
    assert_eq!(captured.body["model"], "test-model");
    assert_eq!(captured.body["temperature"], 0.0);
    assert_eq!(captured.body["messages"].as_array().unwrap().len(), 1);
    assert_eq!(captured.body["messages"][0]["role"], "user");
    assert_eq!(prompt_of(&captured.body), prompt);
}

#[test]
fn status_errors_are_classified() {
    let server = MockServer::start(|_| (429, "{\"error\":\"slow down\"}".into()));
    let client = RemoteLlm::with_key(&spec(&server.base_url, "UNUSED"), "k".into()).unwrap();
    let (_, batch) = small_batch();
    let err = client.answer("hola", &batch.questions[0]).unwrap_err();
    assert!(matches!(err, AnswerError::Status { status: 429, .. }));
    assert!(err.is_retryable());

    let server = MockServer::start(|_| (400, "bad".into()));
    let client = RemoteLlm::with_key(&spec(&server.base_url, "UNUSED"), "k".into()).unwrap();
    let err = client.answer("hola", &batch.questions[0]).unwrap_err();
    assert!(!err.is_retryable());

    let server = MockServer::start(|_| (200, "{\"choices\": []}".into()));
    let client = RemoteLlm::with_key(&spec(&server.base_url, "UNUSED"), "k".into()).unwrap();
    assert!(matches!(client.answer("hola", &batch.questions[0]), Err(AnswerError::Malformed(_))));
}

#[test]
fn missing_key_variable_is_reported() {
    let spec = spec("http://127.0.0.1:9", "LEXSURVEY_TEST_KEY_THAT_IS_NOT_SET");
    assert!(matches!(RemoteLlm::from_spec(&spec), Err(SurveyError::MissingCredentials(_))));
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let client = RemoteLlm::with_key(&spec(&format!("http://{addr}"), "UNUSED"), "k".into()).unwrap();
    let (_, batch) = small_batch();
    let err = client.answer("hola", &batch.questions[0]).unwrap_err();
    assert!(matches!(err, AnswerError::Transport(_)));
}

/// Two questions always fail, one fails once then succeeds, one gets an
/// unparseable answer. Every other question is answered "No".
#[test]
fn fault_injection_accounting() {
    let (corpus, batch) = small_batch();
    let prompts: Vec<String> = batch.questions.iter().map(|q| render_prompt(q, &corpus).unwrap()).collect();
    let (dead_a, dead_b, flaky, garbled) = (prompts[3].clone(), prompts[11].clone(), prompts[7].clone(), prompts[20].clone());
    let seen: Arc<Mutex<HashMap<String, usize>>> = Arc::default();
    let in_flight = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let server = {
        let seen = Arc::clone(&seen);
        let (in_flight, peak) = (Arc::clone(&in_flight), Arc::clone(&peak));
        MockServer::start(move |body| {
            let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(5));
            let prompt = prompt_of(body).to_string();
            let count = {
                let mut seen = seen.lock().unwrap();
                let c = seen.entry(prompt.clone()).or_default();
                *c += 1;
                *c
            };
            let out = if prompt == dead_a || prompt == dead_b {
                (503, "unavailable".to_string())
            } else if prompt == flaky && count == 1 {
                (500, "oops".to_string())
            } else if prompt == garbled {
                reply("Depende del contexto")
            } else {
                reply("No.")
            };
            in_flight.fetch_sub(1, Ordering::SeqCst);
            out
        })
    };
    let spec = spec(&server.base_url, "UNUSED");
    let client = RemoteLlm::with_key(&spec, "k".into()).unwrap();
    let run = run_survey(&client, &batch, &corpus, &config(spec), None).unwrap();

    assert_eq!(run.failures(), 2);
    assert!(run.created_at.is_some());
    let by_id: HashMap<&str, _> = run.responses.iter().map(|r| (r.id.as_str(), r)).collect();
    assert_eq!(by_id[batch.questions[3].id()].attempts, 3);
    assert_eq!(by_id[batch.questions[7].id()].attempts, 2);
    assert_eq!(by_id[batch.questions[0].id()].attempts, 1);
    // 30 answered once, plus 2 x 2 retries for the dead ones and 1 for the flaky one.
    assert_eq!(server.request_count(), 30 + 4 + 1);
    assert!(peak.load(Ordering::SeqCst) <= 3);

    let eval = evaluate_run(&run, &batch, &corpus).unwrap();
    let n_q: usize = eval.countries.iter().map(|c| c.n_q).sum();
    let n_a: usize = eval.countries.iter().map(|c| c.n_a).sum();
    assert_eq!(n_q, 30);
    assert_eq!(n_a, 27);
}
