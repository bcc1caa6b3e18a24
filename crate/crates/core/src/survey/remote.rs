//! Chat-completions HTTP client. One stateless single-turn request per
//! question.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AnswerError, Informant, InformantSpec, SurveyError};
use crate::questionnaire::Question;

pub struct RemoteLlm {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
    spec: InformantSpec,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

impl RemoteLlm {
    /// Builds the client, reading the key from the variable named in the spec.
    pub fn from_spec(spec: &InformantSpec) -> Result<Self, SurveyError> {
        let InformantSpec::RemoteLlm { api_key_env, .. } = spec else {
            return Err(SurveyError::Setup("not a remote-llm descriptor".into()));
        };
        let key = std::env::var(api_key_env)
            .map_err(|_| SurveyError::MissingCredentials(api_key_env.clone()))?;
        Self::with_key(spec, key)
    }

    pub fn with_key(spec: &InformantSpec, api_key: String) -> Result<Self, SurveyError> {
        let InformantSpec::RemoteLlm {
            base_url,
            timeout_ms,
            ..
        } = spec
        else {
            return Err(SurveyError::Setup("not a remote-llm descriptor".into()));
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(*timeout_ms))
            .build()
            .map_err(|e| SurveyError::Setup(e.to_string()))?;
        Ok(RemoteLlm {
            client,
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
            spec: spec.clone(),
        })
    }
}

impl Informant for RemoteLlm {
    fn spec(&self) -> InformantSpec {
        self.spec.clone()
    }

    fn answer(&self, prompt: &str, _question: &Question) -> Result<String, AnswerError> {
        let InformantSpec::RemoteLlm {
            model, temperature, ..
        } = &self.spec
        else {
            unreachable!()
        };
        let body = ChatRequest {
            model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: *temperature,
        };
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| AnswerError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(AnswerError::Status {
                status: status.as_u16(),
                body: body.chars().take(200).collect(),
            });
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| AnswerError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| AnswerError::Malformed("no message content".into()))
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}
