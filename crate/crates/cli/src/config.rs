//! Optional TOML run settings. Keys mirror the run manifest's `config`
//! object; command-line flags override them.
//!
//! ```toml
//! corpus = "corpus.json"
//! format = "ynqf"
//! sample = 200
//! seed = 7
//! out_dir = "out"
//! max_in_flight = 4
//! max_attempts = 3
//! backoff_ms = 500
//!
//! [informant]
//! kind = "remote-llm"
//! model = "gpt-4o"
//! base_url = "https://api.openai.com/v1"
//! api_key_env = "OPENAI_API_KEY"
//! temperature = 0.0
//! timeout_ms = 60000
//! ```

use std::path::Path;

use lexsurvey::questionnaire::Format;
use lexsurvey::survey::InformantSpec;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub corpus: Option<String>,
    pub format: Option<Format>,
    pub sample: Option<usize>,
    pub seed: Option<u64>,
    pub informant: Option<InformantSpec>,
    pub max_in_flight: Option<usize>,
    pub max_attempts: Option<u32>,
    pub backoff_ms: Option<u64>,
    pub out_dir: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}
