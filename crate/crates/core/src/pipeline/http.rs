//! JSON-over-HTTP client adapter.
//!
//! Sends `POST <base_url><path>` with body `{"<request_field>": text}` and
//! reads the string at `<response_field>` from the JSON reply. A dotted
//! response field (`data.translation`) walks nested objects. When
//! `auth_env` is set, the named environment variable's value is sent as
//! `Authorization: Bearer <value>`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use ureq::Agent;

use super::{ClassifierClient, ClientError, TranslatorClient};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpClientConfig {
    /// Cache namespace; defaults to the full endpoint URL.
    #[serde(default)]
    pub id: Option<String>,
    pub base_url: String,
    #[serde(default)]
    pub path: String,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_request_field")]
    pub request_field: String,
    pub response_field: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_request_field() -> String {
    "text".into()
}

fn default_timeout() -> u64 {
    30
}

pub struct HttpEndpoint {
    config: HttpClientConfig,
    id: String,
    agent: Agent,
}

impl HttpEndpoint {
    pub fn new(config: HttpClientConfig) -> Self {
        let agent = Agent::new_with_config(
            Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .http_status_as_error(false)
                .build(),
        );
        let id = config.id.clone().unwrap_or_else(|| Self::url_of(&config));
        HttpEndpoint { config, id, agent }
    }

    fn url_of(config: &HttpClientConfig) -> String {
        format!("{}{}", config.base_url.trim_end_matches('/'), config.path)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// One request. Transport failures, 429 and 5xx are retryable; other
    /// statuses and malformed replies are contract violations.
    pub fn call(&self, text: &str) -> Result<String, ClientError> {
        let mut body = serde_json::Map::new();
        body.insert(self.config.request_field.clone(), Value::String(text.to_string()));
        let mut req = self.agent.post(Self::url_of(&self.config));
        if let Some(var) = &self.config.auth_env {
            let token = std::env::var(var)
                .map_err(|_| ClientError::Contract(format!("environment variable {var} is not set")))?;
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send_json(Value::Object(body)).map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(ClientError::Transport(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(ClientError::Contract(format!("HTTP {status}")));
        }
        let json: Value =
            resp.body_mut().read_json().map_err(|e| ClientError::Contract(format!("reply is not JSON: {e}")))?;
        let field = &self.config.response_field;
        field
            .split('.')
            .try_fold(&json, |v, key| v.get(key))
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or_else(|| ClientError::Contract(format!("reply has no string field {field:?}")))
    }
}

pub struct HttpTranslator(pub HttpEndpoint);

impl TranslatorClient for HttpTranslator {
    fn id(&self) -> &str {
        self.0.id()
    }
    fn translate(&self, text: &str) -> Result<String, ClientError> {
        self.0.call(text)
    }
}

pub struct HttpClassifier(pub HttpEndpoint);

impl ClassifierClient for HttpClassifier {
    fn id(&self) -> &str {
        self.0.id()
    }
    fn classify(&self, text: &str) -> Result<String, ClientError> {
        self.0.call(text)
    }
}
