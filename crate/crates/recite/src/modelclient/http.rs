//! Generic chat-completions HTTP adapter.
//!
//! One POST per completion carrying `{model, messages, temperature, top_p,
//! max_tokens}`; transient failures (429, 5xx, transport) retry with
//! exponential backoff up to five attempts. Credentials come from the
//! environment variable named in the provider config and are spliced into
//! the auth header template.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{validate_transcript, ChatClient, ChatMessage, GenerationParams, RateLimiter};
use crate::error::{Error, Result};

fn default_rps() -> usize {
    1
}

fn default_max_in_flight() -> usize {
    1
}

fn default_max_attempts() -> usize {
    5
}

fn default_backoff_ms() -> u64 {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    /// Model name sent in the request body.
    pub model: String,
    /// Header carrying the credential, e.g. `["Authorization", "Bearer {api_key}"]`.
    #[serde(default)]
    pub auth_header: Option<(String, String)>,
    /// Environment variable holding the credential.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_rps")]
    pub requests_per_second: usize,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

pub struct HttpChatClient {
    config: ProviderConfig,
    agent: ureq::Agent,
    limiter: RateLimiter,
    auth: Option<(String, String)>,
}

impl HttpChatClient {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let auth = match (&config.auth_header, &config.api_key_env) {
            (Some((name, template)), env) => {
                let key = match env {
                    Some(var) => std::env::var(var).map_err(|_| {
                        Error::BadParams(format!("credential variable {var} is not set"))
                    })?,
                    None => String::new(),
                };
                Some((name.clone(), template.replace("{api_key}", &key)))
            }
            (None, _) => None,
        };
        let agent_config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build();
        Ok(HttpChatClient {
            limiter: RateLimiter::new(config.requests_per_second.max(1)),
            config,
            agent: ureq::Agent::new_with_config(agent_config),
            auth,
        })
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    fn post_once(&self, body: &serde_json::Value) -> Result<(u16, String)> {
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some((name, value)) = &self.auth {
            request = request.header(name.as_str(), value.as_str());
        }
        let response = request
            .send_json(body)
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .into_body()
            .read_to_string()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok((status, text))
    }
}

fn parse_assistant_text(body: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(body)?;
    value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Provider {
            status: 200,
            body: format!("response has no choices[0].message.content: {body}"),
        })
}

impl ChatClient for HttpChatClient {
    fn complete(&self, messages: &[ChatMessage], params: &GenerationParams) -> Result<String> {
        validate_transcript(messages)?;
        let mut body = serde_json::json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_tokens,
        });
        if let Some(seed) = params.seed {
            body["seed"] = serde_json::json!(seed);
        }

        let mut backoff = Duration::from_millis(self.config.backoff_ms);
        let mut last_error = String::new();
        for attempt in 1..=self.config.max_attempts {
            self.limiter.acquire();
            match self.post_once(&body) {
                Ok((status, text)) if (200..300).contains(&status) => {
                    return parse_assistant_text(&text);
                }
                Ok((status, text)) if status == 429 || status >= 500 => {
                    last_error = format!("status {status}: {text}");
                }
                Ok((status, text)) => {
                    return Err(Error::Provider { status, body: text });
                }
                Err(e) => {
                    last_error = e.to_string();
                }
            }
            if attempt < self.config.max_attempts {
                log::warn!(
                    "attempt {attempt}/{} failed ({last_error}); backing off {:?}",
                    self.config.max_attempts,
                    backoff
                );
                std::thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(Error::RetriesExhausted {
            attempts: self.config.max_attempts,
            last: last_error,
        })
    }
}
