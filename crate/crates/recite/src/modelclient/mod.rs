//! Provider-agnostic chat completion: a generic HTTP adapter for live
//! endpoints and a deterministic mock memorizing model for offline runs.

mod cache;
mod http;
mod mock;
mod ratelimit;

pub use cache::{CachedClient, ResponseCache};
pub use http::{HttpChatClient, ProviderConfig};
pub use mock::{MockMemoryClient, MockMemoryProfile, RefusalTarget};
pub use ratelimit::RateLimiter;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Sampling controls passed through to the provider untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl GenerationParams {
    pub fn new(temperature: f64, top_p: f64, max_tokens: u32) -> Result<Self> {
        if temperature < 0.0 {
            return Err(Error::BadParams("temperature must be >= 0".into()));
        }
        if !(top_p > 0.0 && top_p <= 1.0) {
            return Err(Error::BadParams("top_p must lie in (0, 1]".into()));
        }
        if max_tokens == 0 {
            return Err(Error::BadParams("max_tokens must be positive".into()));
        }
        Ok(GenerationParams {
            temperature,
            top_p,
            max_tokens,
            seed: None,
        })
    }

    /// Sweep settings: temperature 0, top_p 0.9.
    pub fn sweep() -> Self {
        GenerationParams {
            temperature: 0.0,
            top_p: 0.9,
            max_tokens: 1024,
            seed: None,
        }
    }

    /// Near-greedy settings for the deep-extraction round. Temperature is
    /// 1e-6 rather than 0 because some providers auto-tune a zero
    /// temperature.
    pub fn near_greedy() -> Self {
        GenerationParams {
            temperature: 1e-6,
            top_p: 0.9,
            max_tokens: 1024,
            seed: None,
        }
    }
}

/// A chat-completion backend. Implementations must be safe to call from
/// many threads at once.
pub trait ChatClient: Send + Sync {
    fn complete(&self, messages: &[ChatMessage], params: &GenerationParams) -> Result<String>;
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn complete(&self, messages: &[ChatMessage], params: &GenerationParams) -> Result<String> {
        (**self).complete(messages, params)
    }
}

pub(crate) fn validate_transcript(messages: &[ChatMessage]) -> Result<()> {
    match messages.first() {
        None => return Err(Error::BadParams("transcript must be non-empty".into())),
        Some(first) if first.role == Role::Assistant => {
            return Err(Error::BadParams(
                "transcript must start with a system or user turn".into(),
            ))
        }
        _ => {}
    }
    if messages
        .iter()
        .any(|m| m.role != Role::System && m.content.is_empty())
    {
        return Err(Error::BadParams(
            "user and assistant turns must carry content".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validate_ranges() {
        assert!(GenerationParams::new(-0.1, 0.9, 10).is_err());
        assert!(GenerationParams::new(0.0, 0.0, 10).is_err());
        assert!(GenerationParams::new(0.0, 1.1, 10).is_err());
        assert!(GenerationParams::new(0.0, 0.9, 0).is_err());
        assert!(GenerationParams::new(0.0, 0.9, 10).is_ok());
        assert_eq!(GenerationParams::near_greedy().temperature, 1e-6);
    }

    #[test]
    fn transcripts_must_open_with_system_or_user() {
        assert!(validate_transcript(&[]).is_err());
        assert!(validate_transcript(&[ChatMessage::assistant("hi")]).is_err());
        assert!(validate_transcript(&[ChatMessage::user("hi")]).is_ok());
        assert!(validate_transcript(&[ChatMessage::system("hi")]).is_ok());
    }

    #[test]
    fn prefill_turns_must_carry_content() {
        let messages = [ChatMessage::user("hi"), ChatMessage::assistant("")];
        assert!(validate_transcript(&messages).is_err());
    }
}
