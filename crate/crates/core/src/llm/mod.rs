//! Transport-agnostic chat gateway: message types, sampling parameters, the
//! backend contract, and structured-output parsing with the default-action
//! fallback.

mod http;
mod outcome;
mod scripted;

pub use http::{HttpBackend, DEFAULT_TIMEOUT};
pub use outcome::{parse_outcome, parse_outcome_traced, DecisionOutcome, FAILURE_MESSAGE};
pub use scripted::ScriptedBackend;

use serde::{Deserialize, Serialize};
use thiserror::Error;

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
}

/// Sampling parameters sent with every completion request. Defaults follow
/// the benchmark protocol: 300 output tokens, min_p 0.05, temperature 0.2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub max_tokens: u32,
    pub min_p: f64,
    pub temperature: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            max_tokens: 300,
            min_p: 0.05,
            temperature: 0.2,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_tokens == 0 {
            return Err(GatewayError::InvalidParams("max_tokens must be ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_p) {
            return Err(GatewayError::InvalidParams("min_p must be in [0, 1]".into()));
        }
        if self.temperature < 0.0 {
            return Err(GatewayError::InvalidParams("temperature must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("transport failure after {elapsed_seconds:.3}s: {message}")]
    Transport {
        message: String,
        elapsed_seconds: f64,
    },
}

/// A chat-completions backend. Implementations must be shareable across
/// concurrent decisions.
pub trait Backend: Send + Sync {
    fn complete(
        &self,
        messages: &[ChatMessage],
        params: &GenerationParams,
    ) -> Result<String, GatewayError>;
}

/// Shared precondition: a nonempty conversation starting with the system
/// prompt.
pub(crate) fn validate_messages(messages: &[ChatMessage]) -> Result<(), GatewayError> {
    let first = messages
        .first()
        .ok_or_else(|| GatewayError::InvalidRequest("empty message list".into()))?;
    if first.role != Role::System {
        return Err(GatewayError::InvalidRequest(
            "first message must be the system prompt".into(),
        ));
    }
    for message in messages {
        if message.role != Role::Assistant && message.content.is_empty() {
            return Err(GatewayError::InvalidRequest(
                "system and user messages must be nonempty".into(),
            ));
        }
    }
    Ok(())
}

/// Run one completion and measure its wall-clock duration in seconds.
pub fn timed_complete(
    backend: &dyn Backend,
    messages: &[ChatMessage],
    params: &GenerationParams,
) -> Result<(String, f64), GatewayError> {
    let start = std::time::Instant::now();
    match backend.complete(messages, params) {
        Ok(reply) => Ok((reply, start.elapsed().as_secs_f64())),
        Err(GatewayError::Transport { message, .. }) => Err(GatewayError::Transport {
            message,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        }),
        Err(other) => Err(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_match_the_protocol() {
        let params = GenerationParams::default();
        assert_eq!(params.max_tokens, 300);
        assert_eq!(params.min_p, 0.05);
        assert_eq!(params.temperature, 0.2);
        assert!(params.validate().is_ok());
    }

    #[test]
    fn empty_message_list_is_a_precondition_error() {
        let backend = ScriptedBackend::new(["hello".to_string()]);
        let err = backend
            .complete(&[], &GenerationParams::default())
            .unwrap_err();
        assert!(matches!(err, GatewayError::InvalidRequest(_)));
    }

    #[test]
    fn first_message_must_be_system() {
        let backend = ScriptedBackend::new(["hello".to_string()]);
        let err = backend
            .complete(&[ChatMessage::user("hi")], &GenerationParams::default())
            .unwrap_err();
        assert!(matches!(err, GatewayError::InvalidRequest(_)));
    }
}
