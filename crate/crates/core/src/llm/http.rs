//! Chat-completions HTTP client for local inference servers.
//!
//! Speaks the common `/v1/chat/completions` protocol: POST with model name,
//! messages and sampling parameters, read the first choice's message
//! content.

use std::time::{Duration, Instant};

use serde::Deserialize;

use super::{validate_messages, Backend, ChatMessage, GatewayError, GenerationParams};

/// Default per-call timeout. No retries: a retry would hide failures the
/// benchmark is supposed to measure.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

pub struct HttpBackend {
    base_url: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Self {
        let base_url = base_url.into();
        HttpBackend {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.into(),
            api_key,
            client: reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .expect("http client builds"),
        }
    }

    fn completions_url(&self) -> String {
        if self.base_url.ends_with("/v1/chat/completions") {
            self.base_url.clone()
        } else {
            format!("{}/v1/chat/completions", self.base_url)
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl Backend for HttpBackend {
    fn complete(
        &self,
        messages: &[ChatMessage],
        params: &GenerationParams,
    ) -> Result<String, GatewayError> {
        validate_messages(messages)?;
        params.validate()?;
        let body = serde_json::json!({
            "model": self.model,
            "messages": messages,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
            "min_p": params.min_p,
        });
        let start = Instant::now();
        let transport = |message: String| GatewayError::Transport {
            message,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        let mut request = self.client.post(self.completions_url()).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| transport(e.to_string()))?;
        if !response.status().is_success() {
            return Err(transport(format!("server returned {}", response.status())));
        }
        let parsed: ChatResponse = response.json().map_err(|e| transport(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|choice| choice.message.content)
            .ok_or_else(|| transport("response contained no choices".into()))
    }
}
