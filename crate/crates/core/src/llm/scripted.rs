//! Scripted backend for offline tests and dry runs: replays a queue of
//! canned replies and records every prompt it receives.

use std::sync::Mutex;

use super::{validate_messages, Backend, ChatMessage, GatewayError, GenerationParams};

struct Script {
    replies: Vec<String>,
    next: usize,
    cycling: bool,
}

pub struct ScriptedBackend {
    script: Mutex<Script>,
    prompts: Mutex<Vec<Vec<ChatMessage>>>,
}

impl ScriptedBackend {
    /// A queue that is consumed once; an exhausted queue fails like a dead
    /// transport.
    pub fn new(replies: impl IntoIterator<Item = String>) -> Self {
        ScriptedBackend {
            script: Mutex::new(Script {
                replies: replies.into_iter().collect(),
                next: 0,
                cycling: false,
            }),
            prompts: Mutex::new(Vec::new()),
        }
    }

    /// A queue that restarts from the beginning once exhausted. Useful for
    /// long benchmark runs.
    pub fn cycling(replies: impl IntoIterator<Item = String>) -> Self {
        let backend = ScriptedBackend::new(replies);
        backend.script.lock().unwrap().cycling = true;
        backend
    }

    /// Every conversation this backend has answered, in call order.
    pub fn recorded_prompts(&self) -> Vec<Vec<ChatMessage>> {
        self.prompts.lock().unwrap().clone()
    }

    pub fn calls_served(&self) -> usize {
        self.prompts.lock().unwrap().len()
    }
}

impl Backend for ScriptedBackend {
    fn complete(
        &self,
        messages: &[ChatMessage],
        params: &GenerationParams,
    ) -> Result<String, GatewayError> {
        validate_messages(messages)?;
        params.validate()?;
        let mut script = self.script.lock().unwrap();
        if script.next >= script.replies.len() {
            if script.cycling && !script.replies.is_empty() {
                script.next = 0;
            } else {
                return Err(GatewayError::Transport {
                    message: "scripted backend exhausted".into(),
                    elapsed_seconds: 0.0,
                });
            }
        }
        let reply = script.replies[script.next].clone();
        script.next += 1;
        drop(script);
        self.prompts.lock().unwrap().push(messages.to_vec());
        Ok(reply)
    }
}
