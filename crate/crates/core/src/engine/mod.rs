//! The four prompting styles, orchestrated as chains over the gateway and
//! the preference store.
//!
//! Call counts are part of the contract: direct and directPref make one LLM
//! call, OpenQuestion two, ThreeQuestion four — also when the final reply
//! fails to parse. Only a transport failure cuts a chain short, in which
//! case the decision falls back to the default do-nothing outcome and the
//! trace keeps the completed steps.

mod templates;

pub use templates::{fill, PromptTemplates, TemplateError};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::actions::{build_actions, ActionCandidate, ActionError};
use crate::home::HouseState;
use crate::llm::{
    parse_outcome_traced, timed_complete, Backend, ChatMessage, DecisionOutcome, GatewayError,
    GenerationParams,
};
use crate::prefs::{format_for_prompt, query_top_k, Embedder, PreferenceEntry, VectorIndex};
use crate::render::{render, Representation};

/// The four orchestration patterns compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PromptStyle {
    Direct,
    DirectPref,
    OpenQuestion,
    ThreeQuestion,
}

impl PromptStyle {
    pub const ALL: [PromptStyle; 4] = [
        PromptStyle::Direct,
        PromptStyle::DirectPref,
        PromptStyle::OpenQuestion,
        PromptStyle::ThreeQuestion,
    ];

    /// Report label, matching the usual benchmark spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStyle::Direct => "direct",
            PromptStyle::DirectPref => "directPref",
            PromptStyle::OpenQuestion => "OpenQuestion",
            PromptStyle::ThreeQuestion => "ThreeQuestion",
        }
    }

    /// Number of LLM calls the style performs when transport holds up.
    pub fn expected_calls(self) -> usize {
        match self {
            PromptStyle::Direct | PromptStyle::DirectPref => 1,
            PromptStyle::OpenQuestion => 2,
            PromptStyle::ThreeQuestion => 4,
        }
    }
}

impl std::fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PromptStyle {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        match raw.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "direct" => Ok(PromptStyle::Direct),
            "directpref" => Ok(PromptStyle::DirectPref),
            "openquestion" => Ok(PromptStyle::OpenQuestion),
            "threequestion" => Ok(PromptStyle::ThreeQuestion),
            other => Err(format!(
                "unknown prompting style `{other}` (direct|directPref|OpenQuestion|ThreeQuestion)"
            )),
        }
    }
}

/// One recorded LLM exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmCallRecord {
    pub messages: Vec<ChatMessage>,
    pub reply: String,
    pub seconds: f64,
}

/// One recorded retrieval query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRecord {
    pub query: String,
    pub entries: Vec<PreferenceEntry>,
}

/// Everything a decision did: calls, retrievals, warnings, timing. The
/// total covers rendering, action building, inference, retrieval and
/// parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ChainTrace {
    pub llm_calls: Vec<LlmCallRecord>,
    pub retrieval_queries: Vec<RetrievalRecord>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
    pub total_seconds: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Actions(#[from] ActionError),
}

/// Inputs shared by every style.
pub struct DecideRequest<'a> {
    pub style: PromptStyle,
    pub state: &'a HouseState,
    pub user_id: i64,
    pub representation: Representation,
    pub prefs: &'a VectorIndex,
    pub backend: &'a dyn Backend,
    pub embedder: &'a dyn Embedder,
    pub params: &'a GenerationParams,
    pub templates: &'a PromptTemplates,
    /// Preferences retrieved per parsed problem (the RAG styles).
    pub top_k: usize,
}

/// Run one decision. Returns the parsed outcome (total: transport or parse
/// failures yield the failed default) together with the full trace.
pub fn decide(request: &DecideRequest) -> Result<(DecisionOutcome, ChainTrace), EngineError> {
    let started = Instant::now();
    let mut trace = ChainTrace::default();

    let context = render(request.state, request.representation);
    let candidates = build_actions(request.user_id, request.state)?;
    let candidate_list = numbered(&candidates);

    let outcome = match run_chain(request, &context, &candidates, &candidate_list, &mut trace) {
        Ok(raw) => {
            let (outcome, warnings) = parse_outcome_traced(&raw, &candidates);
            trace.warnings.extend(warnings);
            outcome
        }
        Err(error) => {
            trace.transport_error = Some(error.to_string());
            DecisionOutcome::default_failure(&candidates)
        }
    };

    trace.total_seconds = started.elapsed().as_secs_f64();
    Ok((outcome, trace))
}

/// Drive the style's calls and return the final raw reply.
fn run_chain(
    request: &DecideRequest,
    context: &str,
    _candidates: &[ActionCandidate],
    candidate_list: &str,
    trace: &mut ChainTrace,
) -> Result<String, GatewayError> {
    let templates = request.templates;
    match request.style {
        PromptStyle::Direct => {
            let messages = vec![
                ChatMessage::system(&templates.system),
                ChatMessage::user(fill(
                    &templates.direct_user,
                    &[("context", context), ("candidates", candidate_list)],
                )),
            ];
            call(request, messages, trace)
        }
        PromptStyle::DirectPref => {
            let preferences = format_for_prompt(request.prefs.entries());
            let messages = vec![
                ChatMessage::system(fill(
                    &templates.system_with_preferences,
                    &[("preferences", preferences.trim_end())],
                )),
                ChatMessage::user(fill(
                    &templates.direct_user,
                    &[("context", context), ("candidates", candidate_list)],
                )),
            ];
            call(request, messages, trace)
        }
        PromptStyle::OpenQuestion => {
            let (problems, problem_list, preferences) =
                problems_and_retrieval(request, context, trace)?;
            let _ = problems;
            let messages = vec![
                ChatMessage::system(&templates.system),
                ChatMessage::user(fill(
                    &templates.answer_user,
                    &[
                        ("context", context),
                        ("problems", problem_list.as_str()),
                        ("preferences", preferences.trim_end()),
                        ("candidates", candidate_list),
                    ],
                )),
            ];
            call(request, messages, trace)
        }
        PromptStyle::ThreeQuestion => {
            let (problems, problem_list, preferences) =
                problems_and_retrieval(request, context, trace)?;
            let _ = problems;
            let answer_messages = vec![
                ChatMessage::system(&templates.system),
                ChatMessage::user(fill(
                    &templates.answer_user,
                    &[
                        ("context", context),
                        ("problems", problem_list.as_str()),
                        ("preferences", preferences.trim_end()),
                        ("candidates", candidate_list),
                    ],
                )),
            ];
            // Two independently sampled candidate answers from the same prompt.
            let first = call(request, answer_messages.clone(), trace)?;
            let second = call(request, answer_messages, trace)?;
            let answers = format!("Answer 1: {first}\nAnswer 2: {second}");
            let messages = vec![
                ChatMessage::system(&templates.system),
                ChatMessage::user(fill(
                    &templates.final_user,
                    &[
                        ("context", context),
                        ("problems", problem_list.as_str()),
                        ("preferences", preferences.trim_end()),
                        ("candidates", candidate_list),
                        ("answers", answers.as_str()),
                    ],
                )),
            ];
            call(request, messages, trace)
        }
    }
}

/// First chain step of the RAG styles: ask for the main problems, then
/// retrieve the closest preferences for each one.
fn problems_and_retrieval(
    request: &DecideRequest,
    context: &str,
    trace: &mut ChainTrace,
) -> Result<(Vec<String>, String, String), GatewayError> {
    let messages = vec![
        ChatMessage::system(&request.templates.system),
        ChatMessage::user(fill(
            &request.templates.problems_user,
            &[("context", context)],
        )),
    ];
    let raw = call(request, messages, trace)?;
    let problems = parse_problems(&raw);

    let mut retrieved: Vec<PreferenceEntry> = Vec::new();
    for problem in &problems {
        let entries = query_top_k(request.prefs, problem, request.top_k, request.embedder)
            .map_err(|e| GatewayError::Transport {
                message: format!("retrieval failed: {e}"),
                elapsed_seconds: 0.0,
            })?;
        trace.retrieval_queries.push(RetrievalRecord {
            query: problem.clone(),
            entries: entries.clone(),
        });
        retrieved.extend(entries);
    }
    let preferences = format_for_prompt(&retrieved);
    let problem_list = problems
        .iter()
        .enumerate()
        .map(|(index, problem)| format!("{}. {}", index + 1, problem))
        .collect::<Vec<_>>()
        .join("\n");
    Ok((problems, problem_list, preferences))
}

fn call(
    request: &DecideRequest,
    messages: Vec<ChatMessage>,
    trace: &mut ChainTrace,
) -> Result<String, GatewayError> {
    let (reply, seconds) = timed_complete(request.backend, &messages, request.params)?;
    trace.llm_calls.push(LlmCallRecord {
        messages,
        reply: reply.clone(),
        seconds,
    });
    Ok(reply)
}

/// Numbered action list as shown to the model.
pub fn numbered(candidates: &[ActionCandidate]) -> String {
    candidates
        .iter()
        .enumerate()
        .map(|(index, candidate)| format!("{}. {}", index + 1, candidate.label))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Extract up to three problem statements from a numbered or bulleted list.
/// Fewer items are kept as found; a reply with no list at all becomes one
/// problem. Empty items are dropped.
pub fn parse_problems(raw: &str) -> Vec<String> {
    let mut problems = Vec::new();
    for line in raw.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(item) = strip_list_marker(trimmed) {
            if !item.is_empty() {
                problems.push(item.to_string());
                if problems.len() == 3 {
                    break;
                }
            }
        }
    }
    if problems.is_empty() {
        let whole = raw.trim();
        if !whole.is_empty() {
            problems.push(whole.to_string());
        }
    }
    problems
}

/// `1. foo` / `2) foo` / `- foo` / `* foo` / `• foo` → `foo`.
fn strip_list_marker(line: &str) -> Option<&str> {
    for bullet in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(bullet) {
            return Some(rest.trim());
        }
    }
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &line[digits..];
        for marker in [". ", ") ", ": "] {
            if let Some(item) = rest.strip_prefix(marker) {
                return Some(item.trim());
            }
        }
        // "1." with no trailing space before the text
        if let Some(item) = rest.strip_prefix('.') {
            return Some(item.trim());
        }
    }
    None
}
