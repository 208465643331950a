//! Parsing of model replies into decisions.
//!
//! Small models wrap their JSON in prose, so the parser extracts the first
//! balanced `{…}` object instead of parsing the whole reply, then resolves
//! the `action` value against the candidate list through a fixed ladder:
//! exact label, normalized label, device-name containment (must be
//! unambiguous), then no-action/interact synonyms. Anything that does not
//! resolve collapses into the default do-nothing outcome with `failed` set.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::actions::{ActionCandidate, ActionCode};

/// Message delivered to the user when the model's reply could not be turned
/// into an action.
pub const FAILURE_MESSAGE: &str = "I could not decide on an action.";

/// A parsed decision. `failed` marks the default fallback, in which case the
/// action is the no-op and the explanation is [`FAILURE_MESSAGE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub reasoning: String,
    pub action: ActionCandidate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature_setpoint: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub luminosity: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    pub failed: bool,
}

impl DecisionOutcome {
    /// The default outcome: do nothing and tell the user the system failed
    /// to act.
    pub fn default_failure(candidates: &[ActionCandidate]) -> Self {
        let action = candidates
            .iter()
            .find(|c| c.code == ActionCode::NoAction)
            .cloned()
            .unwrap_or_else(ActionCandidate::no_action);
        DecisionOutcome {
            reasoning: String::new(),
            action,
            temperature_setpoint: None,
            luminosity: None,
            explanation: Some(FAILURE_MESSAGE.to_string()),
            failed: true,
        }
    }
}

/// Parse a raw model reply. Total: every input produces an outcome, falling
/// back to [`DecisionOutcome::default_failure`].
pub fn parse_outcome(raw: &str, candidates: &[ActionCandidate]) -> DecisionOutcome {
    parse_outcome_traced(raw, candidates).0
}

/// As [`parse_outcome`], also returning warnings about leniently dropped
/// fields (for the chain trace).
pub fn parse_outcome_traced(
    raw: &str,
    candidates: &[ActionCandidate],
) -> (DecisionOutcome, Vec<String>) {
    let mut warnings = Vec::new();
    match try_parse(raw, candidates, &mut warnings) {
        Some(outcome) => (outcome, warnings),
        None => (DecisionOutcome::default_failure(candidates), warnings),
    }
}

fn try_parse(
    raw: &str,
    candidates: &[ActionCandidate],
    warnings: &mut Vec<String>,
) -> Option<DecisionOutcome> {
    let object = extract_first_object(raw)?;
    let map = object.as_object()?;
    let reasoning = match map.get("reasoning")? {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let action_text = map.get("action")?.as_str()?;
    let action = resolve_action(action_text, candidates)?;

    let temperature_setpoint = match map.get("temperature").and_then(lenient_int) {
        Some(value) => Some(value),
        None => {
            if map.contains_key("temperature") {
                warnings.push("ignored non-integer `temperature` value".into());
            }
            None
        }
    };
    let luminosity = match map.get("luminosity").and_then(lenient_int) {
        Some(value) if (0..=100).contains(&value) => Some(value as u8),
        Some(value) => {
            warnings.push(format!("ignored out-of-range luminosity {value}"));
            None
        }
        None => {
            if map.contains_key("luminosity") {
                warnings.push("ignored non-integer `luminosity` value".into());
            }
            None
        }
    };
    let explanation = map
        .get("explanation")
        .and_then(Value::as_str)
        .map(str::to_string);

    Some(DecisionOutcome {
        reasoning,
        action,
        temperature_setpoint,
        luminosity,
        explanation,
        failed: false,
    })
}

/// Integer from a JSON number or a numeric string ("20" happens a lot).
fn lenient_int(value: &Value) -> Option<i64> {
    match value {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// First balanced top-level JSON object in `raw` that parses. Scans every
/// `{`, extracts a string-aware balanced slice, and tries serde on it.
fn extract_first_object(raw: &str) -> Option<Value> {
    let bytes = raw.as_bytes();
    let mut start = 0;
    while let Some(offset) = raw[start..].find('{') {
        let begin = start + offset;
        if let Some(end) = balanced_end(bytes, begin) {
            if let Ok(value) = serde_json::from_str::<Value>(&raw[begin..=end]) {
                if value.is_object() {
                    return Some(value);
                }
            }
        }
        start = begin + 1;
    }
    None
}

/// Byte index of the `}` closing the object that starts at `begin`, if the
/// braces balance. Tracks JSON string and escape state so braces inside
/// strings do not count.
fn balanced_end(bytes: &[u8], begin: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (index, byte) in bytes.iter().enumerate().skip(begin) {
        if in_string {
            if escaped {
                escaped = false;
            } else if *byte == b'\\' {
                escaped = true;
            } else if *byte == b'"' {
                in_string = false;
            }
            continue;
        }
        match byte {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(index);
                }
            }
            _ => {}
        }
    }
    None
}

fn normalize(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Whether `needle` appears as a contiguous token run inside `haystack`.
/// Token-based so the device "main" does not match "maintain".
fn contains_tokens(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || haystack.len() < needle.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|window| window == needle)
}

fn resolve_action<'a>(
    text: &str,
    candidates: &'a [ActionCandidate],
) -> Option<ActionCandidate> {
    // (a) exact label match
    if let Some(candidate) = candidates.iter().find(|c| c.label == text) {
        return Some(candidate.clone());
    }
    // (b) case- and whitespace-insensitive label match
    let normalized = normalize(text);
    if let Some(candidate) = candidates.iter().find(|c| normalize(&c.label) == normalized) {
        return Some(candidate.clone());
    }
    // (c) device-name containment, valid only when exactly one device matches
    let action_tokens = tokens(text);
    let device_name = |candidate: &'a ActionCandidate| -> Option<&'a str> {
        // Labels have the form "<name> is <state>".
        candidate.label.rsplit_once(" is ").map(|(name, _)| name)
    };
    let matches: Vec<&ActionCandidate> = candidates
        .iter()
        .filter(|c| c.code == ActionCode::DeviceToggle)
        .filter(|c| {
            device_name(c)
                .map(|name| contains_tokens(&action_tokens, &tokens(name)))
                .unwrap_or(false)
        })
        .collect();
    match matches.len() {
        1 => return Some(matches[0].clone()),
        0 => {}
        // Ambiguous: never guess between devices.
        _ => return None,
    }
    // (d) meta-action synonyms
    let no_action = ["no action", "nothing"];
    if no_action.iter().any(|s| normalized.contains(s)) {
        return candidates
            .iter()
            .find(|c| c.code == ActionCode::NoAction)
            .cloned();
    }
    let interact = ["interact", "inform", "tell the user"];
    if interact.iter().any(|s| normalized.contains(s)) {
        return candidates
            .iter()
            .find(|c| c.code == ActionCode::InteractWithUser)
            .cloned();
    }
    None
}
