//! Helpers shared by the integration test suites.

use std::path::PathBuf;

use hearth_core::bench::{load_scenario_dir, ScenarioSpec};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub fn load_all_scenarios() -> Vec<ScenarioSpec> {
    load_scenario_dir(fixture_dir()).expect("shipped scenarios load")
}

/// A reply that resolves in every scenario: the no-op is always a candidate.
pub const UNIVERSAL_REPLY: &str = r#"{"reasoning":"Everything looks fine.","action":"No action required"}"#;

/// A reply with three parseable problems, for the RAG chain steps.
pub const PROBLEMS_REPLY: &str = "1. The room is dark\n2. A device was left on\n3. The air quality is degrading";

/// A reply the parser cannot turn into an action.
pub const MALFORMED_REPLY: &str = "I am really not sure what to do here.";
