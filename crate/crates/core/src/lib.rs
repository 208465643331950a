//! Decision engine for LLM-driven smart home automation.
//!
//! The crate models a home as an immutable snapshot ([`home::HouseState`]),
//! renders it into prompt-ready text ([`render`]), builds the filtered list of
//! actions a model may take ([`actions`]), retrieves tagged user preferences by
//! embedding similarity ([`prefs`]), talks to any chat-completions server
//! ([`llm`]), orchestrates the four prompting styles ([`engine`]), and runs the
//! graded scenario benchmark ([`bench`]).

pub mod actions;
pub mod bench;
pub mod engine;
pub mod home;
pub mod llm;
pub mod prefs;
pub mod render;

pub use actions::{build_actions, ActionCandidate, ActionCode};
pub use engine::{decide, ChainTrace, PromptStyle};
pub use home::{load_house, HouseState};
pub use llm::{parse_outcome, Backend, DecisionOutcome, GenerationParams};
pub use prefs::{load_preferences, Embedder, PreferenceEntry, VectorIndex};
pub use render::{render, Representation};
