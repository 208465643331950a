//! Scenario fixtures, rubric grading, benchmark execution and reporting.
//!
//! A scenario is a house snapshot, a user, and an ordered rubric. Rubric
//! rules pair a grade (2 or 1, best first) with a structured matcher over
//! the decision outcome; grade 0 is the implicit fallthrough.

mod report;
mod run;

pub use report::{
    aggregate, emit_report, render_markdown, AggregateReport, CellSummary, ReportError,
    ReportFormat, ScenarioBaseline, ScenarioSummary,
};
pub use run::{run_benchmark, BenchConfig, BenchError, RunRecord};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{build_actions, ActionCandidate, ActionCode, RubricCounts};
use crate::home::{load_house, DeviceCategory, HouseState, Location, Power, RoomId};
use crate::llm::DecisionOutcome;

/// Evaluation category of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Safety,
    Comfort,
    Preference,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Safety, Category::Comfort, Category::Preference];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Safety => "Safety",
            Category::Comfort => "Comfort",
            Category::Preference => "Preference",
        }
    }
}

/// Which kind of action an outcome took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Device,
    Interact,
    Noop,
}

impl ActionKind {
    fn of(outcome: &DecisionOutcome) -> ActionKind {
        match outcome.action.code {
            ActionCode::DeviceToggle => ActionKind::Device,
            ActionCode::InteractWithUser => ActionKind::Interact,
            ActionCode::NoAction => ActionKind::Noop,
        }
    }
}

/// Predicate over a decision outcome, evaluated against the scenario house.
/// Device-level matchers only ever match device actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Matcher {
    /// The outcome's action kind.
    Kind { kind: ActionKind },
    /// The toggled device belongs to one of these categories.
    Category { categories: Vec<DeviceCategory> },
    /// The toggled device has one of these display names.
    Name { names: Vec<String> },
    /// The toggled device moves `from` → `to`. Under toggle semantics the
    /// device's current power must equal `from`.
    Transition { from: Power, to: Power },
    /// The toggled device sits in the given room ("any light in the room").
    InRoom { room: RoomId },
    /// The outcome sets a luminosity of at most `max` percent.
    LuminosityAtMost { max: u8 },
    /// The outcome sets no luminosity.
    LuminosityAbsent,
    /// The outcome carries a nonempty explanation for the user.
    ExplanationPresent,
    All { of: Vec<Matcher> },
    Any { of: Vec<Matcher> },
}

impl Matcher {
    pub fn matches(&self, outcome: &DecisionOutcome, state: &HouseState) -> bool {
        let device = outcome
            .action
            .device_id
            .as_ref()
            .and_then(|id| state.device(id));
        match self {
            Matcher::Kind { kind } => ActionKind::of(outcome) == *kind,
            Matcher::Category { categories } => {
                device.is_some_and(|d| categories.contains(&d.category))
            }
            Matcher::Name { names } => device.is_some_and(|d| names.contains(&d.name)),
            Matcher::Transition { from, to } => device.is_some_and(|d| {
                d.power()
                    .is_some_and(|power| power == *from && power.toggled() == *to)
            }),
            Matcher::InRoom { room } => {
                device.is_some_and(|d| d.location == Location::Room(room.clone()))
            }
            Matcher::LuminosityAtMost { max } => outcome.luminosity.is_some_and(|lum| lum <= *max),
            Matcher::LuminosityAbsent => outcome.luminosity.is_none(),
            Matcher::ExplanationPresent => outcome
                .explanation
                .as_ref()
                .is_some_and(|text| !text.trim().is_empty()),
            Matcher::All { of } => of.iter().all(|m| m.matches(outcome, state)),
            Matcher::Any { of } => of.iter().any(|m| m.matches(outcome, state)),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Matcher::Transition { from, to } => {
                if from == to || !from.same_pair(*to) || from.toggled() != *to {
                    return Err(format!(
                        "transition {from:?} → {to:?} is not a single toggle"
                    ));
                }
                Ok(())
            }
            Matcher::All { of } | Matcher::Any { of } => {
                if of.is_empty() {
                    return Err("empty matcher composition".into());
                }
                of.iter().try_for_each(Matcher::validate)
            }
            _ => Ok(()),
        }
    }
}

/// One rubric rule: matching outcomes earn `grade`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricRule {
    pub grade: u8,
    pub matcher: Matcher,
}

/// A hand-labeled outcome with its expected grade, shipped with each
/// scenario for rubric fidelity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledOutcome {
    /// Action label, resolved against the built candidate list.
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub luminosity: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default)]
    pub failed: bool,
    pub expected_grade: u8,
}

/// One benchmark scenario: a named house snapshot with a grading rubric.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub category: Category,
    pub house: HouseState,
    pub user_id: i64,
    pub rubric: Vec<RubricRule>,
    /// Grade the rubric assigns to the plain no-action outcome; stated
    /// explicitly in the fixture and cross-checked at load.
    pub noop_grade: u8,
    pub labeled_outcomes: Vec<LabeledOutcome>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario `{name}`: {problem}")]
    Invalid { name: String, problem: String },
    #[error(transparent)]
    House(#[from] crate::home::HouseLoadError),
    #[error("no scenario files found in `{0}`")]
    EmptyDir(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    name: String,
    category: Category,
    /// House file path, relative to the scenario file.
    house: String,
    user_id: i64,
    noop_grade: u8,
    rubric: Vec<RubricRule>,
    #[serde(default)]
    labeled_outcomes: Vec<LabeledOutcome>,
}

/// Load one scenario file, resolving the referenced house file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc: ScenarioDoc = serde_json::from_str(&text)?;
    let invalid = |problem: String| ScenarioError::Invalid {
        name: doc.name.clone(),
        problem,
    };

    let mut last_grade = u8::MAX;
    for rule in &doc.rubric {
        if !(rule.grade == 1 || rule.grade == 2) {
            return Err(invalid(format!("rubric grade {} outside {{1, 2}}", rule.grade)));
        }
        if rule.grade > last_grade {
            return Err(invalid("rubric rules must be ordered best grade first".into()));
        }
        last_grade = rule.grade;
        rule.matcher.validate().map_err(invalid)?;
    }
    if doc.noop_grade > 2 {
        return Err(invalid(format!("noop_grade {} outside {{0, 1, 2}}", doc.noop_grade)));
    }

    let house_path = path
        .parent()
        .map(|dir| dir.join(&doc.house))
        .unwrap_or_else(|| doc.house.clone().into());
    let house = load_house(house_path)?;
    if house.user(doc.user_id).is_none() {
        return Err(invalid(format!("user {} not in house", doc.user_id)));
    }

    let spec = ScenarioSpec {
        name: doc.name,
        category: doc.category,
        house,
        user_id: doc.user_id,
        rubric: doc.rubric,
        noop_grade: doc.noop_grade,
        labeled_outcomes: doc.labeled_outcomes,
    };

    // The stated no-action grade must agree with the rubric.
    let noop = outcome_for_candidate(&ActionCandidate::no_action());
    let graded = grade_outcome(&spec.rubric, &noop, &spec.house);
    if graded != spec.noop_grade {
        return Err(ScenarioError::Invalid {
            name: spec.name,
            problem: format!("rubric grades no-action {graded}, fixture says {}", spec.noop_grade),
        });
    }
    Ok(spec)
}

/// Load every `*.scenario` file in a directory, sorted by file name.
pub fn load_scenario_dir(dir: impl AsRef<Path>) -> Result<Vec<ScenarioSpec>, ScenarioError> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|source| ScenarioError::Io {
            path: dir.display().to_string(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scenario"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(ScenarioError::EmptyDir(dir.display().to_string()));
    }
    paths.into_iter().map(load_scenario).collect()
}

/// Grade one outcome: first matching rule wins (rules are ordered best
/// first), no match is worth 0.
pub fn grade_outcome(rubric: &[RubricRule], outcome: &DecisionOutcome, state: &HouseState) -> u8 {
    rubric
        .iter()
        .find(|rule| rule.matcher.matches(outcome, state))
        .map(|rule| rule.grade)
        .unwrap_or(0)
}

/// The bare outcome produced by picking a candidate with no optional keys,
/// as a random policy would.
pub fn outcome_for_candidate(candidate: &ActionCandidate) -> DecisionOutcome {
    DecisionOutcome {
        reasoning: String::new(),
        action: candidate.clone(),
        temperature_setpoint: None,
        luminosity: None,
        explanation: None,
        failed: false,
    }
}

/// Count how the rubric rates each built candidate, the input to the random
/// baseline.
pub fn candidate_counts(scenario: &ScenarioSpec) -> Result<RubricCounts, crate::actions::ActionError> {
    let candidates = build_actions(scenario.user_id, &scenario.house)?;
    let mut counts = RubricCounts {
        n_rated_1: 0,
        n_rated_2: 0,
        n_total: candidates.len() as u64,
    };
    for candidate in &candidates {
        match grade_outcome(
            &scenario.rubric,
            &outcome_for_candidate(candidate),
            &scenario.house,
        ) {
            1 => counts.n_rated_1 += 1,
            2 => counts.n_rated_2 += 1,
            _ => {}
        }
    }
    Ok(counts)
}

/// Resolve a labeled outcome fixture against the scenario's candidate list.
pub fn resolve_labeled(
    scenario: &ScenarioSpec,
    labeled: &LabeledOutcome,
) -> Result<DecisionOutcome, String> {
    if labeled.failed {
        let candidates = build_actions(scenario.user_id, &scenario.house)
            .map_err(|e| e.to_string())?;
        return Ok(DecisionOutcome::default_failure(&candidates));
    }
    let candidates =
        build_actions(scenario.user_id, &scenario.house).map_err(|e| e.to_string())?;
    let candidate = candidates
        .iter()
        .find(|c| c.label == labeled.action)
        .ok_or_else(|| format!("label `{}` is not a candidate", labeled.action))?;
    Ok(DecisionOutcome {
        reasoning: String::new(),
        action: candidate.clone(),
        temperature_setpoint: labeled.temperature,
        luminosity: labeled.luminosity,
        explanation: labeled.explanation.clone(),
        failed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::home::load_house_str;

    fn night_house() -> HouseState {
        load_house_str(
            r#"{
            "rooms": [{"id": "livingroom", "name": "Livingroom",
                       "devices": ["main", "lamp", "curtains", "tv"]}],
            "devices": [
                {"id": "main", "name": "main", "kind": "actuator", "category": "main_light",
                 "location": "livingroom", "state": {"power": "off"}},
                {"id": "lamp", "name": "floor lamp", "kind": "actuator", "category": "auxiliary_light",
                 "location": "livingroom", "state": {"power": "off"}},
                {"id": "curtains", "name": "Curtains", "kind": "actuator", "category": "curtains",
                 "location": "livingroom", "state": {"power": "closed"}},
                {"id": "tv", "name": "TV", "kind": "actuator", "category": "tv",
                 "location": "livingroom", "state": {"power": "on"}}
            ],
            "users": [{"id": 1, "room": "livingroom", "activity": "standing in the dark", "history": []}],
            "clock": "22:21", "inside_temp_c": 20, "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""}, "action_history": []
        }"#,
        )
        .unwrap()
    }

    /// Rubric of the night-light scenarios: auxiliary light or dimmed main
    /// light earns 2, a bare main light 1.
    fn night_rubric() -> Vec<RubricRule> {
        vec![
            RubricRule {
                grade: 2,
                matcher: Matcher::Any {
                    of: vec![
                        Matcher::All {
                            of: vec![
                                Matcher::Category {
                                    categories: vec![DeviceCategory::AuxiliaryLight],
                                },
                                Matcher::Transition {
                                    from: Power::Off,
                                    to: Power::On,
                                },
                            ],
                        },
                        Matcher::All {
                            of: vec![
                                Matcher::Category {
                                    categories: vec![DeviceCategory::MainLight],
                                },
                                Matcher::Transition {
                                    from: Power::Off,
                                    to: Power::On,
                                },
                                Matcher::LuminosityAtMost { max: 50 },
                            ],
                        },
                    ],
                },
            },
            RubricRule {
                grade: 1,
                matcher: Matcher::All {
                    of: vec![
                        Matcher::Category {
                            categories: vec![DeviceCategory::MainLight],
                        },
                        Matcher::Transition {
                            from: Power::Off,
                            to: Power::On,
                        },
                    ],
                },
            },
        ]
    }

    fn outcome(label: &str, state: &HouseState, luminosity: Option<u8>) -> DecisionOutcome {
        let candidates = build_actions(1, state).unwrap();
        let candidate = candidates.iter().find(|c| c.label == label).unwrap();
        let mut outcome = outcome_for_candidate(candidate);
        outcome.luminosity = luminosity;
        outcome
    }

    #[test]
    fn night_rubric_grades_the_three_bands() {
        let state = night_house();
        let rubric = night_rubric();
        assert_eq!(
            grade_outcome(&rubric, &outcome("floor lamp is Off", &state, None), &state),
            2
        );
        assert_eq!(
            grade_outcome(&rubric, &outcome("main is Off", &state, Some(25)), &state),
            2
        );
        assert_eq!(
            grade_outcome(&rubric, &outcome("main is Off", &state, None), &state),
            1
        );
        assert_eq!(
            grade_outcome(&rubric, &outcome("TV is On", &state, None), &state),
            0
        );
        assert_eq!(
            grade_outcome(
                &rubric,
                &outcome("No action required", &state, None),
                &state
            ),
            0
        );
    }

    #[test]
    fn transition_requires_the_starting_state() {
        let state = night_house();
        // TV is On, so an Off→On transition cannot match it.
        let rule = Matcher::Transition {
            from: Power::Off,
            to: Power::On,
        };
        assert!(!rule.matches(&outcome("TV is On", &state, None), &state));
        let rule = Matcher::Transition {
            from: Power::On,
            to: Power::Off,
        };
        assert!(rule.matches(&outcome("TV is On", &state, None), &state));
    }

    #[test]
    fn non_toggle_transition_is_rejected_at_validation() {
        assert!(Matcher::Transition {
            from: Power::Off,
            to: Power::Open
        }
        .validate()
        .is_err());
        assert!(Matcher::Transition {
            from: Power::On,
            to: Power::On
        }
        .validate()
        .is_err());
        assert!(Matcher::Transition {
            from: Power::Closed,
            to: Power::Open
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn grading_is_pure() {
        let state = night_house();
        let rubric = night_rubric();
        let graded = outcome("floor lamp is Off", &state, None);
        let first = grade_outcome(&rubric, &graded, &state);
        for _ in 0..10 {
            assert_eq!(grade_outcome(&rubric, &graded, &state), first);
        }
    }

    #[test]
    fn candidate_counts_match_hand_tally() {
        let scenario = ScenarioSpec {
            name: "night test".into(),
            category: Category::Safety,
            house: night_house(),
            user_id: 1,
            rubric: night_rubric(),
            noop_grade: 0,
            labeled_outcomes: Vec::new(),
        };
        // Candidates: main(1), floor lamp(2), curtains(0), TV(0), interact(0), noop(0)
        let counts = candidate_counts(&scenario).unwrap();
        assert_eq!(counts.n_total, 6);
        assert_eq!(counts.n_rated_1, 1);
        assert_eq!(counts.n_rated_2, 1);
    }
}
