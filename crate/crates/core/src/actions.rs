//! Action-space construction and the random baseline.
//!
//! The builder walks the device list once and keeps an actuator when it is
//! in the user's room, house-global, or currently switched on — everything
//! else is filtered out. Two meta actions close the list: interact with the
//! user, and do nothing.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::home::{DeviceId, HouseState, Location};

/// Numeric action tag: 1 acts on a device, 2 talks to the user, 0 does
/// nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionCode {
    NoAction = 0,
    DeviceToggle = 1,
    InteractWithUser = 2,
}

pub const INTERACT_LABEL: &str = "Interact with user";
pub const NO_ACTION_LABEL: &str = "No action required";

/// One selectable action. Device actions carry the device id and a label of
/// the form `<name> is <state>`; selecting one toggles that device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCandidate {
    pub code: ActionCode,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_id: Option<DeviceId>,
}

impl ActionCandidate {
    pub fn device(label: String, device_id: DeviceId) -> Self {
        ActionCandidate {
            code: ActionCode::DeviceToggle,
            label,
            device_id: Some(device_id),
        }
    }

    pub fn interact() -> Self {
        ActionCandidate {
            code: ActionCode::InteractWithUser,
            label: INTERACT_LABEL.into(),
            device_id: None,
        }
    }

    pub fn no_action() -> Self {
        ActionCandidate {
            code: ActionCode::NoAction,
            label: NO_ACTION_LABEL.into(),
            device_id: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("unknown user id {0}")]
    UnknownUser(i64),
    #[error("two eligible devices produce the same action label `{0}`")]
    DuplicateLabel(String),
}

/// Build the filtered action list for one user.
///
/// Keeps every actuator located in the user's room or globally, plus any
/// actuator that is currently active (so it can be switched back off), then
/// appends the interact and no-action meta actions, in that order.
pub fn build_actions(user_id: i64, state: &HouseState) -> Result<Vec<ActionCandidate>, ActionError> {
    let user = state
        .user(user_id)
        .ok_or(ActionError::UnknownUser(user_id))?;
    let mut candidates = Vec::new();
    for device in state.devices.values() {
        if !device.is_actuator() {
            continue;
        }
        let Some(power) = device.power() else { continue };
        let in_reach = match &device.location {
            Location::Room(room) => room == &user.location,
            Location::Global => true,
        };
        if in_reach || power.is_active() {
            let label = format!("{} is {}", device.name, power.display());
            if candidates
                .iter()
                .any(|c: &ActionCandidate| c.label == label)
            {
                return Err(ActionError::DuplicateLabel(label));
            }
            candidates.push(ActionCandidate::device(label, device.id.clone()));
        }
    }
    candidates.push(ActionCandidate::interact());
    candidates.push(ActionCandidate::no_action());
    Ok(candidates)
}

/// Size of the unfiltered action space: one action per actuator plus the two
/// meta actions. This is what the builder starts from before filtering.
pub fn raw_action_count(state: &HouseState) -> usize {
    state.devices.values().filter(|d| d.is_actuator()).count() + 2
}

/// Per-scenario tallies of how the rubric rates each candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricCounts {
    pub n_rated_1: u64,
    pub n_rated_2: u64,
    pub n_total: u64,
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("rubric counts are inconsistent: {0}+{1} rated out of {2} candidates")]
    Inconsistent(u64, u64, u64),
    #[error("cannot compute a baseline over zero candidates")]
    Empty,
}

/// Expected grade of a uniformly random action choice:
/// `(n_rated_1 + 2*n_rated_2) / n_total`, computed exactly.
pub fn baseline_grade(counts: RubricCounts) -> Result<Rational64, BaselineError> {
    if counts.n_total == 0 {
        return Err(BaselineError::Empty);
    }
    if counts.n_rated_1 + counts.n_rated_2 > counts.n_total {
        return Err(BaselineError::Inconsistent(
            counts.n_rated_1,
            counts.n_rated_2,
            counts.n_total,
        ));
    }
    Ok(Rational64::new(
        (counts.n_rated_1 + 2 * counts.n_rated_2) as i64,
        counts.n_total as i64,
    ))
}

/// Pick one candidate uniformly at random. The seed fully determines the
/// pick; there is no hidden global generator.
pub fn random_policy(seed: u64, candidates: &[ActionCandidate]) -> &ActionCandidate {
    assert!(!candidates.is_empty(), "candidate list is empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = Uniform::from(0..candidates.len()).sample(&mut rng);
    &candidates[index]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::home::load_house_str;

    // The hand-traced example: user in the livingroom, four livingroom
    // actuators, one switched-off bedroom lamp, HVAC and door global.
    fn example_house() -> HouseState {
        load_house_str(
            r#"{
            "rooms": [
                {"id": "livingroom", "name": "Livingroom",
                 "devices": ["lr_main", "lr_lamp", "lr_curtains", "lr_tv"]},
                {"id": "bedroom", "name": "Bedroom", "devices": ["bd_lamp"]}
            ],
            "devices": [
                {"id": "lr_main", "name": "main", "kind": "actuator", "category": "main_light",
                 "location": "livingroom", "state": {"power": "off"}},
                {"id": "lr_lamp", "name": "floor lamp", "kind": "actuator", "category": "auxiliary_light",
                 "location": "livingroom", "state": {"power": "off"}},
                {"id": "lr_curtains", "name": "Curtains", "kind": "actuator", "category": "curtains",
                 "location": "livingroom", "state": {"power": "closed"}},
                {"id": "lr_tv", "name": "TV", "kind": "actuator", "category": "tv",
                 "location": "livingroom", "state": {"power": "on"}},
                {"id": "bd_lamp", "name": "bedside lamp", "kind": "actuator", "category": "auxiliary_light",
                 "location": "bedroom", "state": {"power": "off"}},
                {"id": "hvac", "name": "Centralized HVAC system", "kind": "actuator", "category": "hvac",
                 "location": "global", "state": {"power": "on", "setpoint_c": 20}},
                {"id": "door", "name": "Entrance smart Door", "kind": "actuator", "category": "smart_door",
                 "location": "global", "state": {"power": "locked"}}
            ],
            "users": [{"id": 1, "room": "livingroom", "activity": "watching TV", "history": []}],
            "clock": "22:21",
            "inside_temp_c": 20,
            "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""},
            "action_history": []
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn builds_eight_candidates_for_the_example_house() {
        let state = example_house();
        let candidates = build_actions(1, &state).unwrap();
        let labels: Vec<&str> = candidates.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "main is Off",
                "floor lamp is Off",
                "Curtains is Closed",
                "TV is On",
                "Centralized HVAC system is On",
                "Entrance smart Door is Locked",
                "Interact with user",
                "No action required",
            ]
        );
        assert_eq!(candidates[6].code, ActionCode::InteractWithUser);
        assert_eq!(candidates[7].code, ActionCode::NoAction);
    }

    #[test]
    fn switched_on_device_elsewhere_is_included() {
        let mut text = r#"{
            "rooms": [
                {"id": "livingroom", "name": "Livingroom", "devices": []},
                {"id": "bedroom", "name": "Bedroom", "devices": ["bd_lamp"]}
            ],
            "devices": [
                {"id": "bd_lamp", "name": "bedside lamp", "kind": "actuator",
                 "category": "auxiliary_light", "location": "bedroom", "state": {"power": "POWER"}}
            ],
            "users": [{"id": 1, "room": "livingroom", "activity": "reading", "history": []}],
            "clock": "10:00", "inside_temp_c": 20, "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""}, "action_history": []
        }"#
        .to_string();

        let off = load_house_str(&text.replace("POWER", "off")).unwrap();
        assert_eq!(build_actions(1, &off).unwrap().len(), 2);

        text = text.replace("POWER", "on");
        let on = load_house_str(&text).unwrap();
        let candidates = build_actions(1, &on).unwrap();
        assert_eq!(candidates.len(), 3);
        assert_eq!(candidates[0].label, "bedside lamp is On");
    }

    #[test]
    fn house_without_actuators_yields_only_meta_actions() {
        let state = load_house_str(
            r#"{
            "rooms": [{"id": "kitchen", "name": "Kitchen", "devices": ["co2"]}],
            "devices": [
                {"id": "co2", "name": "CO2", "kind": "sensor", "category": "co2_sensor",
                 "location": "kitchen", "state": {"reading": {"value": 473, "unit": "ppm"}}}
            ],
            "users": [{"id": 1, "room": "kitchen", "activity": "cooking", "history": []}],
            "clock": "10:00", "inside_temp_c": 20, "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""}, "action_history": []
        }"#,
        )
        .unwrap();
        let candidates = build_actions(1, &state).unwrap();
        assert_eq!(candidates.len(), 2);
        assert_eq!(candidates[0].code, ActionCode::InteractWithUser);
        assert_eq!(candidates[1].code, ActionCode::NoAction);
    }

    #[test]
    fn unknown_user_is_an_error() {
        let state = example_house();
        assert!(matches!(
            build_actions(99, &state),
            Err(ActionError::UnknownUser(99))
        ));
    }

    #[test]
    fn turning_on_an_out_of_room_actuator_adds_exactly_one_candidate() {
        let state = example_house();
        let before = build_actions(1, &state).unwrap();
        let mut on = state.clone();
        on.devices
            .get_mut(&DeviceId("bd_lamp".into()))
            .unwrap()
            .state
            .power = Some(crate::home::Power::On);
        let after = build_actions(1, &on).unwrap();
        assert_eq!(after.len(), before.len() + 1);
        for candidate in &before {
            if candidate.code == ActionCode::DeviceToggle {
                assert!(after.iter().any(|c| c.label == candidate.label));
            }
        }
    }

    #[test]
    fn baseline_grade_matches_hand_arithmetic() {
        let grade = baseline_grade(RubricCounts {
            n_rated_1: 1,
            n_rated_2: 2,
            n_total: 6,
        })
        .unwrap();
        assert_eq!(grade, Rational64::new(5, 6));

        let zero = baseline_grade(RubricCounts {
            n_rated_1: 0,
            n_rated_2: 0,
            n_total: 6,
        })
        .unwrap();
        assert_eq!(zero, Rational64::new(0, 1));

        let max = baseline_grade(RubricCounts {
            n_rated_1: 0,
            n_rated_2: 6,
            n_total: 6,
        })
        .unwrap();
        assert_eq!(max, Rational64::new(2, 1));

        assert!(baseline_grade(RubricCounts {
            n_rated_1: 0,
            n_rated_2: 0,
            n_total: 0,
        })
        .is_err());
    }

    #[test]
    fn random_policy_is_deterministic_per_seed() {
        let state = example_house();
        let candidates = build_actions(1, &state).unwrap();
        for seed in 0..32 {
            assert_eq!(
                random_policy(seed, &candidates),
                random_policy(seed, &candidates)
            );
        }
        let single = [ActionCandidate::no_action()];
        assert_eq!(random_policy(7, &single), &single[0]);
    }

    #[test]
    fn random_policy_is_uniform_within_six_sigma() {
        let state = example_house();
        let candidates = build_actions(1, &state).unwrap();
        let six: Vec<_> = candidates.into_iter().take(6).collect();
        let draws = 100_000u64;
        let mut counts = vec![0u64; six.len()];
        for seed in 0..draws {
            let picked = random_policy(seed, &six);
            let index = six.iter().position(|c| c == picked).unwrap();
            counts[index] += 1;
        }
        let p = 1.0 / six.len() as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for count in counts {
            let freq = count as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 6.0 * sigma,
                "frequency {freq} outside 6 sigma of {p}"
            );
        }
    }
}
