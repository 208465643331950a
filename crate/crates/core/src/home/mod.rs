//! Immutable domain model of the smart home: rooms, devices, users,
//! global systems, and the wall clock.
//!
//! A [`HouseState`] is a value: loading produces a validated snapshot, and
//! every operation that "changes" the house returns a new snapshot.

mod schema;

pub use schema::{load_house, load_house_str, save_house, save_house_str, HouseLoadError};

use chrono::NaiveTime;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionCode;
use crate::llm::DecisionOutcome;

/// Identifier of a room, unique within a house. The literal id `global` is
/// reserved for [`Location::Global`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoomId(pub String);

impl std::fmt::Display for RoomId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of a device, unique across the whole house.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl std::fmt::Display for DeviceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Sensor,
    Actuator,
}

/// Device categories with a dedicated natural-language template. Anything
/// else is `Generic` and renders as "name + status".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceCategory {
    MainLight,
    AuxiliaryLight,
    Tv,
    Curtains,
    Hvac,
    SmartDoor,
    Co2Sensor,
    TemperatureSensor,
    HumiditySensor,
    Generic,
}

impl DeviceCategory {
    pub fn is_light(self) -> bool {
        matches!(self, DeviceCategory::MainLight | DeviceCategory::AuxiliaryLight)
    }

    /// Kind this category is restricted to, if any. `Generic` devices may be
    /// either sensors or actuators.
    pub fn required_kind(self) -> Option<DeviceKind> {
        match self {
            DeviceCategory::MainLight
            | DeviceCategory::AuxiliaryLight
            | DeviceCategory::Tv
            | DeviceCategory::Curtains
            | DeviceCategory::Hvac
            | DeviceCategory::SmartDoor => Some(DeviceKind::Actuator),
            DeviceCategory::Co2Sensor
            | DeviceCategory::TemperatureSensor
            | DeviceCategory::HumiditySensor => Some(DeviceKind::Sensor),
            DeviceCategory::Generic => None,
        }
    }
}

/// Binary power position of an actuator. Each category uses one pair:
/// lights, TV, HVAC and generic actuators are On/Off, curtains are
/// Open/Closed, smart doors are Locked/Unlocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Power {
    On,
    Off,
    Open,
    Closed,
    Locked,
    Unlocked,
}

impl Power {
    /// Whether the device is in its active position (On, Open or Unlocked).
    /// Active devices are always selectable so they can be switched back.
    pub fn is_active(self) -> bool {
        matches!(self, Power::On | Power::Open | Power::Unlocked)
    }

    /// The opposite position within the same pair.
    pub fn toggled(self) -> Power {
        match self {
            Power::On => Power::Off,
            Power::Off => Power::On,
            Power::Open => Power::Closed,
            Power::Closed => Power::Open,
            Power::Locked => Power::Unlocked,
            Power::Unlocked => Power::Locked,
        }
    }

    /// Capitalized display form, used in action labels and room lines.
    pub fn display(self) -> &'static str {
        match self {
            Power::On => "On",
            Power::Off => "Off",
            Power::Open => "Open",
            Power::Closed => "Closed",
            Power::Locked => "Locked",
            Power::Unlocked => "Unlocked",
        }
    }

    /// Lowercase display form ("its state is on").
    pub fn display_lower(self) -> &'static str {
        match self {
            Power::On => "on",
            Power::Off => "off",
            Power::Open => "open",
            Power::Closed => "closed",
            Power::Locked => "locked",
            Power::Unlocked => "unlocked",
        }
    }

    fn pair(self) -> (Power, Power) {
        match self {
            Power::On | Power::Off => (Power::On, Power::Off),
            Power::Open | Power::Closed => (Power::Open, Power::Closed),
            Power::Locked | Power::Unlocked => (Power::Locked, Power::Unlocked),
        }
    }

    /// Whether `self` and `other` belong to the same On/Off-style pair.
    pub fn same_pair(self, other: Power) -> bool {
        self.pair() == other.pair()
    }
}

/// Measurement unit of a sensor reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Ppm,
    Celsius,
    PercentRh,
}

impl Unit {
    pub fn suffix(self) -> &'static str {
        match self {
            Unit::Ppm => "ppm",
            Unit::Celsius => "°C",
            Unit::PercentRh => "%RH",
        }
    }
}

/// One sensor measurement. Values are integers so renderings never drift
/// on float formatting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reading {
    pub value: i64,
    pub unit: Unit,
}

/// State of one device. `power` is present exactly for actuators and
/// `reading` exactly for sensors; `luminosity` only on light categories and
/// `setpoint_c` only on HVAC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DeviceState {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<Power>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub luminosity: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setpoint_c: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading: Option<Reading>,
}

/// Where a device lives: inside one room, or house-wide (HVAC, entrance
/// door, outside sensors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Room(RoomId),
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub id: DeviceId,
    /// Display name as given by the user; templates and action labels use it.
    pub name: String,
    pub kind: DeviceKind,
    pub category: DeviceCategory,
    #[serde(with = "schema::location_serde")]
    pub location: Location,
    pub state: DeviceState,
}

impl Device {
    pub fn is_actuator(&self) -> bool {
        self.kind == DeviceKind::Actuator
    }

    /// Power position of an actuator. Validated at load, so this is always
    /// `Some` for actuators.
    pub fn power(&self) -> Option<Power> {
        self.state.power
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub name: String,
    /// Devices in declaration order; rendering and action building follow it.
    pub device_ids: Vec<DeviceId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserState {
    pub user_id: i64,
    pub location: RoomId,
    pub current_activity: String,
    /// Ordered oldest first; the most recent entry renders as "Previously:".
    pub activity_history: Vec<String>,
}

/// Free-text pair describing house cleaning: when it last happened and the
/// expected cadence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CleaningNote {
    pub last: String,
    pub cadence: String,
}

/// Full snapshot of the house. Immutable after load; operations return new
/// values, so snapshots are safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseState {
    pub rooms: Vec<Room>,
    /// All devices keyed by id, in declaration order. Global devices are
    /// reachable here even though no room lists them.
    pub devices: IndexMap<DeviceId, Device>,
    pub users: Vec<UserState>,
    pub action_history: Vec<String>,
    pub clock: NaiveTime,
    pub inside_temp_c: i64,
    pub outside_temp_c: i64,
    pub cleaning: CleaningNote,
}

impl HouseState {
    pub fn device(&self, id: &DeviceId) -> Option<&Device> {
        self.devices.get(id)
    }

    pub fn user(&self, user_id: i64) -> Option<&UserState> {
        self.users.iter().find(|u| u.user_id == user_id)
    }

    pub fn room(&self, id: &RoomId) -> Option<&Room> {
        self.rooms.iter().find(|r| &r.id == id)
    }

    /// Devices of one room in declaration order.
    pub fn room_devices<'a>(&'a self, room: &'a Room) -> impl Iterator<Item = &'a Device> {
        room.device_ids.iter().filter_map(|id| self.devices.get(id))
    }

    /// Global devices in declaration order.
    pub fn global_devices(&self) -> impl Iterator<Item = &Device> {
        self.devices
            .values()
            .filter(|d| d.location == Location::Global)
    }

    /// Clock in the 12-hour form used by renderings, e.g. `10:21 PM`.
    pub fn clock_display(&self) -> String {
        self.clock.format("%-I:%M %p").to_string()
    }
}

/// Errors from [`apply_outcome`].
#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("outcome references unknown device `{0}`")]
    UnknownDevice(DeviceId),
    #[error("device `{0}` is not an actuator")]
    NotAnActuator(DeviceId),
}

/// Apply a decision to a snapshot, returning the next snapshot.
///
/// Device actions toggle the target's power position (On↔Off, Open↔Closed,
/// Locked↔Unlocked) and copy the outcome's luminosity/setpoint when present.
/// No-action and interact outcomes leave every device untouched. The action
/// label is appended to the action history in all cases.
pub fn apply_outcome(state: &HouseState, outcome: &DecisionOutcome) -> Result<HouseState, ApplyError> {
    let mut next = state.clone();
    if outcome.action.code == ActionCode::DeviceToggle {
        let id = outcome
            .action
            .device_id
            .clone()
            .ok_or_else(|| ApplyError::UnknownDevice(DeviceId(outcome.action.label.clone())))?;
        let device = next
            .devices
            .get_mut(&id)
            .ok_or_else(|| ApplyError::UnknownDevice(id.clone()))?;
        let power = device
            .state
            .power
            .ok_or_else(|| ApplyError::NotAnActuator(id.clone()))?;
        device.state.power = Some(power.toggled());
        if let Some(lum) = outcome.luminosity {
            if device.category.is_light() {
                device.state.luminosity = Some(lum);
            }
        }
        if let Some(setpoint) = outcome.temperature_setpoint {
            if device.category == DeviceCategory::Hvac {
                device.state.setpoint_c = Some(setpoint);
            }
        }
    }
    next.action_history.push(outcome.action.label.clone());
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionCandidate;

    fn outcome_for(candidate: ActionCandidate) -> DecisionOutcome {
        DecisionOutcome {
            reasoning: String::new(),
            action: candidate,
            temperature_setpoint: None,
            luminosity: None,
            explanation: None,
            failed: false,
        }
    }

    fn tv_house() -> HouseState {
        load_house_str(
            r#"{
              "rooms": [{"id": "livingroom", "name": "Livingroom", "devices": ["tv", "main"]}],
              "devices": [
                {"id": "tv", "name": "TV", "kind": "actuator", "category": "tv",
                 "location": "livingroom", "state": {"power": "on"}},
                {"id": "main", "name": "main", "kind": "actuator", "category": "main_light",
                 "location": "livingroom", "state": {"power": "off"}}
              ],
              "users": [{"id": 1, "room": "livingroom", "activity": "watching TV", "history": []}],
              "clock": "22:21",
              "inside_temp_c": 20,
              "outside_temp_c": 5,
              "cleaning": {"last": "House was cleaned today.", "cadence": "Expected cleaning one time a week."},
              "action_history": []
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn toggle_turns_tv_off_and_appends_history() {
        let state = tv_house();
        let outcome = outcome_for(ActionCandidate::device(
            "TV is On".into(),
            DeviceId("tv".into()),
        ));
        let next = apply_outcome(&state, &outcome).unwrap();
        assert_eq!(next.devices[&DeviceId("tv".into())].state.power, Some(Power::Off));
        assert_eq!(next.action_history, vec!["TV is On".to_string()]);
        // input snapshot untouched
        assert_eq!(state.devices[&DeviceId("tv".into())].state.power, Some(Power::On));
        assert!(state.action_history.is_empty());
    }

    #[test]
    fn no_action_keeps_devices_and_appends_history() {
        let state = tv_house();
        let outcome = outcome_for(ActionCandidate::no_action());
        let next = apply_outcome(&state, &outcome).unwrap();
        assert_eq!(next.devices, state.devices);
        assert_eq!(next.action_history.len(), 1);
    }

    #[test]
    fn luminosity_passes_through_to_lights() {
        let state = tv_house();
        let mut outcome = outcome_for(ActionCandidate::device(
            "main is Off".into(),
            DeviceId("main".into()),
        ));
        outcome.luminosity = Some(30);
        let next = apply_outcome(&state, &outcome).unwrap();
        let main = &next.devices[&DeviceId("main".into())];
        assert_eq!(main.state.power, Some(Power::On));
        assert_eq!(main.state.luminosity, Some(30));
    }

    #[test]
    fn unknown_device_is_an_error() {
        let state = tv_house();
        let outcome = outcome_for(ActionCandidate::device(
            "ghost is Off".into(),
            DeviceId("ghost".into()),
        ));
        assert!(matches!(
            apply_outcome(&state, &outcome),
            Err(ApplyError::UnknownDevice(_))
        ));
    }

    #[test]
    fn device_id_set_is_stable_under_outcomes() {
        let state = tv_house();
        let ids: Vec<_> = state.devices.keys().cloned().collect();
        let mut current = state;
        for candidate in [
            ActionCandidate::device("TV is On".into(), DeviceId("tv".into())),
            ActionCandidate::interact(),
            ActionCandidate::no_action(),
            ActionCandidate::device("main is Off".into(), DeviceId("main".into())),
        ] {
            current = apply_outcome(&current, &outcome_for(candidate)).unwrap();
            let now: Vec<_> = current.devices.keys().cloned().collect();
            assert_eq!(now, ids);
        }
        assert_eq!(current.action_history.len(), 4);
    }

    #[test]
    fn clock_renders_12_hour() {
        let state = tv_house();
        assert_eq!(state.clock_display(), "10:21 PM");
    }
}
