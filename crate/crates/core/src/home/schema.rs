//! House schema file: loading, validation and saving.
//!
//! A house file is one JSON document:
//!
//! ```json
//! {
//!   "rooms": [{"id": "livingroom", "name": "Livingroom", "devices": ["lr_tv"]}],
//!   "devices": [{"id": "lr_tv", "name": "TV", "kind": "actuator", "category": "tv",
//!                "location": "livingroom", "state": {"power": "on"}}],
//!   "users": [{"id": 1, "room": "livingroom", "activity": "watching TV", "history": []}],
//!   "clock": "22:21",
//!   "inside_temp_c": 20,
//!   "outside_temp_c": 5,
//!   "cleaning": {"last": "...", "cadence": "..."},
//!   "action_history": []
//! }
//! ```
//!
//! `location` is a room id or the reserved word `global`. `clock` is 24-hour
//! `HH:MM`. Sensors carry a `reading`, actuators a `power`.

use std::path::Path;

use chrono::NaiveTime;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    CleaningNote, Device, DeviceCategory, DeviceId, DeviceKind, HouseState, Location, Power, Room,
    RoomId, UserState,
};

#[derive(Debug, Error)]
pub enum HouseLoadError {
    #[error("cannot read house file `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("house file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate device id `{0}`")]
    DuplicateDeviceId(DeviceId),
    #[error("duplicate room id `{0}`")]
    DuplicateRoomId(RoomId),
    #[error("duplicate user id {0}")]
    DuplicateUserId(i64),
    #[error("room `{room}` references unknown device `{device}`")]
    UnknownRoomDevice { room: RoomId, device: DeviceId },
    #[error("device `{device}` is located in unknown room `{room}`")]
    UnknownDeviceRoom { device: DeviceId, room: RoomId },
    #[error("device `{device}` is located in room `{room}` but not listed there")]
    DeviceNotListedInRoom { device: DeviceId, room: RoomId },
    #[error("device `{device}` is listed in room `{listed_in}` but located in `{location}`")]
    DeviceListedElsewhere {
        device: DeviceId,
        listed_in: RoomId,
        location: String,
    },
    #[error("user {user} is in unknown room `{room}`")]
    UnknownUserRoom { user: i64, room: RoomId },
    #[error("room id `global` is reserved")]
    ReservedRoomId,
    #[error("device `{device}`: {problem}")]
    InvalidDevice { device: DeviceId, problem: String },
    #[error("invalid clock `{0}`: expected 24-hour HH:MM")]
    InvalidClock(String),
}

/// Serde helpers for [`Location`]: a room id string, or the reserved word
/// `global`.
pub(crate) mod location_serde {
    use super::{Location, RoomId};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(loc: &Location, ser: S) -> Result<S::Ok, S::Error> {
        match loc {
            Location::Global => ser.serialize_str("global"),
            Location::Room(id) => ser.serialize_str(&id.0),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Location, D::Error> {
        let raw = String::deserialize(de)?;
        Ok(if raw == "global" {
            Location::Global
        } else {
            Location::Room(RoomId(raw))
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HouseDoc {
    #[serde(default)]
    rooms: Vec<RoomDoc>,
    #[serde(default)]
    devices: Vec<Device>,
    #[serde(default)]
    users: Vec<UserDoc>,
    clock: String,
    inside_temp_c: i64,
    outside_temp_c: i64,
    #[serde(default)]
    cleaning: CleaningNote,
    #[serde(default)]
    action_history: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RoomDoc {
    id: RoomId,
    name: String,
    #[serde(default)]
    devices: Vec<DeviceId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct UserDoc {
    id: i64,
    room: RoomId,
    activity: String,
    #[serde(default)]
    history: Vec<String>,
}

/// Load and validate a house snapshot from a file.
pub fn load_house(path: impl AsRef<Path>) -> Result<HouseState, HouseLoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HouseLoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_house_str(&text)
}

/// Load and validate a house snapshot from a JSON string.
pub fn load_house_str(text: &str) -> Result<HouseState, HouseLoadError> {
    let doc: HouseDoc = serde_json::from_str(text)?;

    let clock = NaiveTime::parse_from_str(&doc.clock, "%H:%M")
        .map_err(|_| HouseLoadError::InvalidClock(doc.clock.clone()))?;

    let mut devices: IndexMap<DeviceId, Device> = IndexMap::with_capacity(doc.devices.len());
    for device in doc.devices {
        validate_device(&device)?;
        if devices.insert(device.id.clone(), device.clone()).is_some() {
            return Err(HouseLoadError::DuplicateDeviceId(device.id));
        }
    }

    let mut rooms = Vec::with_capacity(doc.rooms.len());
    for room in doc.rooms {
        if room.id.0 == "global" {
            return Err(HouseLoadError::ReservedRoomId);
        }
        if rooms.iter().any(|r: &Room| r.id == room.id) {
            return Err(HouseLoadError::DuplicateRoomId(room.id));
        }
        rooms.push(Room {
            id: room.id,
            name: room.name,
            device_ids: room.devices,
        });
    }

    // Room listings and device locations must agree.
    for room in &rooms {
        for device_id in &room.device_ids {
            let device =
                devices
                    .get(device_id)
                    .ok_or_else(|| HouseLoadError::UnknownRoomDevice {
                        room: room.id.clone(),
                        device: device_id.clone(),
                    })?;
            match &device.location {
                Location::Room(id) if id == &room.id => {}
                Location::Room(id) => {
                    return Err(HouseLoadError::DeviceListedElsewhere {
                        device: device_id.clone(),
                        listed_in: room.id.clone(),
                        location: id.0.clone(),
                    })
                }
                Location::Global => {
                    return Err(HouseLoadError::DeviceListedElsewhere {
                        device: device_id.clone(),
                        listed_in: room.id.clone(),
                        location: "global".into(),
                    })
                }
            }
        }
    }
    for device in devices.values() {
        if let Location::Room(room_id) = &device.location {
            let room = rooms
                .iter()
                .find(|r| &r.id == room_id)
                .ok_or_else(|| HouseLoadError::UnknownDeviceRoom {
                    device: device.id.clone(),
                    room: room_id.clone(),
                })?;
            if !room.device_ids.contains(&device.id) {
                return Err(HouseLoadError::DeviceNotListedInRoom {
                    device: device.id.clone(),
                    room: room_id.clone(),
                });
            }
        }
    }

    let mut users = Vec::with_capacity(doc.users.len());
    for user in doc.users {
        if users.iter().any(|u: &UserState| u.user_id == user.id) {
            return Err(HouseLoadError::DuplicateUserId(user.id));
        }
        if !rooms.iter().any(|r| r.id == user.room) {
            return Err(HouseLoadError::UnknownUserRoom {
                user: user.id,
                room: user.room,
            });
        }
        users.push(UserState {
            user_id: user.id,
            location: user.room,
            current_activity: user.activity,
            activity_history: user.history,
        });
    }

    Ok(HouseState {
        rooms,
        devices,
        users,
        action_history: doc.action_history,
        clock,
        inside_temp_c: doc.inside_temp_c,
        outside_temp_c: doc.outside_temp_c,
        cleaning: doc.cleaning,
    })
}

fn validate_device(device: &Device) -> Result<(), HouseLoadError> {
    let fail = |problem: String| HouseLoadError::InvalidDevice {
        device: device.id.clone(),
        problem,
    };
    if device.name.trim().is_empty() {
        return Err(fail("name is empty".into()));
    }
    if let Some(required) = device.category.required_kind() {
        if device.kind != required {
            return Err(fail(format!(
                "category {:?} requires kind {:?}",
                device.category, required
            )));
        }
    }
    match device.kind {
        DeviceKind::Actuator => {
            let power = device
                .state
                .power
                .ok_or_else(|| fail("actuator without a power state".into()))?;
            let legal = match device.category {
                DeviceCategory::Curtains => matches!(power, Power::Open | Power::Closed),
                DeviceCategory::SmartDoor => matches!(power, Power::Locked | Power::Unlocked),
                _ => matches!(power, Power::On | Power::Off),
            };
            if !legal {
                return Err(fail(format!(
                    "power {:?} is not legal for category {:?}",
                    power, device.category
                )));
            }
            if device.state.reading.is_some() {
                return Err(fail("actuator with a sensor reading".into()));
            }
        }
        DeviceKind::Sensor => {
            if device.state.power.is_some() {
                return Err(fail("sensor with a power state".into()));
            }
            let reading = device
                .state
                .reading
                .ok_or_else(|| fail("sensor without a reading".into()))?;
            if reading.unit == super::Unit::Ppm && reading.value < 0 {
                return Err(fail(format!("negative ppm reading {}", reading.value)));
            }
            if device.state.luminosity.is_some() || device.state.setpoint_c.is_some() {
                return Err(fail("sensor with actuator-only fields".into()));
            }
        }
    }
    if device.state.luminosity.is_some() && !device.category.is_light() {
        return Err(fail("luminosity on a non-light category".into()));
    }
    if let Some(lum) = device.state.luminosity {
        if lum > 100 {
            return Err(fail(format!("luminosity {lum} out of 0–100")));
        }
    }
    if device.state.setpoint_c.is_some() && device.category != DeviceCategory::Hvac {
        return Err(fail("setpoint on a non-HVAC category".into()));
    }
    Ok(())
}

/// Serialize a snapshot back into the house schema document.
pub fn save_house_str(state: &HouseState) -> String {
    let doc = HouseDoc {
        rooms: state
            .rooms
            .iter()
            .map(|r| RoomDoc {
                id: r.id.clone(),
                name: r.name.clone(),
                devices: r.device_ids.clone(),
            })
            .collect(),
        devices: state.devices.values().cloned().collect(),
        users: state
            .users
            .iter()
            .map(|u| UserDoc {
                id: u.user_id,
                room: u.location.clone(),
                activity: u.current_activity.clone(),
                history: u.activity_history.clone(),
            })
            .collect(),
        clock: state.clock.format("%H:%M").to_string(),
        inside_temp_c: state.inside_temp_c,
        outside_temp_c: state.outside_temp_c,
        cleaning: state.cleaning.clone(),
        action_history: state.action_history.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("house document serializes")
}

/// Write a snapshot to a file in the house schema.
pub fn save_house(state: &HouseState, path: impl AsRef<Path>) -> Result<(), HouseLoadError> {
    let path = path.as_ref();
    std::fs::write(path, save_house_str(state)).map_err(|source| HouseLoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "rooms": [],
        "devices": [],
        "users": [],
        "clock": "08:00",
        "inside_temp_c": 20,
        "outside_temp_c": 5,
        "cleaning": {"last": "", "cadence": ""},
        "action_history": []
    }"#;

    #[test]
    fn empty_house_is_valid() {
        let state = load_house_str(MINIMAL).unwrap();
        assert!(state.rooms.is_empty());
        assert!(state.users.is_empty());
        assert_eq!(state.clock_display(), "8:00 AM");
    }

    #[test]
    fn duplicate_device_id_is_rejected() {
        let text = r#"{
            "rooms": [{"id": "kitchen", "name": "Kitchen", "devices": ["main_light"]}],
            "devices": [
                {"id": "main_light", "name": "main", "kind": "actuator", "category": "main_light",
                 "location": "kitchen", "state": {"power": "off"}},
                {"id": "main_light", "name": "main", "kind": "actuator", "category": "main_light",
                 "location": "kitchen", "state": {"power": "on"}}
            ],
            "users": [],
            "clock": "08:00",
            "inside_temp_c": 20,
            "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""},
            "action_history": []
        }"#;
        let err = load_house_str(text).unwrap_err();
        assert!(matches!(err, HouseLoadError::DuplicateDeviceId(id) if id.0 == "main_light"));
    }

    #[test]
    fn sensor_with_power_is_rejected_with_device_name() {
        let text = r#"{
            "rooms": [{"id": "kitchen", "name": "Kitchen", "devices": ["co2"]}],
            "devices": [
                {"id": "co2", "name": "CO2", "kind": "sensor", "category": "co2_sensor",
                 "location": "kitchen", "state": {"power": "on", "reading": {"value": 400, "unit": "ppm"}}}
            ],
            "users": [],
            "clock": "08:00",
            "inside_temp_c": 20, "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""},
            "action_history": []
        }"#;
        let err = load_house_str(text).unwrap_err().to_string();
        assert!(err.contains("co2"), "error should name the device: {err}");
    }

    #[test]
    fn location_room_mismatch_is_rejected() {
        let text = r#"{
            "rooms": [
                {"id": "kitchen", "name": "Kitchen", "devices": ["lamp"]},
                {"id": "bedroom", "name": "Bedroom", "devices": []}
            ],
            "devices": [
                {"id": "lamp", "name": "lamp", "kind": "actuator", "category": "auxiliary_light",
                 "location": "bedroom", "state": {"power": "off"}}
            ],
            "users": [],
            "clock": "08:00",
            "inside_temp_c": 20, "outside_temp_c": 5,
            "cleaning": {"last": "", "cadence": ""},
            "action_history": []
        }"#;
        assert!(matches!(
            load_house_str(text).unwrap_err(),
            HouseLoadError::DeviceListedElsewhere { .. }
        ));
    }

    #[test]
    fn bad_clock_is_rejected() {
        let text = MINIMAL.replace("08:00", "8 o'clock");
        assert!(matches!(
            load_house_str(&text).unwrap_err(),
            HouseLoadError::InvalidClock(_)
        ));
    }

    #[test]
    fn save_then_load_round_trips() {
        let text = r#"{
            "rooms": [{"id": "livingroom", "name": "Livingroom", "devices": ["tv", "co2"]}],
            "devices": [
                {"id": "tv", "name": "TV", "kind": "actuator", "category": "tv",
                 "location": "livingroom", "state": {"power": "on"}},
                {"id": "co2", "name": "CO2", "kind": "sensor", "category": "co2_sensor",
                 "location": "livingroom", "state": {"reading": {"value": 513, "unit": "ppm"}}},
                {"id": "hvac", "name": "Centralized HVAC system", "kind": "actuator", "category": "hvac",
                 "location": "global", "state": {"power": "on", "setpoint_c": 20}}
            ],
            "users": [{"id": 1, "room": "livingroom", "activity": "watching TV",
                       "history": ["was currently looking at TV"]}],
            "clock": "22:21",
            "inside_temp_c": 20,
            "outside_temp_c": 5,
            "cleaning": {"last": "House was cleaned today.", "cadence": "Expected cleaning one time a week."},
            "action_history": ["TV is Off"]
        }"#;
        let state = load_house_str(text).unwrap();
        let reloaded = load_house_str(&save_house_str(&state)).unwrap();
        assert_eq!(state, reloaded);
    }
}
