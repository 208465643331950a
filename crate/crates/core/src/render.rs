//! Deterministic renderings of a house snapshot for prompts.
//!
//! Two representations over the same data: a natural-language text built
//! from per-category sentence templates, and a JSON document with a stable
//! key order. Both are pure functions of the snapshot, byte-identical across
//! calls.

use serde::{Deserialize, Serialize};

use crate::home::{Device, DeviceCategory, DeviceId, DeviceKind, HouseState, Room, Unit};

/// Which contextual representation to feed the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Natural,
    Json,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Natural => "natural",
            Representation::Json => "json",
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Representation {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        match raw.to_ascii_lowercase().as_str() {
            "natural" | "text" | "textual" => Ok(Representation::Natural),
            "json" => Ok(Representation::Json),
            other => Err(format!("unknown representation `{other}` (natural|json)")),
        }
    }
}

/// Render the full house state in the requested representation.
pub fn render(state: &HouseState, rep: Representation) -> String {
    match rep {
        Representation::Natural => render_natural(state),
        Representation::Json => render_json(state),
    }
}

/// Render the block for a single room.
pub fn render_room(room: &Room, state: &HouseState, rep: Representation) -> String {
    match rep {
        Representation::Natural => natural_room_block(room, state),
        Representation::Json => {
            serde_json::to_string_pretty(&json_room(room, state)).expect("room serializes")
        }
    }
}

// --- natural representation ---

fn render_natural(state: &HouseState) -> String {
    let mut blocks: Vec<String> = Vec::new();

    let mut head = String::from("Current State of the House:\n");
    for user in &state.users {
        let room_name = state
            .room(&user.location)
            .map(|r| r.name.as_str())
            .unwrap_or(user.location.0.as_str());
        head.push_str(&format!("User {} is in the {}.\n", user.user_id, room_name));
        head.push_str(&format!("User is {}.\n", user.current_activity));
        if let Some(previous) = user.activity_history.last() {
            head.push_str(&format!("Previously: User {}\n", previous));
        }
    }
    blocks.push(head);

    for room in &state.rooms {
        blocks.push(natural_room_block(room, state));
    }

    let mut tail = String::new();
    if !state.cleaning.last.is_empty() {
        tail.push_str(&state.cleaning.last);
        tail.push('\n');
    }
    if !state.cleaning.cadence.is_empty() {
        tail.push_str(&state.cleaning.cadence);
        tail.push('\n');
    }
    for device in state.global_devices() {
        tail.push_str(&device_sentence(device));
        tail.push('\n');
    }
    tail.push_str(&format!("Time: {}\n", state.clock_display()));
    tail.push_str(&format!(
        "Global house temperature is {}°C,\noutside temperature is {}°C.\n",
        state.inside_temp_c, state.outside_temp_c
    ));
    if !state.action_history.is_empty() {
        tail.push_str("Previous actions taken in the house:\n");
        for action in &state.action_history {
            tail.push_str(&format!("- {}\n", action));
        }
    }
    blocks.push(tail);

    blocks.join("\n")
}

/// One room block: name prefix, then curtains, lights, TV, other actuators
/// and sensors, each on its own line.
fn natural_room_block(room: &Room, state: &HouseState) -> String {
    let devices: Vec<&Device> = state.room_devices(room).collect();

    let curtains: Vec<&Device> = devices
        .iter()
        .copied()
        .filter(|d| d.category == DeviceCategory::Curtains)
        .collect();
    let lights: Vec<&Device> = devices
        .iter()
        .copied()
        .filter(|d| d.category.is_light())
        .collect();
    let tvs: Vec<&Device> = devices
        .iter()
        .copied()
        .filter(|d| d.category == DeviceCategory::Tv)
        .collect();
    let other_actuators: Vec<&Device> = devices
        .iter()
        .copied()
        .filter(|d| {
            d.kind == DeviceKind::Actuator
                && !d.category.is_light()
                && d.category != DeviceCategory::Curtains
                && d.category != DeviceCategory::Tv
        })
        .collect();
    let sensors: Vec<&Device> = devices
        .iter()
        .copied()
        .filter(|d| d.kind == DeviceKind::Sensor)
        .collect();

    let mut lines: Vec<String> = Vec::new();
    for device in curtains {
        let power = device.power().map(|p| p.display()).unwrap_or("Off");
        lines.push(format!("{} are {}.", device.name, power));
    }
    if !lights.is_empty() {
        let names: Vec<&str> = lights.iter().map(|d| d.name.as_str()).collect();
        let states: Vec<String> = lights.iter().map(|d| light_state(d)).collect();
        if lights.len() == 1 {
            lines.push(format!("Lights: {} are {}.", names[0], states[0]));
        } else {
            lines.push(format!(
                "Lights: {} are respectively {}.",
                names.join(", "),
                states.join(", ")
            ));
        }
    }
    for device in tvs {
        let power = device.power().map(|p| p.display_lower()).unwrap_or("off");
        lines.push(format!(
            "There is a {} in the room and its state is {}.",
            device.name, power
        ));
    }
    for device in other_actuators {
        lines.push(device_sentence(device));
    }
    for device in sensors {
        lines.push(sensor_sentence(device));
    }

    match lines.split_first() {
        None => format!("{}:\n", room.name),
        Some((first, rest)) => {
            let mut block = format!("{}: {}\n", room.name, first);
            for line in rest {
                block.push_str(line);
                block.push('\n');
            }
            block
        }
    }
}

fn light_state(device: &Device) -> String {
    let power = device.power().map(|p| p.display()).unwrap_or("Off");
    match device.state.luminosity {
        Some(lum) => format!("{} ({}%)", power, lum),
        None => power.to_string(),
    }
}

/// Sentence for an actuator outside the dedicated room templates: HVAC,
/// smart door, and the generic "name + status" fallback.
fn device_sentence(device: &Device) -> String {
    match device.category {
        DeviceCategory::Hvac => {
            let power = device.power().map(|p| p.display_lower()).unwrap_or("off");
            match device.state.setpoint_c {
                Some(setpoint) => format!(
                    "{} is {} with objective to {}°C.",
                    device.name, power, setpoint
                ),
                None => format!("{} is {}.", device.name, power),
            }
        }
        DeviceCategory::SmartDoor => {
            let power = device.power().map(|p| p.display_lower()).unwrap_or("locked");
            format!("{} is {}.", device.name, power)
        }
        _ if device.kind == DeviceKind::Sensor => sensor_sentence(device),
        _ => {
            let power = device.power().map(|p| p.display()).unwrap_or("Off");
            format!("{} is {}.", device.name, power)
        }
    }
}

fn sensor_sentence(device: &Device) -> String {
    let reading = device.state.reading;
    match device.category {
        DeviceCategory::Co2Sensor => {
            let value = reading.map(|r| r.value).unwrap_or_default();
            format!("CO2 level in room is {}ppm.", value)
        }
        _ => match reading {
            Some(r) => format!("{} reads {}{}.", device.name, r.value, r.unit.suffix()),
            None => format!("{} reads nothing.", device.name),
        },
    }
}

// --- JSON representation ---

#[derive(Serialize)]
struct JsonHouse<'a> {
    time: String,
    users: Vec<JsonUser<'a>>,
    rooms: Vec<JsonRoom<'a>>,
    global_devices: Vec<JsonDevice<'a>>,
    cleaning: [&'a str; 2],
    inside_temperature_c: i64,
    outside_temperature_c: i64,
    action_history: &'a [String],
}

#[derive(Serialize)]
struct JsonUser<'a> {
    user: i64,
    room: &'a str,
    activity: &'a str,
    previous_activities: &'a [String],
}

#[derive(Serialize)]
struct JsonRoom<'a> {
    name: &'a str,
    devices: Vec<JsonDevice<'a>>,
}

#[derive(Serialize)]
struct JsonDevice<'a> {
    id: &'a str,
    name: &'a str,
    category: DeviceCategory,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    luminosity: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    setpoint_c: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reading: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unit: Option<&'static str>,
}

fn json_device<'a>(device: &'a Device) -> JsonDevice<'a> {
    JsonDevice {
        id: &device.id.0,
        name: &device.name,
        category: device.category,
        state: device.power().map(|p| p.display()),
        luminosity: device.state.luminosity,
        setpoint_c: device.state.setpoint_c,
        reading: device.state.reading.map(|r| r.value),
        unit: device.state.reading.map(|r| match r.unit {
            Unit::Ppm => "ppm",
            Unit::Celsius => "°C",
            Unit::PercentRh => "%RH",
        }),
    }
}

fn json_room<'a>(room: &'a Room, state: &'a HouseState) -> JsonRoom<'a> {
    JsonRoom {
        name: &room.name,
        devices: state.room_devices(room).map(json_device).collect(),
    }
}

fn render_json(state: &HouseState) -> String {
    let doc = JsonHouse {
        time: state.clock_display(),
        users: state
            .users
            .iter()
            .map(|u| JsonUser {
                user: u.user_id,
                room: state
                    .room(&u.location)
                    .map(|r| r.name.as_str())
                    .unwrap_or(u.location.0.as_str()),
                activity: &u.current_activity,
                previous_activities: &u.activity_history,
            })
            .collect(),
        rooms: state.rooms.iter().map(|r| json_room(r, state)).collect(),
        global_devices: state.global_devices().map(json_device).collect(),
        cleaning: [&state.cleaning.last, &state.cleaning.cadence],
        inside_temperature_c: state.inside_temp_c,
        outside_temperature_c: state.outside_temp_c,
        action_history: &state.action_history,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("house renders as JSON");
    text.push('\n');
    text
}

/// Device ids present in a JSON rendering, for parity checks against the
/// natural text.
pub fn json_device_ids(rendered: &str) -> Result<Vec<DeviceId>, serde_json::Error> {
    #[derive(Deserialize)]
    struct Doc {
        rooms: Vec<RoomDoc>,
        global_devices: Vec<DeviceDoc>,
    }
    #[derive(Deserialize)]
    struct RoomDoc {
        devices: Vec<DeviceDoc>,
    }
    #[derive(Deserialize)]
    struct DeviceDoc {
        id: String,
    }
    let doc: Doc = serde_json::from_str(rendered)?;
    let mut ids: Vec<DeviceId> = Vec::new();
    for room in doc.rooms {
        ids.extend(room.devices.into_iter().map(|d| DeviceId(d.id)));
    }
    ids.extend(doc.global_devices.into_iter().map(|d| DeviceId(d.id)));
    Ok(ids)
}
