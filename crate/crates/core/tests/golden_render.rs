//! Golden-file tests: both renderings of every shipped house fixture are
//! pinned byte-for-byte. Regenerate with `UPDATE_GOLDEN=1 cargo test -p
//! hearth-core --test golden_render` after an intentional template change.

mod common;

use std::path::PathBuf;

use common::fixture_dir;
use hearth_core::home::load_house;
use hearth_core::render::{render, render_room, Representation};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check(name: &str, rendered: &str) {
    let path = golden_dir().join(name);
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, rendered).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {name}; run with UPDATE_GOLDEN=1"));
    assert_eq!(rendered, expected, "rendering drifted from {name}");
}

fn house_fixtures() -> Vec<PathBuf> {
    let mut paths: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "house"))
        .collect();
    paths.sort();
    assert_eq!(paths.len(), 12, "11 scenario houses plus the reduction fixture");
    paths
}

#[test]
fn every_fixture_rendering_matches_its_golden_file() {
    for path in house_fixtures() {
        let state = load_house(&path).unwrap();
        let stem = path.file_stem().unwrap().to_string_lossy();
        check(&format!("{stem}.natural.txt"), &render(&state, Representation::Natural));
        check(&format!("{stem}.json.txt"), &render(&state, Representation::Json));
    }
}

/// Every device name appears in its own room block (or the global footer),
/// exactly once per device of that name in the room.
#[test]
fn every_device_appears_in_the_natural_rendering() {
    for path in house_fixtures() {
        let state = load_house(&path).unwrap();
        for room in &state.rooms {
            let block = render_room(room, &state, Representation::Natural);
            for device in state.room_devices(room) {
                let expected = state
                    .room_devices(room)
                    .filter(|d| d.name == device.name)
                    .count();
                assert_eq!(
                    block.matches(&device.name).count(),
                    expected,
                    "device `{}` in room `{}` of {}",
                    device.name,
                    room.name,
                    path.display()
                );
            }
        }
        let text = render(&state, Representation::Natural);
        for device in state.global_devices() {
            assert!(
                text.contains(&device.name),
                "global device `{}` missing from rendering of {}",
                device.name,
                path.display()
            );
        }
    }
}

/// The JSON and natural variants expose the same devices and numbers.
#[test]
fn representations_agree_on_devices_and_values() {
    for path in house_fixtures() {
        let state = load_house(&path).unwrap();
        let json = render(&state, Representation::Json);
        let natural = render(&state, Representation::Natural);

        let mut ids = hearth_core::render::json_device_ids(&json).unwrap();
        let mut expected: Vec<_> = state.devices.keys().cloned().collect();
        ids.sort_by(|a, b| a.0.cmp(&b.0));
        expected.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(ids, expected, "{}", path.display());

        let mut numbers: Vec<String> = vec![
            state.inside_temp_c.to_string(),
            state.outside_temp_c.to_string(),
        ];
        for device in state.devices.values() {
            if let Some(reading) = device.state.reading {
                numbers.push(reading.value.to_string());
            }
            if let Some(setpoint) = device.state.setpoint_c {
                numbers.push(setpoint.to_string());
            }
            if let Some(luminosity) = device.state.luminosity {
                numbers.push(luminosity.to_string());
            }
        }
        for number in numbers {
            assert!(json.contains(&number), "{} missing {number}", path.display());
            assert!(natural.contains(&number), "{} missing {number}", path.display());
        }
    }
}
