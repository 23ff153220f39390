//! The bundled BLE112 profile against the measured reference tables.

mod golden;

use blemodel::DeviceProfile;
use golden::golden_diff;

#[test]
fn bundled_profile_matches_tables() {
    let (cells, bad) = golden_diff(&DeviceProfile::ble112());
    assert!(cells > 150, "only {cells} cells checked");
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn round_trip_preserves_values() {
    let p = DeviceProfile::ble112();
    let again = DeviceProfile::from_json(&p.to_json()).unwrap();
    let (_, bad) = golden_diff(&again);
    assert!(bad.is_empty(), "{bad:#?}");
    assert_eq!(
        again.to_document(),
        DeviceProfile::from_json(&again.to_json()).unwrap().to_document()
    );
}

#[test]
fn load_from_file_and_report_errors() {
    let dir = std::env::temp_dir().join(format!("blemodel-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ble112.json");
    std::fs::write(&path, DeviceProfile::ble112().to_json()).unwrap();
    let p = DeviceProfile::load(&path).unwrap();
    assert_eq!(p.connected.post.duration.avg, 0.860 / 1e3);

    std::fs::write(&path, "{ not json").unwrap();
    assert!(matches!(
        DeviceProfile::load(&path),
        Err(blemodel::Error::Parse(_))
    ));
    assert!(matches!(
        DeviceProfile::load(dir.join("missing.json")),
        Err(blemodel::Error::Io { .. })
    ));
    std::fs::remove_dir_all(&dir).ok();
}
