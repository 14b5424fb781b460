use tdacm::config::{parse_scenario, scenario_json, ScenarioFile, SCHEMA_VERSION};
use tdacm::AppError;
use tdacm_core::sim;

fn stock() -> Vec<sim::Scenario> {
    let mut all = sim::scenario_test1().to_vec();
    all.push(sim::scenario_test2());
    all.extend(sim::scenario_test3());
    all
}

fn value(s: &sim::Scenario) -> serde_json::Value {
    serde_json::from_str(&scenario_json(s)).unwrap()
}

fn reparse(v: &serde_json::Value) -> Result<sim::Scenario, AppError> {
    parse_scenario(&serde_json::to_string_pretty(v).unwrap(), "edited.json")
}

#[test]
fn stock_scenarios_round_trip_exactly() {
    for s in stock() {
        let text = scenario_json(&s);
        let back = parse_scenario(&text, "stock.json").unwrap();
        assert_eq!(back, s, "{}", s.name);
        assert_eq!(scenario_json(&back), text);
    }
}

#[test]
fn file_is_versioned_and_keys_carry_units() {
    let v = value(&sim::scenario_test2());
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    for key in ["dt_s", "duration_s", "k_hat_n_per_m"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v["geometry"].get("length_m").is_some());
    assert_eq!(v["feature_program"]["kind"], "lemniscate");
    assert!(v["feature_program"].get("period_s").is_some());
}

#[test]
fn unknown_key_is_rejected_with_position() {
    let mut v = value(&sim::scenario_test2());
    v["surprise"] = serde_json::json!(1);
    match reparse(&v) {
        Err(AppError::Json {
            path,
            line,
            message,
            ..
        }) => {
            assert_eq!(path, "edited.json");
            assert!(line > 1);
            assert!(message.contains("surprise"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_json_reports_line_and_column() {
    let err = parse_scenario("{\n  \"schema_version\": 1,\n  oops\n}", "bad.json").unwrap_err();
    let text = err.to_string();
    assert!(text.starts_with("bad.json:3:"), "{text}");
}

#[test]
fn wrong_schema_version_is_rejected() {
    let mut v = value(&sim::scenario_test2());
    v["schema_version"] = serde_json::json!(SCHEMA_VERSION + 1);
    let err = reparse(&v).unwrap_err();
    assert!(
        matches!(err, AppError::Config(ref m) if m.contains("schema_version")),
        "{err}"
    );
}

#[test]
fn non_orthonormal_rotation_is_rejected() {
    let mut v = value(&sim::scenario_test2());
    v["sensor_mount"]["rotation"][0][0] = serde_json::json!(1.1);
    let err = reparse(&v).unwrap_err();
    assert!(err.to_string().contains("sensor_mount"), "{err}");
}

#[test]
fn unknown_controller_is_rejected() {
    let mut v = value(&sim::scenario_test2());
    v["controller"]["kind"] = serde_json::json!("lqr");
    let err = reparse(&v).unwrap_err();
    assert!(err.to_string().contains("lqr"), "{err}");
}

#[test]
fn invalid_values_fail_validation() {
    let mut v = value(&sim::scenario_test2());
    v["dt_s"] = serde_json::json!(-1.0);
    assert!(reparse(&v).is_err());
}

#[test]
fn dto_round_trips_through_serde() {
    let s = sim::scenario_test1()[1].clone();
    let file = ScenarioFile::from(&s);
    let back: ScenarioFile = serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_scenario().unwrap(), s);
}
