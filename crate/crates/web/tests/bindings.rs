use multipeak_web::{demand_json, evaluate_json, gap_curve_json};
use serde_json::Value;

const VALUATION: &str =
    r#"{"m":6,"a":"1/3","b":"1","support":null,"peaks":[[0,1,2],[3,4,5]]}"#;

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn full_peak_is_worth_one() {
    let out = parse(&evaluate_json(VALUATION, "0, 1, 2").unwrap());
    assert_eq!(out["value"], "1/1");
    assert_eq!(out["close_peak"], 0);
    assert_eq!(out["marginals"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_bundle_and_bad_items() {
    let out = parse(&evaluate_json(VALUATION, "").unwrap());
    assert_eq!(out["value"], "0/1");
    assert!(out["close_peak"].is_null());
    assert!(evaluate_json(VALUATION, "9").is_err());
    assert!(evaluate_json(VALUATION, "x").is_err());
    assert!(evaluate_json("{", "0").is_err());
}

#[test]
fn curve_starts_at_seventeen_eighteenths() {
    let out = parse(&gap_curve_json("2/3", "0", 60).unwrap());
    let points = out.as_array().unwrap();
    assert_eq!(points.len(), 59);
    assert_eq!(points[0]["exact_ratio"], "17/18");
    let last = &points[58];
    assert_eq!(last["k"], 60);
    assert!(last["structured"].is_null());
    assert!(points[3]["structured"].as_f64().unwrap() <= points[3]["no"].as_f64().unwrap() + 1e-9);
}

#[test]
fn curve_rejects_bad_parameters() {
    assert!(gap_curve_json("0", "0", 10).is_err());
    assert!(gap_curve_json("1/2", "-1", 10).is_err());
    assert!(gap_curve_json("1/2", "0", 1).is_err());
    assert!(gap_curve_json("1/2", "0", 1000).is_err());
}

#[test]
fn demand_stops_once_the_peak_saturates() {
    // Two items of a peak already have closeness 2 > b and value 1.
    let out = parse(&demand_json(VALUATION, "1/10,1/10,1/10,1,1,1").unwrap());
    assert_eq!(out["bundle"], serde_json::json!([0, 1]));
    assert_eq!(out["utility"], "4/5");
    assert!(demand_json(VALUATION, "1,2").is_err());
}
