use rauzy_web::{locate, render_gasket, step_trace};
use serde_json::Value;

#[test]
fn render_is_rgba_and_nonempty() {
    let img = render_gasket(20_000, 1, 128, 128);
    assert_eq!(img.len(), 128 * 128 * 4);
    assert!(img.chunks(4).any(|px| px[0] < 255));
    assert!(img.chunks(4).all(|px| px[3] == 255));
}

#[test]
fn trace_matches_a_single_step() {
    let v: Value = serde_json::from_str(&step_trace("3/5 1/4 3/20", 1, false)).unwrap();
    assert_eq!(v["records"][1]["winner"], 1);
    assert_eq!(v["records"][1]["lengths"], serde_json::json!(["1/3", "5/12", "1/4"]));
    let v: Value = serde_json::from_str(&step_trace("2/5, 7/20, 1/4", 5, true)).unwrap();
    assert_eq!(v["records"][1]["outcome"], "hole");
    let v: Value = serde_json::from_str(&step_trace("0.5 0.3 0.2", 5, true)).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn locate_follows_the_map() {
    let v: Value = serde_json::from_str(&locate(512, 512, 256, 300, 5)).unwrap();
    assert!(v["barycentric"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() > 0.0));
    assert!(v["orbit"].as_array().unwrap().len() <= 5);
    let v: Value = serde_json::from_str(&locate(512, 512, 0, 0, 5)).unwrap();
    assert_eq!(v["error"], "outside the simplex");
}
