use monolab_web::{dice_posterior_json, evaluate_position_json, landing_heatmap_json};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn heatmap_follows_a_fair_coin_die() {
    // One die {1, 2}: after t rolls from 0 the position is 0 + Binomial-ish
    // sum over t coin flips, wrapped onto 8 squares.
    let v = parse(landing_heatmap_json("tb8", 0, 3));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let mut expect = vec![[0.0f64; 8]; 3];
    for t in 1..=3usize {
        for mask in 0..(1u32 << t) {
            let total: usize = (0..t).map(|i| 1 + ((mask >> i) & 1) as usize).sum();
            expect[t - 1][total % 8] += 0.5f64.powi(t as i32);
        }
    }
    for (row, want) in rows.iter().zip(&expect) {
        for (a, b) in floats(row).iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let visits = floats(&v["visits"]);
    assert!((visits.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    assert_eq!(v["names"][1], "Red-A");
    assert_eq!(v["colors"][1], "red");
    assert!(v["colors"][0].is_null());
}

#[test]
fn heatmap_accepts_board_json() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/boards/standard.json")).unwrap();
    let v = parse(landing_heatmap_json(&text, 10, 2));
    assert_eq!(v["names"].as_array().unwrap().len(), 40);
    for row in v["rows"].as_array().unwrap() {
        assert!((floats(row).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert!(landing_heatmap_json("nope.json", 0, 1)
        .unwrap_err()
        .starts_with("board"));
}

#[test]
fn empty_board_is_worth_nothing() {
    let v = parse(evaluate_position_json(
        "tb8",
        r#"{"players": [{"position": 0, "cash": 300}, {"position": 4, "cash": 120}]}"#,
    ));
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for p in arr {
        for key in ["assets", "short_term", "long_term", "monopoly", "total"] {
            assert_eq!(p[key], 0.0, "{key}");
        }
    }
    assert_eq!(arr[1]["player"], 1);
}

#[test]
fn owning_a_set_is_worth_more_than_its_price() {
    let base = r#"{"players": [{"position": 0, "cash": 500}, {"position": 0, "cash": 500}]}"#;
    let set = r#"{"players": [{"position": 0, "cash": 500}, {"position": 0, "cash": 500}],
                  "holdings": [{"square": 1, "owner": 0}, {"square": 2, "owner": 0}]}"#;
    let a = parse(evaluate_position_json("tb8", base));
    let b = parse(evaluate_position_json("tb8", set));
    let gain = b[0]["total"].as_f64().unwrap() - a[0]["total"].as_f64().unwrap();
    assert!(gain > 200.0, "{gain}");
    assert_eq!(b[0]["assets"], 200.0);
    assert!(b[0]["short_term"].as_f64().unwrap() > 0.0);
    assert!(b[1]["short_term"].as_f64().unwrap() < 0.0);
}

#[test]
fn malformed_positions_are_rejected() {
    let one = r#"{"players": [{"position": 0, "cash": 1}]}"#;
    assert!(evaluate_position_json("tb8", one).is_err());
    let lone = r#"{"players": [{"position": 0, "cash": 1}, {"position": 0, "cash": 1}],
                   "holdings": [{"square": 1, "owner": 0, "level": 1}]}"#;
    assert!(evaluate_position_json("tb8", lone).unwrap_err().contains("colour set"));
    let go = r#"{"players": [{"position": 0, "cash": 1}, {"position": 0, "cash": 1}],
                 "holdings": [{"square": 0, "owner": 0}]}"#;
    assert!(evaluate_position_json("tb8", go).is_err());
    let off = r#"{"players": [{"position": 9, "cash": 1}, {"position": 0, "cash": 1}]}"#;
    assert!(evaluate_position_json("tb8", off).is_err());
}

#[test]
fn posterior_mode_counts_rolls() {
    let v = parse(dice_posterior_json("[1,2,3,4,5,6]", "[1,1,1,1,1,1]", "[1,1,2]"));
    assert_eq!(floats(&v["alpha"]), vec![4.0, 3.0, 2.0, 2.0, 2.0, 2.0]);
    let want = [3.0, 2.0, 1.0, 1.0, 1.0, 1.0].map(|c| c / 9.0);
    for (a, b) in floats(&v["map"]).iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    let kl: f64 = want.iter().map(|p| p * (p * 6.0).ln()).sum();
    assert!((v["kl"].as_f64().unwrap() - kl).abs() < 1e-12);
    assert_eq!(v["rolls"], 3);
}

#[test]
fn posterior_flags_unseen_faces() {
    let v = parse(dice_posterior_json("[1,2]", "[0.5,0.5]", "[1,3,3]"));
    assert_eq!(v["faces"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["unseen_faces"], serde_json::json!([3]));
    assert!(v["kl"].is_null());
    assert!(dice_posterior_json("[1,2]", "[0.5]", "[]").is_err());
}
