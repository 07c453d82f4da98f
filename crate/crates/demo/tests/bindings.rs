use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ctxprob_demo::{explore_coefficients, qubit_context, sample_qubit};
use serde_json::Value;

fn parse(text: Result<String, String>) -> Value {
    serde_json::from_str(&text.expect("binding returned an error")).unwrap()
}

#[test]
fn coefficient_explorer_walks_through_the_classes() {
    let verdict = |l1| parse(explore_coefficients(0.5, 0.8, 0.2, l1))["theory_class"]["verdict"].clone();
    assert_eq!(verdict(0.0), "classical");
    assert_eq!(verdict(0.5), "trigonometric");
    assert_eq!(verdict(1.25), "hyperbolic");

    let v = parse(explore_coefficients(0.5, 0.8, 0.2, 1.25));
    assert!((v["statistics"]["outcome"][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!(v["amplitudes"].is_null());
    assert!(explore_coefficients(0.5, 0.8, 0.2, 2.0).unwrap_err().contains("infeasible"));
}

#[test]
fn qubit_context_e1() {
    let v = parse(qubit_context(PI / 6.0, FRAC_PI_2, FRAC_PI_4, 0.0));
    assert!((v["lambda"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["balance"]["is_double_stochastic"], true);
    assert_eq!(v["classical_outcome"], serde_json::json!([0.5, 0.5]));
    assert!(v["amplitudes"].is_object());
}

#[test]
fn sampled_qubit_brackets_truth() {
    let v = parse(sample_qubit(PI / 6.0, FRAC_PI_2, FRAC_PI_4, 0.0, 200_000, 300, 1));
    let est = &v["estimate"];
    for j in 0..2 {
        let truth = v["truth"][j].as_f64().unwrap();
        let half = est["ci_high"][j].as_f64().unwrap() - est["ci_low"][j].as_f64().unwrap();
        assert!((est["lambda_hat"][j].as_f64().unwrap() - truth).abs() < 2.0 * half);
    }
    assert_eq!(sample_qubit(0.4, 0.0, 0.0, 0.0, 100, 50, 1).unwrap_err().split(':').next(), Some("degenerate context on component 1"));
}
