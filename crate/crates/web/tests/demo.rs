use drsub::Termination;
use drsub_web::{
    matroid_epochs, matroid_epochs_js, packing_trace, packing_trace_js, softmax_curve,
    softmax_curve_js,
};

#[test]
fn packing_trace_stays_feasible_and_climbs() {
    let t = packing_trace(1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.05, 0.0).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!(t.max_load <= 1.0 - 0.1 + 1e-9);
    assert!(t.points.len() >= 2);
    assert!(t.values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(t.value >= (1.0 - (-1.0f64 + 0.5).exp()) * t.guess);
    assert!((t.values.last().unwrap() - t.value).abs() < 1e-9);
}

#[test]
fn packing_trace_rejects_huge_guess() {
    let t = packing_trace(1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.05, 100.0).unwrap();
    assert_eq!(t.termination, Termination::GuessRejected);
}

#[test]
fn softmax_curve_is_sandwiched() {
    let c = softmax_curve(0.1, 4, 0.5, 101).unwrap();
    assert_eq!(c.t.len(), 101);
    for i in 0..101 {
        assert!(c.max[i] <= c.smax[i] + 1e-12 && c.smax[i] <= c.upper[i] + 1e-12);
    }
}

#[test]
fn matroid_epochs_rise_to_a_constant_fraction() {
    let r = matroid_epochs(8, 3, 5, 0.05, 0.0).unwrap();
    assert_eq!(r.termination, Termination::Converged);
    assert_eq!(r.epoch_values.len(), 20);
    assert!(r.epoch_values.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(r.solution.iter().sum::<f64>() <= 3.0 + 1e-9);
    let eps: f64 = 0.05;
    let reached = (1.0 - 10.0 * eps) * (1.0 - (1.0 - eps).powi(20)) * r.guess;
    assert!(r.value >= reached - 1e-9, "{} < {reached}", r.value);
    assert!(r.value <= r.best_set_value + 1e-9);
}

#[test]
fn bindings_return_json_or_error_objects() {
    let ok: serde_json::Value = serde_json::from_str(&softmax_curve_js(0.2, 3, 0.1, 5)).unwrap();
    assert_eq!(ok["t"].as_array().unwrap().len(), 5);
    let bad: serde_json::Value = serde_json::from_str(&softmax_curve_js(-1.0, 3, 0.1, 5)).unwrap();
    assert!(bad["error"].is_string());
    let bad: serde_json::Value =
        serde_json::from_str(&matroid_epochs_js(40, 3, 0, 0.05, 0.0)).unwrap();
    assert!(bad["error"].as_str().unwrap().contains("n ="));
    let ok: serde_json::Value =
        serde_json::from_str(&packing_trace_js(2.0, 1.0, 1.0, 0.5, 0.3, 1.0, 0.05, 0.0)).unwrap();
    assert!(ok["value"].as_f64().unwrap() > 0.0);
}
