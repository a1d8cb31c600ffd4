use rapm_demo::{commutator_text, h2_surface, model_summary};
use serde_json::Value;

#[test]
fn summary_reports_admissibility() {
    let v: Value = serde_json::from_str(&model_summary(0.3, 0.05, 0.02, 8.0, 1.0, 100.0, 0.01).unwrap()).unwrap();
    assert_eq!(v["admissibility"]["cr_product_ok"], true);
    assert!(v["optimal_lag"].as_f64().unwrap() > 0.0);
    let v: Value = serde_json::from_str(&model_summary(0.3, 0.05, 0.02, 8.0, 1.0, 100.0, 0.0).unwrap()).unwrap();
    assert!(v["optimal_lag"].is_null());
    assert!(model_summary(-0.3, 0.05, 0.02, 8.0, 1.0, 100.0, 0.01).is_err());
}

#[test]
fn table_text() {
    assert!(commutator_text(0.05, false).unwrap().contains("-r·U2"));
    assert!(commutator_text(0.0, true).unwrap().contains("e2"));
}

#[test]
fn surface_is_a_solution() {
    let v: Value = serde_json::from_str(&h2_surface(0.3, 0.05, 0.2, 0.3, 0, 200.0, 0.9, 12).unwrap()).unwrap();
    assert!(v["max_scaled_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["u"].as_array().unwrap().len(), 12);
    let v: Value = serde_json::from_str(&h2_surface(0.3, 0.0, 0.2, 0.3, 1, 200.0, 0.9, 8).unwrap()).unwrap();
    assert_eq!(v["family"], "h2_0");
    assert!(h2_surface(0.3, 0.05, 0.2, 0.3, 0, 200.0, 0.9, 2).is_err());
}
