use std::f64::consts::PI;

use proptest::prelude::*;
use rapm_core::model::{derive_mu, parabolicity_margin};
use rapm_core::{Error, ModelParams};

#[test]
fn mu_from_cost_and_premium() {
    assert_eq!(derive_mu(0.0, 5.0).unwrap(), 0.0);
    assert!((derive_mu(1.0, 2.0 * PI / 27.0).unwrap() - 1.0).abs() < 1e-15);
    // log-space evaluation as an independent route
    let oracle = 3.0 * ((2.0 * 0.01f64.ln() + 10f64.ln() - (2.0 * PI).ln()) / 3.0).exp();
    assert!((derive_mu(0.01, 10.0).unwrap() / oracle - 1.0).abs() < 1e-14);
    assert!(derive_mu(0.01, 0.0).is_err());
}

#[test]
fn stored_mu_must_agree() {
    let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
    assert!(ModelParams::with_mu(0.3, 0.05, 0.02, 8.0, p.mu()).is_ok());
    assert!(ModelParams::with_mu(0.3, 0.05, 0.02, 8.0, p.mu() * (1.0 + 1e-9)).is_err());
    let q = ModelParams::from_mu(0.3, 0.05, 0.2, 8.0).unwrap();
    assert!((q.mu() / 0.2 - 1.0).abs() < 1e-14);
}

#[test]
fn json_round_trip_recomputes_mu() {
    let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    assert!(text.contains("\"C\"") && text.contains("\"R\""));
    let back: ModelParams = serde_json::from_str(r#"{"sigma": 0.3, "r": 0.05, "C": 0.02, "R": 8.0}"#).unwrap();
    assert_eq!(back, p);
    assert!(serde_json::from_str::<ModelParams>(r#"{"sigma": -1, "r": 0.05, "C": 0.02, "R": 8.0}"#).is_err());
}

#[test]
fn optimal_lag_closed_form() {
    let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
    let lag = p.optimal_time_lag(100.0, 0.01).unwrap();
    let by_hand = 0.02f64.powf(2.0 / 3.0) / (0.09 * (8.0 * (2.0 * PI).sqrt() * 1.0f64).powf(2.0 / 3.0));
    assert!((lag / by_hand - 1.0).abs() < 1e-14);
    let doubled = p.optimal_time_lag(100.0, -0.02).unwrap();
    assert!((doubled / lag - 2f64.powf(-2.0 / 3.0)).abs() < 1e-14);
    assert!(p.optimal_time_lag(100.0, 0.0).is_err());
    let free = ModelParams::new(0.3, 0.05, 0.0, 8.0).unwrap();
    assert!(free.optimal_time_lag(100.0, 0.01).is_err());
}

#[test]
fn switching_time_and_admissibility() {
    let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
    assert_eq!(p.switching_time(1.0).unwrap(), 1.0 - 0.02 / 0.72);
    let a = p.admissible(1.0).unwrap();
    assert!(a.c_over_r_ok && a.cr_product_ok && a.ok());
    assert_eq!(a.t_star, Some(1.0 - 0.02 / 0.72));

    let free = ModelParams::new(0.3, 0.05, 0.0, 8.0).unwrap();
    assert_eq!(free.switching_time(1.5).unwrap(), 1.5);

    // T equal to C/(Rσ²) leaves no positive switching time
    assert!(p.switching_time(0.02 / 0.72).is_err());
    let big = ModelParams::new(0.3, 0.05, 1.0, 1.0).unwrap();
    let a = big.admissible(1.0).unwrap();
    assert!(!a.cr_product_ok && !a.c_over_r_ok && a.t_star.is_none());
}

#[test]
fn admissibility_is_strict_at_the_boundary() {
    let p = ModelParams::new(10.0, 0.0, PI / 8.0, 1.0).unwrap();
    assert!(!p.admissible(1.0).unwrap().cr_product_ok);
}

#[test]
fn parabolicity_margin_cases() {
    assert!(parabolicity_margin(0.4, 100.0, -5.0).unwrap() > 0.0);
    assert_eq!(parabolicity_margin(1.0, 1.0, 0.421875).unwrap(), 0.0);
    assert!((parabolicity_margin(0.5, 100.0, 0.01).unwrap() - (1.5f64.powi(3) - 1.0)).abs() < 1e-14);
    assert!(matches!(
        parabolicity_margin(0.0, 1.0, 1.0),
        Err(Error::InvalidParameter { .. })
    ));
}

proptest! {
    #[test]
    fn mu_is_monotone(c in 1e-4f64..0.5, r in 0.1f64..50.0, k in 1.01f64..3.0) {
        let mu = derive_mu(c, r).unwrap();
        prop_assert!(derive_mu(c * k, r).unwrap() > mu);
        prop_assert!(derive_mu(c, r * k).unwrap() > mu);
    }

    #[test]
    fn admissible_implies_positive_switching_time(
        sigma in 0.05f64..1.0, c in 0.0f64..0.2, r in 0.5f64..20.0, t in 0.1f64..5.0,
    ) {
        let p = ModelParams::new(sigma, 0.05, c, r).unwrap();
        let a = p.admissible(t).unwrap();
        if a.ok() {
            prop_assert!(p.switching_time(t).unwrap() > 0.0);
        }
    }
}
