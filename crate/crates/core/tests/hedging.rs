use std::f64::consts::PI;

use proptest::prelude::*;
use rapm_core::hedging::*;
use rapm_core::optimize::golden_section;
use rapm_core::pde::BlackScholesCall;
use rapm_core::ModelParams;

fn desk() -> ModelParams {
    ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap()
}

fn paths(rho: f64, sigma: f64, n_paths: usize) -> PathConfig {
    PathConfig {
        s0: 100.0,
        rho,
        sigma,
        dt: 0.25,
        horizon: 1.0,
        seed: 2024,
        n_paths,
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn zero_volatility_is_deterministic_growth() {
    let c = paths(0.07, 0.0, 3);
    for path in gbm_paths(&c).unwrap() {
        for (k, s) in path.iter().enumerate() {
            assert_eq!(*s, 100.0 * (0.07 * k as f64 * 0.25).exp());
        }
    }
}

#[test]
fn log_price_is_centred_when_drift_offsets_convexity() {
    let c = paths(0.045, 0.3, 100_000);
    let logs: Vec<f64> = gbm_paths(&c).unwrap().iter().map(|p| p[4].ln()).collect();
    let (m, se) = mean_and_se(&logs);
    assert!((m - 100f64.ln()).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn terminal_mean_matches_expectation() {
    let c = paths(0.05, 0.3, 100_000);
    let terminal: Vec<f64> = gbm_paths(&c).unwrap().iter().map(|p| p[4]).collect();
    let (m, se) = mean_and_se(&terminal);
    assert!((m - 100.0 * 0.05f64.exp()).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn paths_do_not_depend_on_batching() {
    let c = paths(0.05, 0.3, 50);
    let all = gbm_paths(&c).unwrap();
    for i in [0, 17, 49] {
        assert_eq!(all[i], gbm_path(&c, i).unwrap());
    }
    let fewer = gbm_paths(&PathConfig { n_paths: 20, ..c }).unwrap();
    assert_eq!(fewer[..], all[..20]);
}

#[test]
fn premium_arithmetic() {
    let p = desk();
    let (s, g, dt) = (100.0, 0.01, 1.0f64 / 252.0);
    let tc = 0.02 * 0.3 * s * g / ((2.0 * PI).sqrt() * dt.sqrt());
    let vp = 0.5 * 8.0 * 0.3f64.powi(4) * s * s * g * g * dt;
    assert!((risk_tc(&p, s, g, dt).unwrap() - tc).abs() < 1e-15 * tc);
    assert!((risk_vp(&p, s, g, dt).unwrap() - vp).abs() < 1e-15 * vp);
    let b = RiskBreakdown::at(&p, s, g, dt).unwrap();
    assert_eq!(b.r_total, b.r_tc + b.r_vp);
    assert_eq!(risk_vp(&p, s, 0.0, dt).unwrap(), 0.0);
}

#[test]
fn numerical_lag_matches_closed_form() {
    let p = desk();
    let dt = empirical_optimal_lag(&p, 100.0, 0.01).unwrap();
    let closed = p.optimal_time_lag(100.0, 0.01).unwrap();
    assert!((dt / closed - 1.0).abs() < 1e-2);
    let stiffer = ModelParams::new(0.3, 0.05, 0.02, 16.0).unwrap();
    let ratio = empirical_optimal_lag(&stiffer, 100.0, 0.01).unwrap() / dt;
    assert!((ratio / 2f64.powf(-2.0 / 3.0) - 1.0).abs() < 1e-6);
    assert!(empirical_optimal_lag(&p, 100.0, 0.0).is_err());
}

#[test]
fn balance_of_power_laws() {
    let (x, _) = golden_section(
        |l: f64| {
            let dt = l.exp();
            dt.powf(-0.5) + dt
        },
        -20.0,
        0.0,
        1e-12,
    )
    .unwrap();
    assert!((x.exp() / 0.5f64.powf(2.0 / 3.0) - 1.0).abs() < 1e-6);
}

proptest! {
    #[test]
    fn total_premium_is_convex(c in 0.001f64..0.05, r in 1.0f64..20.0, g in 1e-3f64..0.1, lo in -8.0f64..-1.0) {
        let p = ModelParams::new(0.3, 0.05, c, r).unwrap();
        let f = |l: f64| RiskBreakdown::at(&p, 100.0, g, l.exp()).unwrap().r_total;
        let h = 0.05;
        for k in 0..40 {
            let x = lo + k as f64 * h;
            // convex in dt; in ln dt both terms are exponentials, also convex
            prop_assert!(f(x - h) + f(x + h) - 2.0 * f(x) > 0.0);
        }
    }
}

#[test]
fn costless_deterministic_hedge_replicates() {
    let p = ModelParams::new(0.3, 0.05, 0.0, 8.0).unwrap();
    let u = BlackScholesCall {
        sigma: 1e-4,
        r: 0.05,
        strike: 80.0,
        maturity: 1.0,
    };
    let c = PathConfig {
        s0: 100.0,
        rho: 0.05,
        sigma: 0.0,
        dt: 0.01,
        horizon: 1.0,
        seed: 1,
        n_paths: 4,
    };
    let stats = hedge_simulation(&p, &u, &c, 0.05).unwrap();
    assert_eq!(stats.mean_cost, 0.0);
    assert!(stats.mean_error.abs() < 1e-9, "{}", stats.mean_error);
    assert!(stats.variance < 1e-18);
}

#[test]
fn costs_are_charged_and_reported() {
    let p = desk();
    let u = BlackScholesCall {
        sigma: 0.3,
        r: 0.05,
        strike: 100.0,
        maturity: 1.0,
    };
    let c = PathConfig {
        s0: 100.0,
        rho: 0.05,
        sigma: 0.3,
        dt: 0.02,
        horizon: 1.0,
        seed: 9,
        n_paths: 400,
    };
    let frequent = hedge_simulation(&p, &u, &c, 0.02).unwrap();
    let rare = hedge_simulation(&p, &u, &c, 0.2).unwrap();
    assert!(frequent.mean_cost > rare.mean_cost);
    assert_eq!(frequent.rebalances, 49);
    assert_eq!(rare.rebalances, 4);
    assert!(hedge_simulation(&p, &u, &c, 0.03).is_err());
    assert_eq!(hedge_simulation(&p, &u, &c, 0.02).unwrap(), frequent);
}
