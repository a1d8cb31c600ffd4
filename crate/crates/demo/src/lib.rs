//! Browser bindings for a few rapm-core operations. Each export returns a
//! JSON string (or plain text for the table); the same functions are plain
//! Rust underneath so they can be tested off the browser.

use rapm_core::invariant::{FamilySpec, H2Spec};
use rapm_core::pde::residual_norm;
use rapm_core::symmetry::{e_table, u_table};
use rapm_core::{GridSpec, ModelParams, Surface};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Derived μ, admissibility and the optimal revision lag at `(s, gamma)`.
pub fn model_summary(
    sigma: f64,
    rate: f64,
    cost: f64,
    risk_premium: f64,
    maturity: f64,
    s: f64,
    gamma: f64,
) -> rapm_core::Result<String> {
    let p = ModelParams::new(sigma, rate, cost, risk_premium)?;
    let adm = p.admissible(maturity)?;
    let lag = p.optimal_time_lag(s, gamma).ok();
    Ok(json!({
        "mu": p.mu(),
        "c_times_r": cost * risk_premium,
        "c_over_r": cost / risk_premium,
        "sigma2_t": p.sigma2() * maturity,
        "admissibility": adm,
        "optimal_lag": lag,
    })
    .to_string())
}

pub fn commutator_text(rate: f64, e_basis: bool) -> rapm_core::Result<String> {
    let table = if e_basis { e_table(rate)? } else { u_table(rate)? };
    Ok(table.to_string())
}

/// An H2 surface on an `n × n` grid with its PDE residual.
#[allow(clippy::too_many_arguments)]
pub fn h2_surface(
    sigma: f64,
    rate: f64,
    mu: f64,
    phi: f64,
    branch: usize,
    s_max: f64,
    t_max: f64,
    n: usize,
) -> rapm_core::Result<String> {
    let p = ModelParams::from_mu(sigma, rate, mu, 8.0)?;
    let family = if rate == 0.0 {
        FamilySpec::H20(H2Spec {
            phi,
            branch,
            c1: 0.3,
            c2: 1.0,
        })
    } else {
        FamilySpec::H2(H2Spec {
            phi,
            branch,
            c1: 0.3,
            c2: 1.0,
        })
    };
    let sol = family.build(&p)?;
    let grid = GridSpec::new((1.0, s_max), (0.0, t_max), n, n);
    grid.validate()?;
    let rep = residual_norm(&sol, &p, &grid)?;
    let s = grid.s_nodes();
    let t = grid.t_nodes();
    let mut u = Vec::with_capacity(t.len());
    for &tj in &t {
        u.push(
            s.iter()
                .map(|&si| sol.value(si, tj))
                .collect::<rapm_core::Result<Vec<f64>>>()?,
        );
    }
    Ok(json!({
        "family": family.name(),
        "s": s,
        "t": t,
        "u": u,
        "max_scaled_residual": rep.max_scaled,
        "parabolicity_violations": rep.parabolicity_violations,
    })
    .to_string())
}

#[wasm_bindgen(js_name = modelSummary)]
pub fn model_summary_js(
    sigma: f64,
    rate: f64,
    cost: f64,
    risk_premium: f64,
    maturity: f64,
    s: f64,
    gamma: f64,
) -> Result<String, JsError> {
    model_summary(sigma, rate, cost, risk_premium, maturity, s, gamma).map_err(js)
}

#[wasm_bindgen(js_name = commutatorTable)]
pub fn commutator_table_js(rate: f64, e_basis: bool) -> Result<String, JsError> {
    commutator_text(rate, e_basis).map_err(js)
}

#[wasm_bindgen(js_name = h2Surface)]
#[allow(clippy::too_many_arguments)]
pub fn h2_surface_js(
    sigma: f64,
    rate: f64,
    mu: f64,
    phi: f64,
    branch: usize,
    s_max: f64,
    t_max: f64,
    n: usize,
) -> Result<String, JsError> {
    h2_surface(sigma, rate, mu, phi, branch, s_max, t_max, n).map_err(js)
}
