//! Geometric Brownian motion paths, the two risk-premium components and a
//! discrete delta-hedging Monte Carlo.
//!
//! Path `i` draws its normals from ChaCha8 seeded with `seed` on stream `i`,
//! so results do not depend on how paths are split across threads.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::model::ModelParams;
use crate::optimize::minimize_over_dt;
use crate::pde::Surface;

/// Name of the generator, echoed in reports.
pub const RNG_ALGORITHM: &str = "ChaCha8, one stream per path";

/// Relative slack when checking that one step divides another.
const STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    #[serde(rename = "S0")]
    pub s0: f64,
    /// Drift.
    pub rho: f64,
    pub sigma: f64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub n_paths: usize,
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.s0 > 0.0 && self.s0.is_finite(), "S0", self.s0, "must be positive")?;
        require(self.rho.is_finite(), "rho", self.rho, "must be finite")?;
        require(
            self.sigma >= 0.0 && self.sigma.is_finite(),
            "sigma",
            self.sigma,
            "must be non-negative",
        )?;
        require(self.dt > 0.0, "dt", self.dt, "must be positive")?;
        require(self.horizon >= self.dt, "horizon", self.horizon, "must be at least dt")?;
        require(self.n_paths >= 1, "n_paths", self.n_paths as f64, "must be at least 1")?;
        self.steps().map(|_| ())
    }

    /// Number of steps; `horizon` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        whole_multiple(self.horizon, self.dt, "horizon")
    }
}

fn whole_multiple(x: f64, step: f64, name: &'static str) -> Result<usize> {
    let n = (x / step).round();
    require(
        n >= 1.0 && (n * step - x).abs() <= STEP_SLACK * x,
        name,
        x,
        "must be a whole multiple of the path step",
    )?;
    Ok(n as usize)
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One path `S_0 .. S_n` with `S_t = S0·exp((ρ − σ²/2)t + σW_t)`.
pub fn gbm_path(c: &PathConfig, index: usize) -> Result<Vec<f64>> {
    let steps = c.steps()?;
    let mut rng = path_rng(c.seed, index);
    let drift = (c.rho - 0.5 * c.sigma * c.sigma) * c.dt;
    let vol = c.sigma * c.dt.sqrt();
    let mut log_s = c.s0.ln();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(c.s0);
    for k in 1..=steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        log_s += drift + vol * z;
        // σ = 0 must reproduce S0·e^{ρt} exactly, so skip the accumulated sum
        out.push(if c.sigma == 0.0 {
            c.s0 * (c.rho * k as f64 * c.dt).exp()
        } else {
            log_s.exp()
        });
    }
    Ok(out)
}

/// All paths, row `i` is path `i`.
pub fn gbm_paths(c: &PathConfig) -> Result<Vec<Vec<f64>>> {
    c.validate()?;
    map_paths(c.n_paths, |i| gbm_path(c, i))
}

#[cfg(feature = "parallel")]
fn map_paths<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(n: usize, f: F) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_paths<T, F: Fn(usize) -> Result<T>>(n: usize, f: F) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}

/// How the transaction-cost premium depends on the revision interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskTcVariant {
    /// Per unit time, `∝ dt^{-1/2}`; its balance with the variance premium
    /// gives the closed-form optimal lag.
    #[default]
    PerUnitTime,
    /// Without any `dt` factor.
    Printed,
}

/// Transaction-cost premium `C σ S |γ| / (√(2π) √dt)`.
pub fn risk_tc(p: &ModelParams, s: f64, gamma: f64, dt: f64) -> Result<f64> {
    risk_tc_variant(p, s, gamma, dt, RiskTcVariant::PerUnitTime)
}

pub fn risk_tc_variant(p: &ModelParams, s: f64, gamma: f64, dt: f64, variant: RiskTcVariant) -> Result<f64> {
    require(dt > 0.0, "dt", dt, "must be positive")?;
    let base = p.cost() * p.sigma() * s * gamma.abs() / (2.0 * PI).sqrt();
    Ok(match variant {
        RiskTcVariant::PerUnitTime => base / dt.sqrt(),
        RiskTcVariant::Printed => base,
    })
}

/// Variance premium `½ R σ⁴ S² γ² dt`.
pub fn risk_vp(p: &ModelParams, s: f64, gamma: f64, dt: f64) -> Result<f64> {
    require(dt > 0.0, "dt", dt, "must be positive")?;
    Ok(0.5 * p.risk_premium() * p.sigma2() * p.sigma2() * s * s * gamma * gamma * dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBreakdown {
    pub r_tc: f64,
    pub r_vp: f64,
    pub r_total: f64,
    pub dt: f64,
}

impl RiskBreakdown {
    pub fn at(p: &ModelParams, s: f64, gamma: f64, dt: f64) -> Result<Self> {
        let r_tc = risk_tc(p, s, gamma, dt)?;
        let r_vp = risk_vp(p, s, gamma, dt)?;
        Ok(RiskBreakdown {
            r_tc,
            r_vp,
            r_total: r_tc + r_vp,
            dt,
        })
    }
}

/// Revision interval minimising `risk_tc + risk_vp`, found numerically.
pub fn empirical_optimal_lag(p: &ModelParams, s: f64, gamma: f64) -> Result<f64> {
    require(s > 0.0, "S", s, "must be positive")?;
    require(gamma != 0.0, "gamma", gamma, "must be non-zero")?;
    require(p.cost() > 0.0, "C", p.cost(), "must be positive")?;
    // both terms are finite and positive on the bracket
    minimize_over_dt(|dt| {
        RiskBreakdown::at(p, s, gamma, dt)
            .map(|b| b.r_total)
            .unwrap_or(f64::INFINITY)
    })
}

/// Summary of a hedging run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeStats {
    pub n_paths: usize,
    pub rebalance_dt: f64,
    pub rebalances: usize,
    /// Terminal portfolio value minus `u(S_T, horizon)`.
    pub mean_error: f64,
    pub variance: f64,
    pub std_error: f64,
    pub mean_cost: f64,
    pub rng: String,
}

/// Per-path outcome of [`hedge_paths`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgeOutcome {
    pub s_terminal: f64,
    pub error: f64,
    pub cost: f64,
}

fn delta<U: Surface>(u: &U, s: f64, t: f64) -> Result<f64> {
    if let Some(j) = u.jet(s, t) {
        return Ok(j.u_s);
    }
    let h = 1e-4 * s;
    Ok((u.value(s + h, t)? - u.value(s - h, t)?) / (2.0 * h))
}

fn hedge_one<U: Surface>(p: &ModelParams, u: &U, c: &PathConfig, every: usize, index: usize) -> Result<HedgeOutcome> {
    let path = gbm_path(c, index)?;
    let support = u.support();
    let growth = (p.r() * c.dt).exp();
    let check = |s: f64, t: f64| {
        if support.contains(s, t) {
            Ok(())
        } else {
            Err(Error::OutsideSupport {
                z: s,
                lo: support.s_min,
                hi: support.s_max,
            })
        }
    };

    check(path[0], 0.0)?;
    let mut held = delta(u, path[0], 0.0)?;
    let mut cost = p.cost() * path[0] * held.abs();
    let mut cash = u.value(path[0], 0.0)? - held * path[0] - cost;
    let last = path.len() - 1;
    for (k, &s) in path.iter().enumerate().skip(1) {
        cash *= growth;
        let t = k as f64 * c.dt;
        if k % every == 0 && k < last {
            check(s, t)?;
            let next = delta(u, s, t)?;
            let fee = p.cost() * s * (next - held).abs();
            cash -= (next - held) * s + fee;
            cost += fee;
            held = next;
        }
    }
    let s_t = path[last];
    check(s_t, c.horizon)?;
    Ok(HedgeOutcome {
        s_terminal: s_t,
        error: held * s_t + cash - u.value(s_t, c.horizon)?,
        cost,
    })
}

/// Delta-hedge along every path, rebalancing every `rebalance_dt`. The
/// opening position is charged like any other trade; no trade happens at
/// the horizon.
pub fn hedge_paths<U: Surface + Sync>(
    p: &ModelParams,
    u: &U,
    c: &PathConfig,
    rebalance_dt: f64,
) -> Result<Vec<HedgeOutcome>> {
    c.validate()?;
    require(rebalance_dt > 0.0, "rebalance_dt", rebalance_dt, "must be positive")?;
    let every = whole_multiple(rebalance_dt, c.dt, "rebalance_dt")?;
    map_paths(c.n_paths, |i| hedge_one(p, u, c, every, i))
}

pub fn hedge_simulation<U: Surface + Sync>(
    p: &ModelParams,
    u: &U,
    c: &PathConfig,
    rebalance_dt: f64,
) -> Result<HedgeStats> {
    let outcomes = hedge_paths(p, u, c, rebalance_dt)?;
    let n = outcomes.len() as f64;
    let mean = outcomes.iter().map(|o| o.error).sum::<f64>() / n;
    let variance = if outcomes.len() > 1 {
        outcomes.iter().map(|o| (o.error - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let every = whole_multiple(rebalance_dt, c.dt, "rebalance_dt")?;
    Ok(HedgeStats {
        n_paths: outcomes.len(),
        rebalance_dt,
        rebalances: (c.steps()? - 1) / every,
        mean_error: mean,
        variance,
        std_error: (variance / n).sqrt(),
        mean_cost: outcomes.iter().map(|o| o.cost).sum::<f64>() / n,
        rng: RNG_ALGORITHM.into(),
    })
}

/// Hedge a call at fractions and multiples of the closed-form optimal lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LagExperiment {
    #[serde(rename = "S0")]
    pub s0: f64,
    pub strike: f64,
    /// Option maturity and simulation horizon.
    pub horizon: f64,
    pub rho: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Path steps per (grid-adjusted) optimal lag; must make every multiple
    /// a whole number of steps.
    pub substeps: usize,
    pub multiples: Vec<f64>,
}

impl Default for LagExperiment {
    fn default() -> Self {
        LagExperiment {
            s0: 100.0,
            strike: 100.0,
            horizon: 1.0,
            rho: 0.05,
            n_paths: 10_000,
            seed: 42,
            substeps: 16,
            multiples: vec![0.25, 1.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagRun {
    pub multiple: f64,
    pub stats: HedgeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagExperimentReport {
    /// `u_SS` of the call at `(S0, 0)`.
    pub gamma: f64,
    pub dt_opt: f64,
    /// `dt_opt` rounded so that the horizon holds a whole number of lags.
    pub dt_opt_grid: f64,
    pub path_dt: f64,
    pub runs: Vec<LagRun>,
    /// The run at multiple 1 has strictly the smallest variance.
    pub variance_smallest_at_optimum: bool,
}

/// Delta-hedge a Black–Scholes call with volatility `σ` along GBM paths,
/// rebalancing at each `multiple · dt_opt`.
pub fn lag_experiment(p: &ModelParams, e: &LagExperiment) -> Result<LagExperimentReport> {
    require(e.substeps >= 1, "substeps", e.substeps as f64, "must be at least 1")?;
    require(!e.multiples.is_empty(), "multiples", 0.0, "must not be empty")?;
    let call = crate::pde::BlackScholesCall {
        sigma: p.sigma(),
        r: p.r(),
        strike: e.strike,
        maturity: e.horizon,
    };
    let gamma = call
        .jet(e.s0, 0.0)
        .ok_or(Error::InvalidParameter {
            name: "horizon",
            value: e.horizon,
            reason: "must be positive",
        })?
        .u_ss;
    let dt_opt = p.optimal_time_lag(e.s0, gamma)?;
    let lags = (e.horizon / dt_opt).round().max(1.0);
    let dt_opt_grid = e.horizon / lags;
    let path_dt = dt_opt_grid / e.substeps as f64;
    let paths = PathConfig {
        s0: e.s0,
        rho: e.rho,
        sigma: p.sigma(),
        dt: path_dt,
        horizon: e.horizon,
        seed: e.seed,
        n_paths: e.n_paths,
    };
    let runs = e
        .multiples
        .iter()
        .map(|&multiple| {
            let stats = hedge_simulation(p, &call, &paths, multiple * dt_opt_grid)?;
            Ok(LagRun { multiple, stats })
        })
        .collect::<Result<Vec<_>>>()?;
    let at_opt = runs.iter().find(|r| r.multiple == 1.0).map(|r| r.stats.variance);
    let variance_smallest_at_optimum =
        at_opt.is_some_and(|v| runs.iter().filter(|r| r.multiple != 1.0).all(|r| v < r.stats.variance));
    Ok(LagExperimentReport {
        gamma,
        dt_opt,
        dt_opt_grid,
        path_dt,
        runs,
        variance_smallest_at_optimum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PathConfig {
        PathConfig {
            s0: 100.0,
            rho: 0.05,
            sigma: 0.3,
            dt: 0.01,
            horizon: 0.5,
            seed: 3,
            n_paths: 8,
        }
    }

    #[test]
    fn reproducible() {
        assert_eq!(gbm_paths(&cfg()).unwrap(), gbm_paths(&cfg()).unwrap());
        let other = PathConfig { seed: 4, ..cfg() };
        assert_ne!(gbm_paths(&cfg()).unwrap(), gbm_paths(&other).unwrap());
    }

    #[test]
    fn shape_and_validation() {
        let paths = gbm_paths(&cfg()).unwrap();
        assert_eq!(paths.len(), 8);
        assert!(paths.iter().all(|p| p.len() == 51 && p[0] == 100.0));
        assert!(gbm_paths(&PathConfig {
            horizon: 0.505,
            ..cfg()
        })
        .is_err());
        assert!(gbm_paths(&PathConfig { dt: 1.0, ..cfg() }).is_err());
    }

    #[test]
    fn premiums_scale_with_dt() {
        let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
        let a = risk_tc(&p, 100.0, 0.01, 0.01).unwrap();
        assert!((risk_tc(&p, 100.0, 0.01, 0.04).unwrap() - a / 2.0).abs() < 1e-15);
        assert_eq!(risk_tc(&p, 100.0, 0.0, 0.04).unwrap(), 0.0);
        let printed = risk_tc_variant(&p, 100.0, 0.01, 0.04, RiskTcVariant::Printed).unwrap();
        assert!((printed - a * 0.1).abs() < 1e-15);
        let b = risk_vp(&p, 100.0, 0.01, 0.01).unwrap();
        assert!((risk_vp(&p, 100.0, 0.01, 0.03).unwrap() - 3.0 * b).abs() < 1e-15);
    }
}
