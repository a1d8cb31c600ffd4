//! Model constants, derived quantities and well-posedness checks.
//!
//! Units: time in years, rates and volatility annualised, `C` is the
//! round-trip cost per unit dollar of transaction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};

/// Relative tolerance when a caller supplies μ alongside `C` and `R`.
const MU_AGREEMENT: f64 = 1e-12;

/// `μ = 3 (C²R / 2π)^{1/3}`.
pub fn derive_mu(cost: f64, risk_premium: f64) -> Result<f64> {
    require(risk_premium > 0.0, "R", risk_premium, "must be positive")?;
    require(cost >= 0.0, "C", cost, "must be non-negative")?;
    Ok(3.0 * (cost * cost * risk_premium / (2.0 * PI)).cbrt())
}

/// Market and model constants. μ is computed once at construction so it can
/// never drift from `C` and `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    sigma: f64,
    r: f64,
    cost: f64,
    risk_premium: f64,
    mu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    sigma: f64,
    r: f64,
    #[serde(rename = "C")]
    cost: f64,
    #[serde(rename = "R")]
    risk_premium: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let p = ModelParams::new(raw.sigma, raw.r, raw.cost, raw.risk_premium)?;
        match raw.mu {
            Some(mu) => p.check_mu(mu).map(|_| p),
            None => Ok(p),
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            sigma: p.sigma,
            r: p.r,
            cost: p.cost,
            risk_premium: p.risk_premium,
            mu: None,
        }
    }
}

impl ModelParams {
    pub fn new(sigma: f64, r: f64, cost: f64, risk_premium: f64) -> Result<Self> {
        require(sigma > 0.0 && sigma.is_finite(), "sigma", sigma, "must be positive")?;
        require(r.is_finite(), "r", r, "must be finite")?;
        require(cost.is_finite(), "C", cost, "must be finite")?;
        let mu = derive_mu(cost, risk_premium)?;
        Ok(ModelParams {
            sigma,
            r,
            cost,
            risk_premium,
            mu,
        })
    }

    /// Construct with an externally computed μ, rejecting disagreement beyond
    /// 1e-12 relative.
    pub fn with_mu(sigma: f64, r: f64, cost: f64, risk_premium: f64, mu: f64) -> Result<Self> {
        let p = Self::new(sigma, r, cost, risk_premium)?;
        p.check_mu(mu)?;
        Ok(p)
    }

    /// Choose `C` so that μ takes the requested value for the given `R`.
    pub fn from_mu(sigma: f64, r: f64, mu: f64, risk_premium: f64) -> Result<Self> {
        require(mu >= 0.0 && mu.is_finite(), "mu", mu, "must be non-negative")?;
        require(risk_premium > 0.0, "R", risk_premium, "must be positive")?;
        let cost = ((mu / 3.0).powi(3) * 2.0 * PI / risk_premium).sqrt();
        Self::new(sigma, r, cost, risk_premium)
    }

    /// Same constants with a different interest rate.
    pub fn with_rate(&self, r: f64) -> Result<Self> {
        Self::new(self.sigma, r, self.cost, self.risk_premium)
    }

    fn check_mu(&self, mu: f64) -> Result<()> {
        let scale = self.mu.abs().max(f64::MIN_POSITIVE);
        if (mu - self.mu).abs() <= MU_AGREEMENT * scale || (mu == 0.0 && self.mu == 0.0) {
            Ok(())
        } else {
            Err(Error::MuMismatch {
                supplied: mu,
                computed: self.mu,
            })
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn cost(&self) -> f64 {
        self.cost
    }
    pub fn risk_premium(&self) -> f64 {
        self.risk_premium
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Revision interval minimising the total risk premium at gamma = u_SS.
    pub fn optimal_time_lag(&self, s: f64, gamma: f64) -> Result<f64> {
        require(s > 0.0, "S", s, "must be positive")?;
        if gamma == 0.0 {
            return Err(Error::UndefinedLag("gamma = 0, no re-hedging is needed"));
        }
        if self.cost <= 0.0 {
            return Err(Error::UndefinedLag("C = 0, continuous re-hedging is free"));
        }
        let denom = (self.risk_premium * (2.0 * PI).sqrt() * (s * gamma).abs()).powf(2.0 / 3.0);
        Ok(self.cost.powf(2.0 / 3.0) / (self.sigma2() * denom))
    }

    /// Last revision time `t* = T − C/(Rσ²)`. Only stated for European calls
    /// and puts.
    pub fn switching_time(&self, maturity: f64) -> Result<f64> {
        require(maturity > 0.0, "T", maturity, "must be positive")?;
        let t_star = maturity - self.cost / (self.risk_premium * self.sigma2());
        if t_star > 0.0 {
            Ok(t_star)
        } else {
            Err(Error::NoSwitchingTime { t_star })
        }
    }

    pub fn admissible(&self, maturity: f64) -> Result<Admissibility> {
        require(maturity > 0.0, "T", maturity, "must be positive")?;
        Ok(Admissibility {
            c_over_r_ok: self.cost / self.risk_premium < self.sigma2() * maturity,
            cr_product_ok: self.cost * self.risk_premium < PI / 8.0,
            t_star: self.switching_time(maturity).ok(),
        })
    }
}

/// Report of the two strict admissibility inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `C/R < σ²T`
    pub c_over_r_ok: bool,
    /// `C·R < π/8`
    pub cr_product_ok: bool,
    pub t_star: Option<f64>,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.c_over_r_ok && self.cr_product_ok
    }
}

/// `(3/(4μ))³ − S·gamma`; the equation is parabolic at `(S, gamma)` iff the
/// margin is strictly positive.
pub fn parabolicity_margin(mu: f64, s: f64, gamma: f64) -> Result<f64> {
    require(mu > 0.0, "mu", mu, "must be positive (μ = 0 is the linear equation)")?;
    require(s > 0.0, "S", s, "must be positive")?;
    Ok(parabolicity_bound(mu) - s * gamma)
}

/// `(3/(4μ))³`, the upper bound on `S·u_SS`. Infinite for μ = 0.
pub fn parabolicity_bound(mu: f64) -> f64 {
    if mu <= 0.0 {
        f64::INFINITY
    } else {
        (3.0 / (4.0 * mu)).powi(3)
    }
}
