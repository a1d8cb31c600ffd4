use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;
use serde::{Deserialize, Serialize};

use super::{Jet, Support, Surface};
use crate::error::Result;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn d1_d2(sigma: f64, r: f64, strike: f64, tau: f64, s: f64) -> (f64, f64) {
    let v = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (r + 0.5 * sigma * sigma) * tau) / v;
    (d1, d1 - v)
}

/// European call under the classical (μ = 0) equation. `tau ≤ 0` returns the payoff.
pub fn bs_call(sigma: f64, r: f64, strike: f64, tau: f64, s: f64) -> f64 {
    if tau <= 0.0 {
        return (s - strike).max(0.0);
    }
    let (d1, d2) = d1_d2(sigma, r, strike, tau, s);
    s * norm_cdf(d1) - strike * (-r * tau).exp() * norm_cdf(d2)
}

/// European put via put–call parity.
pub fn bs_put(sigma: f64, r: f64, strike: f64, tau: f64, s: f64) -> f64 {
    if tau <= 0.0 {
        return (strike - s).max(0.0);
    }
    bs_call(sigma, r, strike, tau, s) - s + strike * (-r * tau).exp()
}

/// Call price as a surface in `(S, t)` with analytic greeks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackScholesCall {
    pub sigma: f64,
    pub r: f64,
    pub strike: f64,
    pub maturity: f64,
}

impl Surface for BlackScholesCall {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        Ok(bs_call(self.sigma, self.r, self.strike, self.maturity - t, s))
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        let tau = self.maturity - t;
        if tau <= 0.0 {
            return None;
        }
        let (d1, d2) = d1_d2(self.sigma, self.r, self.strike, tau, s);
        let disc = self.strike * (-self.r * tau).exp();
        let pdf = norm_pdf(d1);
        Some(Jet {
            u: s * norm_cdf(d1) - disc * norm_cdf(d2),
            u_t: -s * pdf * self.sigma / (2.0 * tau.sqrt()) - self.r * disc * norm_cdf(d2),
            u_s: norm_cdf(d1),
            u_ss: pdf / (s * self.sigma * tau.sqrt()),
        })
    }

    fn support(&self) -> Support {
        Support {
            t_max: self.maturity,
            ..Support::everywhere()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::pde::rapm_operator;

    #[test]
    fn reference_values() {
        // 40-digit evaluations of the closed form
        assert!((bs_call(0.3, 0.05, 100.0, 1.0, 100.0) - 14.23125478598583).abs() < 1e-12);
        assert!((bs_call(0.25, 0.02, 100.0, 0.5, 80.0) - 0.8700284941022887).abs() < 1e-12);
        assert!((bs_put(0.25, 0.02, 100.0, 0.5, 80.0) - 19.875011869019094).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        let deep = bs_call(0.3, 0.05, 100.0, 1.0, 1e5);
        assert!((deep - (1e5 - 100.0 * (-0.05f64).exp())).abs() < 1e-8);
        assert!((bs_call(0.3, 0.05, 100.0, 1e-12, 120.0) - 20.0).abs() < 1e-9);
        assert!(bs_call(0.3, 0.05, 100.0, 1e-12, 80.0).abs() < 1e-12);
    }

    #[test]
    fn solves_linear_equation() {
        let p = ModelParams::new(0.3, 0.05, 0.0, 1.0).unwrap();
        let c = BlackScholesCall {
            sigma: 0.3,
            r: 0.05,
            strike: 100.0,
            maturity: 1.0,
        };
        for s in [20.0, 80.0, 100.0, 150.0, 300.0] {
            for t in [0.0, 0.5, 0.9] {
                let jet = c.jet(s, t).unwrap();
                assert!(rapm_operator(&p, &jet, s).abs() < 1e-10 * (1.0 + jet.u));
            }
        }
    }
}
