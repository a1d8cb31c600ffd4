//! The RAPM operator, a residual evaluator for arbitrary price surfaces and an
//! independent finite-difference solver.

mod black_scholes;
mod fd;
mod residual;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub use black_scholes::{bs_call, bs_put, BlackScholesCall};
pub use fd::{convergence_order, fd_solve, FdOptions, FdSurface, Order, Scheme};
pub use residual::{residual_norm, ResidualPoint, ResidualReport};

/// `u_t + ½σ²S²u_SS(1 − μ·cbrt(S·u_SS)) − r u + r S u_S`.
pub fn rapm_operator(p: &ModelParams, jet: &Jet, s: f64) -> f64 {
    let diffusion = 0.5 * p.sigma2() * s * s * jet.u_ss * (1.0 - p.mu() * (s * jet.u_ss).cbrt());
    jet.u_t + diffusion - p.r() * jet.u + p.r() * s * jet.u_s
}

/// Value and the derivatives that enter the equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub u: f64,
    pub u_t: f64,
    pub u_s: f64,
    pub u_ss: f64,
}

/// Rectangle in `(S, t)` on which a surface may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Support {
    pub fn everywhere() -> Self {
        Support {
            s_min: 0.0,
            s_max: f64::INFINITY,
            t_min: f64::NEG_INFINITY,
            t_max: f64::INFINITY,
        }
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        s > self.s_min && s <= self.s_max && t >= self.t_min && t <= self.t_max
    }
}

/// A price surface `u(S, t)`.
pub trait Surface {
    fn value(&self, s: f64, t: f64) -> Result<f64>;

    /// Analytic derivatives, when the surface has them.
    fn jet(&self, _s: f64, _t: f64) -> Option<Jet> {
        None
    }

    fn support(&self) -> Support {
        Support::everywhere()
    }
}

impl<T: Surface + ?Sized> Surface for &T {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        (**self).value(s, t)
    }
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        (**self).jet(s, t)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
}

impl<T: Surface + ?Sized> Surface for Box<T> {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        (**self).value(s, t)
    }
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        (**self).jet(s, t)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
}

/// Surface defined by a closure, without analytic derivatives.
pub struct FnSurface<F>(pub F);

impl<F: Fn(f64, f64) -> f64> Surface for FnSurface<F> {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        Ok((self.0)(s, t))
    }
}

/// Surface defined by a closure returning the full jet.
pub struct JetSurface<F>(pub F);

impl<F: Fn(f64, f64) -> Jet> Surface for JetSurface<F> {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        Ok((self.0)(s, t).u)
    }
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        Some((self.0)(s, t))
    }
}

/// A surface whose support is narrowed to a rectangle, so finite-difference
/// stencils stay where the inner surface is defined.
pub struct Restricted<U> {
    pub inner: U,
    pub support: Support,
}

impl<U> Restricted<U> {
    /// Restrict to the rectangle spanned by a grid.
    pub fn to_grid(inner: U, grid: &GridSpec) -> Self {
        Restricted {
            inner,
            support: Support {
                // the lower S edge is exclusive in `Support::contains`
                s_min: grid.s_min * (1.0 - f64::EPSILON),
                s_max: grid.s_max,
                t_min: grid.t_min,
                t_max: grid.t_max,
            },
        }
    }
}

impl<U: Surface> Surface for Restricted<U> {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        self.inner.value(s, t)
    }
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        self.inner.jet(s, t)
    }
    fn support(&self) -> Support {
        let outer = self.inner.support();
        Support {
            s_min: self.support.s_min.max(outer.s_min),
            s_max: self.support.s_max.min(outer.s_max),
            t_min: self.support.t_min.max(outer.t_min),
            t_max: self.support.t_max.min(outer.t_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Uniform,
    LogS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_s: usize,
    pub n_t: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(s: (f64, f64), t: (f64, f64), n_s: usize, n_t: usize) -> Self {
        GridSpec {
            s_min: s.0,
            s_max: s.1,
            t_min: t.0,
            t_max: t.1,
            n_s,
            n_t,
            spacing: Spacing::Uniform,
        }
    }

    pub fn log_s(mut self) -> Self {
        self.spacing = Spacing::LogS;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min) {
            return Err(Error::Config(format!(
                "grid needs 0 < S_min < S_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.t_max < self.t_min {
            return Err(Error::Config("grid needs t_min ≤ t_max".into()));
        }
        if self.n_s < 3 || self.n_t < 3 {
            return Err(Error::Config("grid needs at least 3 points per axis".into()));
        }
        Ok(())
    }

    /// Nodes in S; the end points are reproduced exactly.
    pub fn s_nodes(&self) -> Vec<f64> {
        let n = self.n_s - 1;
        let mut nodes: Vec<f64> = match self.spacing {
            Spacing::Uniform => (0..=n)
                .map(|i| self.s_min + (self.s_max - self.s_min) * i as f64 / n as f64)
                .collect(),
            Spacing::LogS => {
                let (a, b) = (self.s_min.ln(), self.s_max.ln());
                (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
            }
        };
        nodes[0] = self.s_min;
        nodes[n] = self.s_max;
        nodes
    }
    pub fn t_nodes(&self) -> Vec<f64> {
        let n = self.n_t - 1;
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / n as f64)
            .collect();
        nodes[n] = self.t_max;
        nodes
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `S,t,u` grid as CSV.
pub fn surface_csv<U: Surface>(surface: &U, grid: &GridSpec) -> Result<String> {
    grid.validate()?;
    let mut out = String::from("S,t,u\n");
    for &t in &grid.t_nodes() {
        for &s in &grid.s_nodes() {
            let u = surface.value(s, t)?;
            out.push_str(&format!("{},{},{}\n", fmt17(s), fmt17(t), fmt17(u)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> ModelParams {
        ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap()
    }

    #[test]
    fn linear_solutions_vanish() {
        let p = desk();
        let u_is_s = Jet {
            u: 42.0,
            u_t: 0.0,
            u_s: 1.0,
            u_ss: 0.0,
        };
        assert_eq!(rapm_operator(&p, &u_is_s, 42.0), 0.0);
        let t = 0.7;
        let e = (p.r() * t).exp();
        let gauge = Jet {
            u: e,
            u_t: p.r() * e,
            u_s: 0.0,
            u_ss: 0.0,
        };
        assert!(rapm_operator(&p, &gauge, 10.0).abs() < 1e-16);
    }

    #[test]
    fn cube_root_is_odd() {
        for x in [1e-9f64, 0.3, 2.0, 1e5] {
            assert_eq!((-x).cbrt(), -x.cbrt());
        }
    }

    #[test]
    fn operator_invariances() {
        use proptest::prelude::*;
        let p = desk();
        proptest!(|(u in -50.0..50.0f64, ut in -5.0..5.0f64, us in -3.0..3.0f64,
                    uss in -0.5..0.5f64, s in 1.0..200.0f64, t in 0.0..2.0f64, lam in -5.0..5.0f64)| {
            let jet = Jet { u, u_t: ut, u_s: us, u_ss: uss };
            let base = rapm_operator(&p, &jet, s);
            let e = (p.r() * t).exp();
            let gauged = Jet { u: u + lam * e, u_t: ut + lam * p.r() * e, ..jet };
            prop_assert!((rapm_operator(&p, &gauged, s) - base).abs() <= 1e-12 * (1.0 + base.abs() + (lam * e * p.r()).abs() + u.abs()));
            let shifted = Jet { u: u + lam * s, u_s: us + lam, ..jet };
            prop_assert!((rapm_operator(&p, &shifted, s) - base).abs() <= 1e-12 * (1.0 + base.abs() + (p.r() * lam * s).abs() + (p.r() * u).abs()));
        });
    }

    #[test]
    fn grid_nodes() {
        let g = GridSpec::new((10.0, 200.0), (0.0, 0.9), 50, 50);
        let s = g.s_nodes();
        assert_eq!(s.len(), 50);
        assert_eq!(s[0], 10.0);
        assert!((s[49] - 200.0).abs() < 1e-12);
        let l = g.log_s().s_nodes();
        assert!((l[49] - 200.0).abs() < 1e-10);
        assert!((l[1] / l[0] - l[2] / l[1]).abs() < 1e-12);
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), 5, 5).validate().is_err());
        assert!(GridSpec::new((1.0, 2.0), (0.0, 1.0), 2, 5).validate().is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
