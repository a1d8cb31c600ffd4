use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;
use crate::pde::{residual_norm, GridSpec, Jet, Restricted, Support, Surface};

/// One-parameter transformations of a price surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flow {
    /// `ũ(S, t) = e^λ u(e^{−λ}S, t)`
    U1,
    /// `ũ = u + λ e^{rt}`
    U2,
    /// `ũ(S, t) = u(S, t − λ)`
    U3,
    /// `ũ = u + λ S`
    U4,
    /// `ũ = u + λ S²`. Not a symmetry; kept as a negative control.
    SquareShift,
}

impl Flow {
    pub const SYMMETRIES: [Flow; 4] = [Flow::U1, Flow::U2, Flow::U3, Flow::U4];
}

/// `inner` transported along a flow.
#[derive(Debug, Clone)]
pub struct Flowed<U> {
    pub inner: U,
    pub flow: Flow,
    pub lam: f64,
    pub r: f64,
}

pub fn flow<U: Surface>(flow: Flow, lam: f64, r: f64, inner: U) -> Flowed<U> {
    Flowed { inner, flow, lam, r }
}

impl<U: Surface> Flowed<U> {
    /// Point at which the inner surface is sampled.
    fn source(&self, s: f64, t: f64) -> (f64, f64) {
        match self.flow {
            Flow::U1 => (s * (-self.lam).exp(), t),
            Flow::U3 => (s, t - self.lam),
            _ => (s, t),
        }
    }
}

impl<U: Surface> Surface for Flowed<U> {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        let (s0, t0) = self.source(s, t);
        let u = self.inner.value(s0, t0)?;
        let lam = self.lam;
        Ok(match self.flow {
            Flow::U1 => lam.exp() * u,
            Flow::U2 => u + lam * (self.r * t).exp(),
            Flow::U3 => u,
            Flow::U4 => u + lam * s,
            Flow::SquareShift => u + lam * s * s,
        })
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        let (s0, t0) = self.source(s, t);
        let j = self.inner.jet(s0, t0)?;
        let lam = self.lam;
        Some(match self.flow {
            Flow::U1 => {
                let k = lam.exp();
                Jet {
                    u: k * j.u,
                    u_t: k * j.u_t,
                    u_s: j.u_s,
                    u_ss: j.u_ss / k,
                }
            }
            Flow::U2 => {
                let g = lam * (self.r * t).exp();
                Jet {
                    u: j.u + g,
                    u_t: j.u_t + self.r * g,
                    ..j
                }
            }
            Flow::U3 => j,
            Flow::U4 => Jet {
                u: j.u + lam * s,
                u_s: j.u_s + lam,
                ..j
            },
            Flow::SquareShift => Jet {
                u: j.u + lam * s * s,
                u_s: j.u_s + 2.0 * lam * s,
                u_ss: j.u_ss + 2.0 * lam,
                ..j
            },
        })
    }

    fn support(&self) -> Support {
        let inner = self.inner.support();
        match self.flow {
            Flow::U1 => {
                let k = self.lam.exp();
                Support {
                    s_min: inner.s_min * k,
                    s_max: inner.s_max * k,
                    ..inner
                }
            }
            Flow::U3 => Support {
                t_min: inner.t_min + self.lam,
                t_max: inner.t_max + self.lam,
                ..inner
            },
            _ => inner,
        }
    }
}

/// Residual before and after a flow, on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub flow: Flow,
    pub lam: f64,
    pub base_max_abs: f64,
    pub flowed_max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Absolute slack allowed between the two maximum residuals.
pub const FLOW_TOLERANCE: f64 = 1e-9;

/// Compare the maximum residual of `surface` and of its image under `flow`.
/// Both are restricted to the grid rectangle, so a flow that moves the
/// support does not leave finite-difference stencils dangling. Passes when
/// the two maxima differ by at most [`FLOW_TOLERANCE`].
pub fn preserves_solutions<U: Surface>(
    which: Flow,
    lam: f64,
    surface: &U,
    p: &ModelParams,
    grid: &GridSpec,
) -> Result<FlowReport> {
    let base = residual_norm(&Restricted::to_grid(surface, grid), p, grid)?;
    let flowed = residual_norm(&Restricted::to_grid(flow(which, lam, p.r(), surface), grid), p, grid)?;
    Ok(FlowReport {
        flow: which,
        lam,
        base_max_abs: base.max_abs,
        flowed_max_abs: flowed.max_abs,
        tolerance: FLOW_TOLERANCE,
        pass: (flowed.max_abs - base.max_abs).abs() <= FLOW_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::JetSurface;

    fn linear() -> impl Surface {
        JetSurface(|s: f64, _t: f64| Jet {
            u: s,
            u_t: 0.0,
            u_s: 1.0,
            u_ss: 0.0,
        })
    }

    #[test]
    fn zero_parameter_is_identity() {
        let base = JetSurface(|s: f64, t: f64| Jet {
            u: s * s + t,
            u_t: 1.0,
            u_s: 2.0 * s,
            u_ss: 2.0,
        });
        for f in Flow::SYMMETRIES {
            let g = flow(f, 0.0, 0.05, &base);
            assert_eq!(g.value(3.0, 0.2).unwrap(), base.value(3.0, 0.2).unwrap());
            assert_eq!(g.jet(3.0, 0.2), base.jet(3.0, 0.2));
        }
    }

    #[test]
    fn scaling_fixes_linear_payoff() {
        let g = flow(Flow::U1, 2f64.ln(), 0.05, linear());
        for s in [1.0, 10.0, 123.0] {
            assert!((g.value(s, 0.0).unwrap() - s).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn support_moves_with_the_flow() {
        let inner = crate::pde::Restricted {
            inner: linear(),
            support: Support {
                s_min: 1.0,
                s_max: 2.0,
                t_min: 0.0,
                t_max: 1.0,
            },
        };
        let g = flow(Flow::U3, 0.5, 0.0, &inner);
        assert_eq!(g.support().t_min, 0.5);
        let g = flow(Flow::U1, 1.0, 0.0, &inner);
        assert!((g.support().s_max - 2.0 * std::f64::consts::E).abs() < 1e-12);
    }
}
