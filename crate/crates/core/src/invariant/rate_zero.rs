//! Invariant solutions for `r = 0`.

use serde::{Deserialize, Serialize};

use super::curve::ParametricCurve;
use super::engine::{
    build_parametric, AffineRoot, DoubleIntegral, ParametricInput, ReducedEquation, RootIntegrand, Sampling,
};
use super::rate_nonzero::{default_curve_samples, default_panels, max_reduced_residual, parametric_jet, H3Invariant};
use super::{check_phi, check_sign, tan_phi};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pde::{Jet, Surface};
use crate::quadrature::Tolerance;
use crate::quartic::RapmQuartic;

fn require_zero_rate(p: &ModelParams) -> Result<()> {
    if p.r() != 0.0 {
        Err(Error::WrongRate("r = 0; use the r ≠ 0 families"))
    } else {
        Ok(())
    }
}

/// `u = k³ S (ln S − 1) + τ t S + c1 S + c2` with `k³(1 − μk) + 2τ/σ² = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H20Family {
    pub params: ModelParams,
    pub phi: f64,
    pub tau: f64,
    pub branch: usize,
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
}

impl H20Family {
    pub fn quartic(p: &ModelParams, tau: f64) -> RapmQuartic {
        RapmQuartic::new(p.mu(), 2.0 * tau / p.sigma2())
    }

    pub fn build(p: &ModelParams, phi: f64, branch: usize, c1: f64, c2: f64) -> Result<Self> {
        require_zero_rate(p)?;
        let tau = tan_phi(phi)?;
        let k = Self::quartic(p, tau).root_on_branch(branch)?;
        Ok(H20Family {
            params: *p,
            phi,
            tau,
            branch,
            k,
            c1,
            c2,
        })
    }
}

impl Surface for H20Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.jet(s, t).expect("closed form").u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        let k3 = self.k.powi(3);
        let ln_s = s.ln();
        Some(Jet {
            u: k3 * s * (ln_s - 1.0) + self.tau * t * s + self.c1 * s + self.c2,
            u_t: self.tau * s,
            u_s: k3 * ln_s + self.tau * t + self.c1,
            u_ss: k3 / s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H30Spec {
    pub a: f64,
    pub phi: f64,
    #[serde(default)]
    pub branch: usize,
    pub theta_range: (f64, f64),
    pub z0: f64,
    #[serde(default = "default_curve_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sampling: Sampling,
    /// `Printed` uses `ζ = a sin φ`, `Generator` the sign the generator gives.
    #[serde(default)]
    pub invariant: H3Invariant,
}

/// `u = S w(z) + ζ S ln S`, `z = S e^{δt}`, `δ = 1/(a cos φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H30Family {
    pub params: ModelParams,
    pub spec: H30Spec,
    pub delta: f64,
    pub zeta: f64,
    pub root: AffineRoot,
    pub curve: ParametricCurve,
}

impl H30Family {
    pub fn build(p: &ModelParams, spec: &H30Spec) -> Result<Self> {
        require_zero_rate(p)?;
        check_phi(spec.phi)?;
        let a_cos = spec.a * spec.phi.cos();
        if a_cos == 0.0 {
            return Err(Error::InvalidParameter {
                name: "a",
                value: spec.a,
                reason: "a·cos φ must be nonzero",
            });
        }
        let delta = 1.0 / a_cos;
        let zeta = match spec.invariant {
            H3Invariant::Printed => spec.a * spec.phi.sin(),
            H3Invariant::Generator => -spec.a * spec.phi.sin(),
        };
        let eq = ReducedEquation {
            sigma2: p.sigma2(),
            mu: p.mu(),
            rho_zeta: 0.0,
            lambda: delta,
            zeta,
        };
        let (curve, root) = build_parametric(&ParametricInput {
            eq,
            branch: spec.branch,
            theta_range: spec.theta_range,
            z0: spec.z0,
            samples: spec.samples,
            sampling: spec.sampling,
            tol: Tolerance::default(),
        })?;
        Ok(H30Family {
            params: *p,
            spec: spec.clone(),
            delta,
            zeta,
            root,
            curve,
        })
    }

    pub fn ode_residual(&self) -> Result<f64> {
        max_reduced_residual(&self.equation(), &self.curve)
    }
}

impl H30Family {
    fn equation(&self) -> ReducedEquation {
        ReducedEquation {
            sigma2: self.params.sigma2(),
            mu: self.params.mu(),
            rho_zeta: 0.0,
            lambda: self.delta,
            zeta: self.zeta,
        }
    }
}

impl Surface for H30Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        parametric_jet(&self.equation(), &self.root, &self.curve, -self.delta, s, t).map(|j| j.u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        parametric_jet(&self.equation(), &self.root, &self.curve, -self.delta, s, t).ok()
    }
}

/// Which H4 formula is evaluated at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum H40Form {
    /// `u = W(S) + τtS + εt/cos φ + c1 S + c2`.
    #[default]
    Invariant,
    /// As printed, with `ε/cos φ` in place of `εt/cos φ`.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H40Spec {
    pub phi: f64,
    pub eps: i8,
    #[serde(default)]
    pub branch: usize,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    pub s_range: (f64, f64),
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default)]
    pub form: H40Form,
}

/// `W'' = k(S)³/S` with `k³(1 − μk) + 2τ/σ² + 2ε/(σ² S cos φ) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H40Family {
    pub params: ModelParams,
    pub spec: H40Spec,
    pub tau: f64,
    pub cos_phi: f64,
    pub table: DoubleIntegral,
}

impl H40Family {
    pub fn build(p: &ModelParams, spec: &H40Spec) -> Result<Self> {
        require_zero_rate(p)?;
        let tau = tan_phi(spec.phi)?;
        let eps = check_sign(spec.eps)?;
        let cos_phi = spec.phi.cos();
        let (lo, hi) = spec.s_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!("H4 needs 0 < S_lo < S_hi, got [{lo}, {hi}]")));
        }
        let sigma2 = p.sigma2();
        let root = AffineRoot::select(
            p.mu(),
            2.0 * tau / sigma2,
            2.0 * eps / (sigma2 * cos_phi),
            spec.branch,
            1.0 / lo,
            (1.0 / hi, 1.0 / lo),
        )?;
        let table = DoubleIntegral::new(
            RootIntegrand { root, a0: 0.0, a1: 0.0 },
            spec.s_range,
            spec.panels,
            Tolerance::default(),
        )?;
        Ok(H40Family {
            params: *p,
            spec: spec.clone(),
            tau,
            cos_phi,
            table,
        })
    }

    fn jet_checked(&self, s: f64, t: f64) -> Result<Jet> {
        let (w, dw, ddw) = self.table.eval(s)?;
        let lin = self.spec.eps as f64 / self.cos_phi;
        let (gauge, gauge_t) = match self.spec.form {
            H40Form::Invariant => (lin * t, lin),
            H40Form::Printed => (lin, 0.0),
        };
        Ok(Jet {
            u: w + self.tau * t * s + gauge + self.spec.c1 * s + self.spec.c2,
            u_t: self.tau * s + gauge_t,
            u_s: dw + self.tau * t + self.spec.c1,
            u_ss: ddw,
        })
    }
}

impl Surface for H40Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        self.jet_checked(s, t).map(|j| j.u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        self.jet_checked(s, t).ok()
    }
}
