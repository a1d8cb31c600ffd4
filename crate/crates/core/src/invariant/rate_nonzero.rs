//! Invariant solutions for `r ≠ 0`.

use serde::{Deserialize, Serialize};

use super::curve::ParametricCurve;
use super::engine::{
    build_parametric, cell_midpoints, curve_derivatives, curve_state, invert_theta, reduced_residual, sample_points,
    AffineRoot, DoubleIntegral, ParametricInput, ReducedEquation, RootIntegrand, Sampling,
};
use super::{check_phi, check_sign, tan_phi};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pde::{Jet, Surface};
use crate::quadrature::Tolerance;
use crate::quartic::RapmQuartic;

fn require_rate(p: &ModelParams) -> Result<()> {
    if p.r() == 0.0 {
        Err(Error::WrongRate("r ≠ 0; use the r = 0 families"))
    } else {
        Ok(())
    }
}

/// `u = (k³/r) S ln S − (k³ − τ) t S + c1 S + c2 e^{rt}` with
/// `k³(1 − μ r^{-1/3} k) + 2rτ/σ² = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Family {
    pub params: ModelParams,
    pub phi: f64,
    pub tau: f64,
    pub branch: usize,
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
}

impl H2Family {
    pub fn quartic(p: &ModelParams, tau: f64) -> RapmQuartic {
        RapmQuartic::new(p.mu() * (1.0 / p.r()).cbrt(), 2.0 * p.r() * tau / p.sigma2())
    }

    pub fn build(p: &ModelParams, phi: f64, branch: usize, c1: f64, c2: f64) -> Result<Self> {
        require_rate(p)?;
        let tau = tan_phi(phi)?;
        let k = Self::quartic(p, tau).root_on_branch(branch)?;
        Ok(H2Family {
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

impl Surface for H2Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.jet(s, t).expect("closed form").u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        let r = self.params.r();
        let k3 = self.k.powi(3);
        let gauge = self.c2 * (r * t).exp();
        let ln_s = s.ln();
        Some(Jet {
            u: k3 / r * s * ln_s - (k3 - self.tau) * t * s + self.c1 * s + gauge,
            u_t: -(k3 - self.tau) * s + r * gauge,
            u_s: k3 / r * (ln_s + 1.0) - (k3 - self.tau) * t + self.c1,
            u_ss: k3 / (r * s),
        })
    }
}

/// Time exponent used in the H3 similarity variable `z = S e^{−κt}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum H3Invariant {
    /// `κ = r + γ`, paired with the reduced equation as printed.
    #[default]
    Printed,
    /// `κ = r − γ`, the invariant of the generator itself.
    Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H3Spec {
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
    #[serde(default)]
    pub invariant: H3Invariant,
}

pub(crate) fn default_curve_samples() -> usize {
    200
}

/// `u = S w(z) + ζ S ln S`, `z = S e^{−κt}`, with `w(z)` parametric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H3Family {
    pub params: ModelParams,
    pub spec: H3Spec,
    pub gamma: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub root: AffineRoot,
    pub curve: ParametricCurve,
}

impl H3Family {
    /// `(γ, ζ) = ((1 + a cos φ)^{-1}, a sin φ / (r(1 + a cos φ) − 1))`.
    pub fn constants(p: &ModelParams, a: f64, phi: f64) -> Result<(f64, f64)> {
        check_phi(phi)?;
        let base = 1.0 + a * phi.cos();
        if base == 0.0 {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "1 + a·cos φ must be nonzero",
            });
        }
        let zeta_den = p.r() * base - 1.0;
        if zeta_den == 0.0 {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "r(1 + a·cos φ) must differ from 1",
            });
        }
        Ok((1.0 / base, a * phi.sin() / zeta_den))
    }

    pub fn build(p: &ModelParams, spec: &H3Spec) -> Result<Self> {
        require_rate(p)?;
        let (gamma, zeta) = Self::constants(p, spec.a, spec.phi)?;
        let kappa = match spec.invariant {
            H3Invariant::Printed => p.r() + gamma,
            H3Invariant::Generator => p.r() - gamma,
        };
        let eq = ReducedEquation {
            sigma2: p.sigma2(),
            mu: p.mu(),
            rho_zeta: p.r() * zeta,
            lambda: p.r() - kappa,
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
        Ok(H3Family {
            params: *p,
            spec: spec.clone(),
            gamma,
            zeta,
            kappa,
            root,
            curve,
        })
    }

    fn equation(&self) -> ReducedEquation {
        ReducedEquation {
            sigma2: self.params.sigma2(),
            mu: self.params.mu(),
            rho_zeta: self.params.r() * self.zeta,
            lambda: self.params.r() - self.kappa,
            zeta: self.zeta,
        }
    }

    /// Largest reduced-equation residual over the cell midpoints of the first
    /// monotone segment.
    pub fn ode_residual(&self) -> Result<f64> {
        max_reduced_residual(&self.equation(), &self.curve)
    }
}

pub(crate) fn max_reduced_residual(eq: &ReducedEquation, curve: &ParametricCurve) -> Result<f64> {
    let mut worst = 0.0f64;
    for (z, h) in cell_midpoints(curve, 0)? {
        worst = worst.max(reduced_residual(eq, curve, 0, z, h)?.abs());
    }
    Ok(worst)
}

impl Surface for H3Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        parametric_jet(&self.equation(), &self.root, &self.curve, self.kappa, s, t).map(|j| j.u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        parametric_jet(&self.equation(), &self.root, &self.curve, self.kappa, s, t).ok()
    }
}

/// Jet of `u = S w(z) + ζ S ln S`, `z = S e^{−κt}`, using `w' = θ/z` and
/// `S u_SS = k³`.
pub(crate) fn parametric_jet(
    eq: &ReducedEquation,
    root: &AffineRoot,
    curve: &ParametricCurve,
    kappa: f64,
    s: f64,
    t: f64,
) -> Result<Jet> {
    let z = s * (-kappa * t).exp();
    let st = curve_state(eq, root, curve, z, &Tolerance::default())?;
    let ln_s = s.ln();
    Ok(Jet {
        u: s * st.w + eq.zeta * s * ln_s,
        u_t: -kappa * s * st.theta,
        u_s: st.w + st.theta + eq.zeta * (ln_s + 1.0),
        u_ss: st.k.powi(3) / s,
    })
}

/// Which H4 formula is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum H4Form {
    /// `u = e^{rt} ∬ k(z)³/z + S(τt + c1) + e^{rt}(εt/cos φ + c2)`.
    #[default]
    Printed,
    /// `u = S w(z) + (τ/r + ε/(r z cos φ)) S ln S` with `z(zw)'' = k³ − τ/r + ε/(r z cos φ)`.
    Invariant,
    /// As `Invariant` but with the sign of the `ε/(r z cos φ)` term in the
    /// reduced equation as printed.
    InvariantPrintedSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H4Spec {
    pub phi: f64,
    pub eps: i8,
    #[serde(default)]
    pub branch: usize,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    pub z_range: (f64, f64),
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default)]
    pub form: H4Form,
}

pub(crate) fn default_panels() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H4Family {
    pub params: ModelParams,
    pub spec: H4Spec,
    pub tau: f64,
    pub cos_phi: f64,
    pub table: DoubleIntegral,
}

impl H4Family {
    pub fn build(p: &ModelParams, spec: &H4Spec) -> Result<Self> {
        require_rate(p)?;
        let tau = tan_phi(spec.phi)?;
        let eps = check_sign(spec.eps)?;
        let cos_phi = spec.phi.cos();
        let (z_lo, z_hi) = spec.z_range;
        if !(z_lo > 0.0 && z_hi > z_lo) {
            return Err(Error::Config(format!("H4 needs 0 < z_lo < z_hi, got [{z_lo}, {z_hi}]")));
        }
        let sigma2 = p.sigma2();
        let root = AffineRoot::select(
            p.mu(),
            2.0 * tau / sigma2,
            2.0 * eps / (sigma2 * cos_phi),
            spec.branch,
            1.0 / z_lo,
            (1.0 / z_hi, 1.0 / z_lo),
        )?;
        let e = eps / (p.r() * cos_phi);
        let (a0, a1) = match spec.form {
            H4Form::Printed => (0.0, 0.0),
            H4Form::Invariant => (-tau / p.r(), e),
            H4Form::InvariantPrintedSign => (-tau / p.r(), -e),
        };
        let table = DoubleIntegral::new(
            RootIntegrand { root, a0, a1 },
            spec.z_range,
            spec.panels,
            Tolerance::default(),
        )?;
        Ok(H4Family {
            params: *p,
            spec: spec.clone(),
            tau,
            cos_phi,
            table,
        })
    }
}

impl Surface for H4Family {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        self.jet_checked(s, t).map(|j| j.u)
    }

    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        self.jet_checked(s, t).ok()
    }
}

impl H4Family {
    fn jet_checked(&self, s: f64, t: f64) -> Result<Jet> {
        let r = self.params.r();
        let growth = (r * t).exp();
        let z = s / growth;
        let (f, df, ddf) = self.table.eval(z)?;
        let eps = self.spec.eps as f64;
        let (c1, c2) = (self.spec.c1, self.spec.c2);
        Ok(match self.spec.form {
            H4Form::Printed => {
                let lin = eps / self.cos_phi;
                Jet {
                    u: growth * f + s * (self.tau * t + c1) + growth * (lin * t + c2),
                    u_t: r * growth * f - r * s * df + self.tau * s + growth * (lin + r * (lin * t + c2)),
                    u_s: df + self.tau * t + c1,
                    u_ss: ddf / growth,
                }
            }
            H4Form::Invariant | H4Form::InvariantPrintedSign => {
                // u = e^{rt} Y(z) + (τ/r) S ln S + E e^{rt} ln S + c1 S + c2 e^{rt}
                let e = eps / (r * self.cos_phi);
                let ln_s = s.ln();
                Jet {
                    u: growth * f + self.tau / r * s * ln_s + e * growth * ln_s + c1 * s + c2 * growth,
                    u_t: r * growth * f - r * s * df + r * e * growth * ln_s + r * c2 * growth,
                    u_s: df + self.tau / r * (ln_s + 1.0) + e * growth / s + c1,
                    u_ss: ddf / growth + self.tau / (r * s) - e * growth / (s * s),
                }
            }
        })
    }
}

/// Which parametrisation of the special `e1 + αe2` family is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialVariant {
    /// `z_θ = G_θ / (θ − G_z)` integrated exactly:
    /// `L = 1 + (σ²/2)(1 − μθ^{1/3})`, `Γ = (1 + σ²/2)^{-1}`,
    /// `z = c1 L^{−(1+3Γ)} θ^{−σ²Γ/2}`, `g' = v z_θ / z²`.
    #[default]
    Corrected,
    /// The closed forms as printed: `L = 1 − (σ²/2)(1 − μθ^{1/3})`,
    /// `γ = (1 − σ²/2)^{-1}`, `z = c1 L^{1+3γ} θ^{−σ²γ/2}` and the printed `g(θ)`.
    Printed,
}

impl SpecialVariant {
    fn kappa(self) -> f64 {
        match self {
            SpecialVariant::Corrected => 1.0,
            SpecialVariant::Printed => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialSpec {
    #[serde(default)]
    pub alpha: f64,
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    pub theta_range: (f64, f64),
    #[serde(default = "default_special_samples")]
    pub samples: usize,
    #[serde(default = "default_special_sampling")]
    pub sampling: Sampling,
    #[serde(default)]
    pub variant: SpecialVariant,
}

fn default_special_samples() -> usize {
    2000
}

fn default_special_sampling() -> Sampling {
    Sampling::Log
}

/// Closed-form pieces of the special parametric solution at one θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialPoint {
    pub theta: f64,
    pub z: f64,
    pub v: f64,
    pub w: f64,
    pub dw_dz: f64,
}

/// `u = (w(z) + α e^t) e^{(r−1)t}`, `z = S e^{−(r−1)t}`, where `w` solves
/// `−w + z w' + (σ²/2) z² w'' (1 − μ (z w'')^{1/3}) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialFamily {
    pub params: ModelParams,
    pub spec: SpecialSpec,
    pub curve: ParametricCurve,
}

/// Maximum residuals of the first- and second-order forms along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialResiduals {
    /// `v_z − μ v_z^{4/3} + 2v/(σ² z)` with `v = z w' − w`
    pub first_order: f64,
    /// `−w + z w' + (σ²/2) z² w'' (1 − μ (z w'')^{1/3})`
    pub second_order: f64,
}

impl SpecialFamily {
    pub fn build(p: &ModelParams, spec: &SpecialSpec) -> Result<Self> {
        if p.r() == 0.0 {
            return Err(Error::WrongRate("r ∉ {0, 1} for the special family"));
        }
        if p.r() == 1.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                value: 1.0,
                reason: "r = 1 makes the invariants time-independent",
            });
        }
        let (lo, hi) = spec.theta_range;
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::LogDomain { theta: lo.min(hi) });
        }
        let thetas = sample_points(spec.theta_range, spec.samples, spec.sampling)?;
        let points = thetas
            .iter()
            .map(|&theta| special_point(p, spec.variant, spec.c1, spec.c2, theta))
            .collect::<Result<Vec<_>>>()?;
        let curve = ParametricCurve::new(
            thetas,
            points.iter().map(|q| q.z).collect(),
            points.iter().map(|q| q.w).collect(),
            points.iter().map(|q| q.dw_dz).collect(),
        )?;
        Ok(SpecialFamily {
            params: *p,
            spec: spec.clone(),
            curve,
        })
    }

    /// Residuals at the cell midpoints of the first monotone segment.
    pub fn ode_residuals(&self) -> Result<SpecialResiduals> {
        let (sigma2, mu) = (self.params.sigma2(), self.params.mu());
        let mut out = SpecialResiduals {
            first_order: 0.0,
            second_order: 0.0,
        };
        for (z, h) in cell_midpoints(&self.curve, 0)? {
            let w = self.curve.eval(0, z)?;
            let (w1, w2) = curve_derivatives(&self.curve, 0, z, h)?;
            let v = z * w1 - w;
            let vz = z * w2;
            let first = vz - mu * vz * vz.cbrt() + 2.0 * v / (sigma2 * z);
            let second = -w + z * w1 + 0.5 * sigma2 * z * z * w2 * (1.0 - mu * (z * w2).cbrt());
            out.first_order = out.first_order.max(first.abs());
            out.second_order = out.second_order.max(second.abs());
        }
        Ok(out)
    }
}

impl SpecialFamily {
    /// The exact curve point with `z(θ) = z` on the first segment.
    pub fn point_at(&self, z: f64) -> Result<SpecialPoint> {
        let i = self.curve.cell(0, z)?;
        let (variant, c1, c2) = (self.spec.variant, self.spec.c1, self.spec.c2);
        let theta = invert_theta(&self.curve, i, z, |theta| {
            let q = special_point(&self.params, variant, c1, c2, theta)?;
            Ok((q.z.ln() - z.ln(), special_dlnz(&self.params, variant, theta)))
        })?;
        special_point(&self.params, variant, c1, c2, theta)
    }

    fn jet_checked(&self, s: f64, t: f64) -> Result<Jet> {
        let rm1 = self.params.r() - 1.0;
        let shift = (rm1 * t).exp();
        let q = self.point_at(s / shift)?;
        let gauge = self.spec.alpha * t.exp();
        let u = (q.w + gauge) * shift;
        Ok(Jet {
            u,
            u_t: rm1 * u + gauge * shift - rm1 * s * q.dw_dz,
            u_s: q.dw_dz,
            // w'' = θ/z by construction of the parametrisation
            u_ss: q.theta / s,
        })
    }
}

impl Surface for SpecialFamily {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        let shift = ((self.params.r() - 1.0) * t).exp();
        let q = self.point_at(s / shift)?;
        Ok((q.w + self.spec.alpha * t.exp()) * shift)
    }

    /// Only the corrected parametrisation satisfies `z w'' = θ`, so the printed
    /// one is left to finite differences.
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        match self.spec.variant {
            SpecialVariant::Corrected => self.jet_checked(s, t).ok(),
            SpecialVariant::Printed => None,
        }
    }
}

/// `d ln z/dθ` of the special parametrisation.
fn special_dlnz(p: &ModelParams, variant: SpecialVariant, theta: f64) -> f64 {
    let half = 0.5 * p.sigma2();
    let kappa = variant.kappa();
    let big_a = 1.0 + kappa * half;
    let gamma = 1.0 / big_a;
    let s = theta.cbrt();
    let l = big_a - kappa * half * p.mu() * s;
    let dl = -kappa * half * p.mu() / (3.0 * s * s);
    -kappa * (1.0 + 3.0 * gamma) * dl / l - half * gamma / theta
}

/// `|1 ∓ σ²/2|` below which `γ` is treated as singular.
pub const GAMMA_SINGULAR_BAND: f64 = 1e-12;

/// Evaluate the special parametric solution at one θ.
pub fn special_point(p: &ModelParams, variant: SpecialVariant, c1: f64, c2: f64, theta: f64) -> Result<SpecialPoint> {
    if !(theta > 0.0) {
        return Err(Error::LogDomain { theta });
    }
    let (sigma2, mu) = (p.sigma2(), p.mu());
    let half = 0.5 * sigma2;
    let kappa = variant.kappa();
    let big_a = 1.0 + kappa * half;
    if big_a.abs() < GAMMA_SINGULAR_BAND {
        return Err(Error::GammaSingular);
    }
    let gamma = 1.0 / big_a;
    let s = theta.cbrt();
    let l = big_a - kappa * half * mu * s;
    if !(l > 0.0) {
        return Err(Error::LogDomain { theta });
    }
    let z = c1 * l.powf(-kappa * (1.0 + 3.0 * gamma)) * theta.powf(-half * gamma);
    let v = -half * z * (theta - mu * theta * s);
    let g = match variant {
        SpecialVariant::Corrected => g_corrected(sigma2, mu, s),
        SpecialVariant::Printed => g_printed(sigma2, mu, s, l)?,
    };
    let w = z * (c2 + g);
    Ok(SpecialPoint {
        theta,
        z,
        v,
        w,
        dw_dz: (v + w) / z,
    })
}

/// `∫_0^s (3σ⁴/4 t² − 7σ⁴μ/4 t³ + σ⁴μ² t⁴) / (A + B t) dt` with
/// `A = 1 + σ²/2`, `B = −σ²μ/2`.
fn g_corrected(sigma2: f64, mu: f64, s: f64) -> f64 {
    let s4 = sigma2 * sigma2;
    let a = 1.0 + 0.5 * sigma2;
    let b = -0.5 * sigma2 * mu / a;
    let j = moments(b, s);
    (0.75 * s4 * j[2] - 1.75 * s4 * mu * j[3] + s4 * mu * mu * j[4]) / a
}

/// `J_k = ∫_0^s t^k/(1 + bt) dt` for `k = 0..=4`.
fn moments(b: f64, s: f64) -> [f64; 5] {
    let mut j = [0.0; 5];
    if (b * s).abs() <= 0.5 {
        for (k, jk) in j.iter_mut().enumerate() {
            // Σ_n (−b)^n s^{k+n+1}/(k+n+1)
            let mut term = s.powi(k as i32 + 1);
            let mut n = 0;
            loop {
                let add = term / (k + n + 1) as f64;
                *jk += add;
                if add.abs() <= f64::EPSILON * jk.abs() || n > 200 {
                    break;
                }
                term *= -b * s;
                n += 1;
            }
        }
    } else {
        j[0] = (b * s).ln_1p() / b;
        for k in 1..5 {
            j[k] = s.powi(k as i32) / (k as f64 * b) - j[k - 1] / b;
        }
    }
    j
}

/// The printed expression for `g(θ)` in terms of `s = θ^{1/3}`.
fn g_printed(sigma2: f64, mu: f64, s: f64, l: f64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "the printed g(θ) divides by μ²",
        });
    }
    let half = 0.5 * sigma2;
    let poly = -4.0 + half * (5.0 + 2.0 * mu * s)
        - 0.25 * sigma2 * sigma2 * (1.0 + 0.5 * mu * s + 4.0 / 3.0 * mu * mu * s * s)
        - mu * mu * sigma2.powi(3) / 8.0 * s * s * (1.0 - mu * s);
    let log_coeff = (mu * half).powi(-3) * (4.0 - half) * (1.0 - half).powi(2);
    Ok(sigma2 / (2.0 * mu * mu) * s * poly + log_coeff * l.ln())
}
