//! Group-invariant solutions of the pricing equation.
//!
//! Each family comes from one optimal subalgebra. Closed forms are evaluated
//! directly. The rest reduce to an ODE in a similarity variable `z`, which is
//! solved either as a parametric curve in `θ` or by a tabulated double
//! integral of a quartic root. Every family implements [`Surface`].

mod curve;
mod engine;
mod rate_nonzero;
mod rate_zero;

use serde::{Deserialize, Serialize};

pub use curve::ParametricCurve;
pub use engine::{AffineRoot, DoubleIntegral, RootIntegrand, Sampling, TRUNCATION_MARGIN};
pub use rate_nonzero::{
    special_point, H2Family, H3Family, H3Invariant, H3Spec, H4Family, H4Form, H4Spec, SpecialFamily, SpecialPoint,
    SpecialResiduals, SpecialSpec, SpecialVariant,
};
pub use rate_zero::{H20Family, H30Family, H30Spec, H40Family, H40Form, H40Spec};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pde::{GridSpec, Jet, Surface};

/// Half-width around `π/2` inside which `tan φ` is treated as singular.
pub const PHI_SINGULAR_BAND: f64 = 1e-12;

/// Fraction of the admissible `ln S` width trimmed from each side by
/// [`InvariantSolution::suggested_grid`].
const GRID_MARGIN: f64 = 0.02;

pub(crate) fn check_phi(phi: f64) -> Result<()> {
    if (0.0..=std::f64::consts::PI).contains(&phi) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "phi",
            value: phi,
            reason: "must lie in [0, π]",
        })
    }
}

/// `tan φ` for `φ ∈ [0, π]`, rejecting `φ` within 1e-12 of `π/2`.
pub fn tan_phi(phi: f64) -> Result<f64> {
    check_phi(phi)?;
    if (phi - std::f64::consts::FRAC_PI_2).abs() < PHI_SINGULAR_BAND {
        return Err(Error::PhiSingular);
    }
    Ok(phi.tan())
}

pub(crate) fn check_sign(eps: i8) -> Result<f64> {
    match eps {
        1 | -1 => Ok(eps as f64),
        _ => Err(Error::InvalidParameter {
            name: "eps",
            value: eps as f64,
            reason: "must be ±1",
        }),
    }
}

/// Parameters of the closed-form `h2` families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H2Spec {
    pub phi: f64,
    #[serde(default)]
    pub branch: usize,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
}

/// Serializable description of an invariant solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilySpec {
    #[serde(rename = "h2")]
    H2(H2Spec),
    #[serde(rename = "h3")]
    H3(H3Spec),
    #[serde(rename = "h4")]
    H4(H4Spec),
    #[serde(rename = "special")]
    Special(SpecialSpec),
    #[serde(rename = "h2_0")]
    H20(H2Spec),
    #[serde(rename = "h3_0")]
    H30(H30Spec),
    #[serde(rename = "h4_0")]
    H40(H40Spec),
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::H2(_) => "h2",
            FamilySpec::H3(_) => "h3",
            FamilySpec::H4(_) => "h4",
            FamilySpec::Special(_) => "special",
            FamilySpec::H20(_) => "h2_0",
            FamilySpec::H30(_) => "h3_0",
            FamilySpec::H40(_) => "h4_0",
        }
    }

    pub fn build(&self, p: &ModelParams) -> Result<InvariantSolution> {
        Ok(match self {
            FamilySpec::H2(s) => InvariantSolution::H2(H2Family::build(p, s.phi, s.branch, s.c1, s.c2)?),
            FamilySpec::H3(s) => InvariantSolution::H3(H3Family::build(p, s)?),
            FamilySpec::H4(s) => InvariantSolution::H4(H4Family::build(p, s)?),
            FamilySpec::Special(s) => InvariantSolution::Special(SpecialFamily::build(p, s)?),
            FamilySpec::H20(s) => InvariantSolution::H20(H20Family::build(p, s.phi, s.branch, s.c1, s.c2)?),
            FamilySpec::H30(s) => InvariantSolution::H30(H30Family::build(p, s)?),
            FamilySpec::H40(s) => InvariantSolution::H40(H40Family::build(p, s)?),
        })
    }
}

/// Region `z_lo ≤ S e^{−κt} ≤ z_hi` on which a reduced solution is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZWindow {
    pub z_lo: f64,
    pub z_hi: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "solution")]
pub enum InvariantSolution {
    H2(H2Family),
    H3(H3Family),
    H4(H4Family),
    Special(SpecialFamily),
    H20(H20Family),
    H30(H30Family),
    H40(H40Family),
}

impl InvariantSolution {
    fn as_surface(&self) -> &dyn Surface {
        match self {
            InvariantSolution::H2(f) => f,
            InvariantSolution::H3(f) => f,
            InvariantSolution::H4(f) => f,
            InvariantSolution::Special(f) => f,
            InvariantSolution::H20(f) => f,
            InvariantSolution::H30(f) => f,
            InvariantSolution::H40(f) => f,
        }
    }

    /// The parametric curve behind the solution, if it has one.
    pub fn curve(&self) -> Option<&ParametricCurve> {
        match self {
            InvariantSolution::H3(f) => Some(&f.curve),
            InvariantSolution::H30(f) => Some(&f.curve),
            InvariantSolution::Special(f) => Some(&f.curve),
            _ => None,
        }
    }

    /// `None` for the closed forms, which hold for every `S > 0`.
    pub fn z_window(&self) -> Result<Option<ZWindow>> {
        let window = |(z_lo, z_hi): (f64, f64), kappa: f64| Some(ZWindow { z_lo, z_hi, kappa });
        Ok(match self {
            InvariantSolution::H2(_) | InvariantSolution::H20(_) => None,
            InvariantSolution::H3(f) => window(f.curve.z_range(0)?, f.kappa),
            InvariantSolution::H30(f) => window(f.curve.z_range(0)?, -f.delta),
            InvariantSolution::Special(f) => window(f.curve.z_range(0)?, f.params.r() - 1.0),
            InvariantSolution::H4(f) => window(f.table.range(), f.params.r()),
            InvariantSolution::H40(f) => window(f.table.range(), 0.0),
        })
    }

    /// A grid inside `s_hint × t_range` on which the solution is defined at
    /// every node, trimmed by a small margin in `ln S`.
    pub fn suggested_grid(&self, s_hint: (f64, f64), t_range: (f64, f64), n_s: usize, n_t: usize) -> Result<GridSpec> {
        let (mut lo, mut hi) = s_hint;
        if let Some(w) = self.z_window()? {
            let (g0, g1) = ((w.kappa * t_range.0).exp(), (w.kappa * t_range.1).exp());
            let band_lo = w.z_lo * g0.max(g1);
            let band_hi = w.z_hi * g0.min(g1);
            if !(band_hi > band_lo) {
                return Err(Error::SupportTooSmall);
            }
            let trim = GRID_MARGIN * (band_hi / band_lo).ln();
            lo = lo.max(band_lo * trim.exp());
            hi = hi.min(band_hi * (-trim).exp());
        }
        if !(hi > lo && lo > 0.0) {
            return Err(Error::SupportTooSmall);
        }
        let grid = GridSpec::new((lo, hi), t_range, n_s, n_t);
        grid.validate()?;
        Ok(grid)
    }
}

impl Surface for InvariantSolution {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        self.as_surface().value(s, t)
    }
    fn jet(&self, s: f64, t: f64) -> Option<Jet> {
        self.as_surface().jet(s, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tan_phi_guards() {
        assert_eq!(tan_phi(0.0).unwrap(), 0.0);
        assert!(matches!(
            tan_phi(std::f64::consts::FRAC_PI_2 + 5e-13),
            Err(Error::PhiSingular)
        ));
        assert!(tan_phi(std::f64::consts::FRAC_PI_2 + 1e-9).is_ok());
        assert!(tan_phi(-0.1).is_err());
        assert!(tan_phi(3.2).is_err());
    }

    #[test]
    fn family_spec_json() {
        let spec: FamilySpec = serde_json::from_str(r#"{"family":"h2","phi":0.3,"branch":1}"#).unwrap();
        assert_eq!(
            spec,
            FamilySpec::H2(H2Spec {
                phi: 0.3,
                branch: 1,
                c1: 0.0,
                c2: 0.0
            })
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FamilySpec>(&json).unwrap(), spec);
        assert!(serde_json::from_str::<FamilySpec>(r#"{"family":"h2","phi":0.3,"bogus":1}"#).is_err());
        let h4: FamilySpec =
            serde_json::from_str(r#"{"family":"h4_0","phi":0.2,"eps":-1,"s_range":[50,150]}"#).unwrap();
        assert_eq!(h4.name(), "h4_0");
    }

    #[test]
    fn suggested_grid_stays_in_band() {
        let p = ModelParams::from_mu(0.3, 0.0, 0.2, 8.0).unwrap();
        let spec = FamilySpec::H40(H40Spec {
            phi: 0.2,
            eps: 1,
            branch: 0,
            c1: 0.0,
            c2: 0.0,
            s_range: (50.0, 150.0),
            panels: 8,
            form: H40Form::Invariant,
        });
        let sol = spec.build(&p).unwrap();
        let g = sol.suggested_grid((1.0, 1e6), (0.0, 1.0), 10, 5).unwrap();
        assert!(g.s_min > 50.0 && g.s_max < 150.0);
        assert!(sol.suggested_grid((200.0, 300.0), (0.0, 1.0), 10, 5).is_err());
    }
}
