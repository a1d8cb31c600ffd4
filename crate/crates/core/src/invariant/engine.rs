//! Numerical engines shared by the invariant families.
//!
//! * [`build_parametric`]: curves `z(θ), w(θ)` of the reduced equations
//!   `(σ²/2) X (1 − μ X^{1/3}) + ρζ + λθ = 0` with `X = z(zw)'' + ζ` and
//!   `θ = z w'`, where `X = k(θ)³` is a root of a quartic that is affine in θ.
//! * [`DoubleIntegral`]: `F'' = q(z)` with `q` built from a tracked quartic
//!   root, tabulated on panels so every evaluation costs one panel quadrature.

use serde::{Deserialize, Serialize};

use super::curve::ParametricCurve;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::quartic::{track_root, BranchSide, RapmQuartic, TrackOptions};

/// Distance kept from a located singularity of `k³ − θ − ζ`.
pub const TRUNCATION_MARGIN: f64 = 1e-6;

/// Spacing of θ samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    Linear,
    /// Geometric spacing; needs a range of one sign.
    Log,
}

pub(crate) fn sample_points(range: (f64, f64), n: usize, sampling: Sampling) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Config("need at least 2 samples".into()));
    }
    let (a, b) = range;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(Error::Config(format!("degenerate parameter range [{a}, {b}]")));
    }
    let m = (n - 1) as f64;
    match sampling {
        Sampling::Linear => {
            let mut pts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / m).collect();
            pts[n - 1] = b;
            Ok(pts)
        }
        Sampling::Log => {
            if a * b <= 0.0 {
                return Err(Error::Config("log sampling needs a range of one sign".into()));
            }
            let (la, lb) = (a.abs().ln(), b.abs().ln());
            let mut pts: Vec<f64> = (0..n)
                .map(|i| a.signum() * (la + (lb - la) * i as f64 / m).exp())
                .collect();
            // pin the endpoints so the range is reproduced exactly
            pts[0] = a;
            pts[n - 1] = b;
            Ok(pts)
        }
    }
}

/// Root `k` on a fixed side of the fold, for a quartic `p³(1 − μp) + d0 + d1·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineRoot {
    pub mu_eff: f64,
    pub d0: f64,
    pub d1: f64,
    pub side: BranchSide,
}

impl AffineRoot {
    pub fn quartic(&self, x: f64) -> RapmQuartic {
        RapmQuartic::new(self.mu_eff, self.d0 + self.d1 * x)
    }

    pub fn at(&self, x: f64) -> Option<f64> {
        self.quartic(x).root_on_side(self.side)
    }

    /// Choose the side of the `branch`-th root at `x0` and verify the branch
    /// continues over `range` without reaching the fold.
    pub fn select(mu_eff: f64, d0: f64, d1: f64, branch: usize, x0: f64, range: (f64, f64)) -> Result<Self> {
        let q0 = RapmQuartic::new(mu_eff, d0 + d1 * x0);
        let k0 = q0.root_on_branch(branch)?;
        let root = AffineRoot {
            mu_eff,
            d0,
            d1,
            side: q0.side_of(k0),
        };
        if root.at(x0).is_none() {
            return Err(Error::BranchTerminated {
                at: x0,
                reason: "the selected root is a double root at the fold",
            });
        }
        for (from, to) in [(x0, range.0), (x0, range.1)] {
            if from != to {
                track_root(|x| root.quartic(x), (from, to), k0, &TrackOptions::default())?;
            }
        }
        Ok(root)
    }
}

/// Coefficients of the reduced equation handled by [`build_parametric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ReducedEquation {
    pub sigma2: f64,
    pub mu: f64,
    /// constant term `ρζ` (ρ = r)
    pub rho_zeta: f64,
    /// coefficient of θ
    pub lambda: f64,
    pub zeta: f64,
}

impl ReducedEquation {
    /// `k(θ)` as a root of `p³(1 − μp) + (2/σ²)(ρζ + λθ) = 0`.
    fn root_family(&self) -> (f64, f64) {
        (2.0 * self.rho_zeta / self.sigma2, 2.0 * self.lambda / self.sigma2)
    }
}

pub(crate) struct ParametricInput {
    pub eq: ReducedEquation,
    pub branch: usize,
    pub theta_range: (f64, f64),
    /// `z(θ0) = z0`, `w(θ0) = 0` with `θ0 = theta_range.0`.
    pub z0: f64,
    pub samples: usize,
    pub sampling: Sampling,
    pub tol: Tolerance,
}

/// Integrate `d ln z/dθ = 1/D`, `dw/dθ = θ/D` with `D = k(θ)³ − θ − ζ`.
///
/// Stops a margin short of the first zero of `D` and records where.
pub(crate) fn build_parametric(input: &ParametricInput) -> Result<(ParametricCurve, AffineRoot)> {
    let eq = input.eq;
    let (theta0, mut theta1) = input.theta_range;
    if !(input.z0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "z0",
            value: input.z0,
            reason: "anchor z must be positive",
        });
    }
    let (d0, d1) = eq.root_family();
    let root = AffineRoot::select(eq.mu, d0, d1, input.branch, theta0, (theta0, theta1))?;
    let denom = |theta: f64| -> f64 {
        match root.at(theta) {
            Some(k) => k * k * k - theta - eq.zeta,
            None => f64::NAN,
        }
    };

    let d_start = denom(theta0);
    if d_start == 0.0 || !d_start.is_finite() {
        return Err(Error::DenominatorSingularity { theta: theta0 });
    }
    // locate the first sign change of D on a fine scan, then bisect
    let mut truncated = None;
    let scan = sample_points((theta0, theta1), 4 * input.samples.max(2), Sampling::Linear)?;
    for pair in scan.windows(2) {
        if (denom(pair[1]) > 0.0) != (d_start > 0.0) {
            let (mut good, mut bad) = (pair[0], pair[1]);
            for _ in 0..200 {
                let mid = 0.5 * (good + bad);
                if mid == good || mid == bad {
                    break;
                }
                if (denom(mid) > 0.0) == (d_start > 0.0) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            let singular = 0.5 * (good + bad);
            let end = singular - TRUNCATION_MARGIN * (theta1 - theta0).signum();
            if (end - theta0) * (theta1 - theta0) <= 0.0 {
                return Err(Error::DenominatorSingularity { theta: singular });
            }
            truncated = Some(end);
            theta1 = end;
            break;
        }
    }

    let thetas = sample_points((theta0, theta1), input.samples, input.sampling)?;
    let mut z = Vec::with_capacity(thetas.len());
    let mut w = Vec::with_capacity(thetas.len());
    let (mut ln_z, mut w_acc) = (input.z0.ln(), 0.0);
    z.push(input.z0);
    w.push(0.0);
    for pair in thetas.windows(2) {
        ln_z += integrate(|t| 1.0 / denom(t), pair[0], pair[1], &input.tol)?.value;
        w_acc += integrate(|t| t / denom(t), pair[0], pair[1], &input.tol)?.value;
        z.push(ln_z.exp());
        w.push(w_acc);
    }
    let slope = thetas.iter().zip(&z).map(|(t, z)| t / z).collect();
    let curve = ParametricCurve::new(thetas, z, w, slope)?.with_truncation(truncated);
    Ok((curve, root))
}

/// θ inside cell `i` of `curve` with `ln z(θ) = ln z`, by Newton's method
/// safeguarded with bisection. `f(θ)` returns `(ln z(θ) − ln z, d ln z/dθ)`.
pub(crate) fn invert_theta<F>(curve: &ParametricCurve, i: usize, z: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (th, zs) = (curve.theta(), curve.z());
    let (mut a, mut b) = (th[i], th[i + 1]);
    let (fa, fb) = (zs[i].ln() - z.ln(), zs[i + 1].ln() - z.ln());
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let positive_at_a = fa > 0.0;
    let mut x = a + (b - a) * fa / (fa - fb);
    for _ in 0..100 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == positive_at_a {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if newton > a.min(b) && newton < a.max(b) {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Exact state of a [`build_parametric`] curve at a given `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CurveState {
    pub theta: f64,
    pub k: f64,
    pub w: f64,
}

/// Recover `(θ, k, w)` at `z` on the first segment by integrating from the
/// nearest stored sample, so accuracy is that of the quadrature rather than
/// of the interpolant.
pub(crate) fn curve_state(
    eq: &ReducedEquation,
    root: &AffineRoot,
    curve: &ParametricCurve,
    z: f64,
    tol: &Tolerance,
) -> Result<CurveState> {
    let i = curve.cell(0, z)?;
    let theta_i = curve.theta()[i];
    let ln_zi = curve.z()[i].ln();
    let root_at = |theta: f64| -> Result<f64> {
        root.at(theta).ok_or(Error::BranchTerminated {
            at: theta,
            reason: "root left its side of the fold",
        })
    };
    let denom = |theta: f64| -> f64 {
        match root.at(theta) {
            Some(k) => k * k * k - theta - eq.zeta,
            None => f64::NAN,
        }
    };
    let theta = invert_theta(curve, i, z, |theta| {
        let ln_z = ln_zi + integrate(|x| 1.0 / denom(x), theta_i, theta, tol)?.value;
        Ok((ln_z - z.ln(), 1.0 / denom(theta)))
    })?;
    let w = curve.w()[i] + integrate(|x| x / denom(x), theta_i, theta, tol)?.value;
    Ok(CurveState {
        theta,
        k: root_at(theta)?,
        w,
    })
}

/// Residual of the reduced equation at `z` along a curve segment, with
/// `w'` and `w''` from fourth-order differences of the interpolant.
pub(crate) fn reduced_residual(
    eq: &ReducedEquation,
    curve: &ParametricCurve,
    segment: usize,
    z: f64,
    h: f64,
) -> Result<f64> {
    let (w1, w2) = curve_derivatives(curve, segment, z, h)?;
    let x = z * (2.0 * w1 + z * w2) + eq.zeta;
    Ok(0.5 * eq.sigma2 * x * (1.0 - eq.mu * x.cbrt()) + eq.rho_zeta + eq.lambda * z * w1)
}

/// `(w', w'')` at `z` by centred fourth-order differences with step `h`.
pub(crate) fn curve_derivatives(curve: &ParametricCurve, segment: usize, z: f64, h: f64) -> Result<(f64, f64)> {
    let f = |x: f64| curve.eval(segment, x);
    let (m2, m1, c, p1, p2) = (f(z - 2.0 * h)?, f(z - h)?, f(z)?, f(z + h)?, f(z + 2.0 * h)?);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok((d1, d2))
}

/// Midpoints of the cells of a segment together with a stencil step that
/// keeps the five-point stencil inside the cell.
pub(crate) fn cell_midpoints(curve: &ParametricCurve, segment: usize) -> Result<Vec<(f64, f64)>> {
    let (first, last) = curve.segment_indices(segment)?;
    let z = curve.z();
    Ok((first..last)
        .map(|i| (0.5 * (z[i] + z[i + 1]), (z[i + 1] - z[i]).abs() / 8.0))
        .collect())
}

/// Integrand `(k(z)³ + a0 + a1/z)/z` with `k` a fixed-side root of
/// `p³(1 − μp) + d0 + d1/z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootIntegrand {
    /// Root in the variable `1/z`.
    pub root: AffineRoot,
    pub a0: f64,
    pub a1: f64,
}

impl RootIntegrand {
    pub fn k(&self, z: f64) -> Option<f64> {
        self.root.at(1.0 / z)
    }

    pub fn value(&self, z: f64) -> f64 {
        match self.k(z) {
            Some(k) => (k * k * k + self.a0 + self.a1 / z) / z,
            None => f64::NAN,
        }
    }
}

/// `F` with `F'' = q`, `F(z_lo) = F'(z_lo) = 0`, tabulated on panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleIntegral {
    pub integrand: RootIntegrand,
    nodes: Vec<f64>,
    /// `F` at the nodes
    f: Vec<f64>,
    /// `F'` at the nodes
    df: Vec<f64>,
    tol: Tolerance,
}

impl DoubleIntegral {
    /// Panels are geometric in `z` because the integrand behaves like `1/z`.
    pub fn new(integrand: RootIntegrand, range: (f64, f64), panels: usize, tol: Tolerance) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!(
                "quadrature range must satisfy 0 < z_lo < z_hi, got [{lo}, {hi}]"
            )));
        }
        let nodes = sample_points(range, panels.max(1) + 1, Sampling::Log)?;
        let q = |x: f64| integrand.value(x);
        let mut f = vec![0.0];
        let mut df = vec![0.0];
        for pair in nodes.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let g = integrate(q, a, b, &tol)?.value;
            let moment = integrate(|x| (b - x) * q(x), a, b, &tol)?.value;
            let (f_prev, df_prev) = (*f.last().expect("seeded"), *df.last().expect("seeded"));
            f.push(f_prev + df_prev * (b - a) + moment);
            df.push(df_prev + g);
        }
        Ok(DoubleIntegral {
            integrand,
            nodes,
            f,
            df,
            tol,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// `(F, F', F'')` at `z`.
    pub fn eval(&self, z: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.range();
        if !(z >= lo && z <= hi) {
            return Err(Error::OutsideSupport { z, lo, hi });
        }
        let i = self.nodes.partition_point(|&x| x <= z).clamp(1, self.nodes.len() - 1) - 1;
        let a = self.nodes[i];
        let q = |x: f64| self.integrand.value(x);
        let g = integrate(q, a, z, &self.tol)?.value;
        let moment = integrate(|x| (z - x) * q(x), a, z, &self.tol)?.value;
        Ok((self.f[i] + self.df[i] * (z - a) + moment, self.df[i] + g, q(z)))
    }
}
