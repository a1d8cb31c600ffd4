use serde::{Deserialize, Serialize};

use super::{rapm_operator, GridSpec, Jet, Support, Surface};
use crate::error::{Error, Result};
use crate::model::{parabolicity_bound, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub residual: f64,
    pub parabolic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// `max |residual| / (1 + |u|)`
    pub max_scaled: f64,
    pub max_abs_u: f64,
    pub parabolicity_violations: usize,
    pub analytic_derivatives: bool,
    /// `max |r_h − r_2h|` over the grid when finite differences were used.
    pub richardson_estimate: Option<f64>,
    #[serde(skip)]
    pub points: Vec<ResidualPoint>,
}

impl ResidualReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("S,t,u,residual\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                super::fmt17(p.s),
                super::fmt17(p.t),
                super::fmt17(p.u),
                super::fmt17(p.residual)
            ));
        }
        out
    }
}

/// Evaluate the equation residual of `surface` at every grid node.
///
/// Analytic derivatives are used when the surface provides them; otherwise
/// fourth-order centred differences with steps of a quarter of the local
/// grid spacing, falling back to second-order one-sided stencils where the
/// centred stencil would leave the support.
pub fn residual_norm<U: Surface>(surface: &U, p: &ModelParams, grid: &GridSpec) -> Result<ResidualReport> {
    grid.validate()?;
    let support = surface.support();
    let s_nodes = grid.s_nodes();
    let t_nodes = grid.t_nodes();
    for &s in [s_nodes[0], s_nodes[s_nodes.len() - 1]].iter() {
        for &t in [t_nodes[0], t_nodes[t_nodes.len() - 1]].iter() {
            if !support.contains(s, t) {
                return Err(Error::SupportTooSmall);
            }
        }
    }
    let bound = parabolicity_bound(p.mu());
    let dt_grid = (grid.t_max - grid.t_min) / (grid.n_t - 1) as f64;
    let h_t = if dt_grid > 0.0 { dt_grid / 4.0 } else { 1e-4 };

    let mut points = Vec::with_capacity(s_nodes.len() * t_nodes.len());
    let mut richardson: Option<f64> = None;
    let mut analytic = true;
    for &t in &t_nodes {
        for (i, &s) in s_nodes.iter().enumerate() {
            let jet = match surface.jet(s, t) {
                Some(jet) => jet,
                None => {
                    analytic = false;
                    let gap = local_gap(&s_nodes, i);
                    let fine = fd_jet(surface, &support, s, t, gap / 4.0, h_t)?;
                    let coarse = fd_jet(surface, &support, s, t, gap / 2.0, 2.0 * h_t)?;
                    let diff = (rapm_operator(p, &fine, s) - rapm_operator(p, &coarse, s)).abs();
                    richardson = Some(richardson.map_or(diff, |r: f64| r.max(diff)));
                    fine
                }
            };
            points.push(ResidualPoint {
                s,
                t,
                u: jet.u,
                residual: rapm_operator(p, &jet, s),
                parabolic: s * jet.u_ss < bound,
            });
        }
    }
    Ok(summarize(points, analytic, richardson))
}

fn summarize(points: Vec<ResidualPoint>, analytic: bool, richardson: Option<f64>) -> ResidualReport {
    let max_abs = points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max);
    let max_scaled = points
        .iter()
        .map(|p| p.residual.abs() / (1.0 + p.u.abs()))
        .fold(0.0, f64::max);
    let max_abs_u = points.iter().map(|p| p.u.abs()).fold(0.0, f64::max);
    ResidualReport {
        max_abs,
        max_scaled,
        max_abs_u,
        parabolicity_violations: points.iter().filter(|p| !p.parabolic).count(),
        analytic_derivatives: analytic,
        richardson_estimate: if analytic { None } else { richardson },
        points,
    }
}

fn local_gap(nodes: &[f64], i: usize) -> f64 {
    let left = if i > 0 { nodes[i] - nodes[i - 1] } else { f64::INFINITY };
    let right = if i + 1 < nodes.len() {
        nodes[i + 1] - nodes[i]
    } else {
        f64::INFINITY
    };
    left.min(right)
}

#[derive(Clone, Copy)]
enum Stencil {
    Centred,
    Forward,
    Backward,
}

fn pick(lo: f64, hi: f64, x: f64, h: f64, strict_lo: bool) -> Result<Stencil> {
    let inside = |y: f64| (if strict_lo { y > lo } else { y >= lo }) && y <= hi;
    if inside(x - 2.0 * h) && inside(x + 2.0 * h) {
        Ok(Stencil::Centred)
    } else if inside(x + 3.0 * h) {
        Ok(Stencil::Forward)
    } else if inside(x - 3.0 * h) {
        Ok(Stencil::Backward)
    } else {
        Err(Error::SupportTooSmall)
    }
}

/// First and second derivative of `f` at `x`.
fn derivatives<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64, stencil: Stencil) -> Result<(f64, f64, f64)> {
    let f0 = f(x)?;
    match stencil {
        Stencil::Centred => {
            let (m2, m1, p1, p2) = (f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?);
            let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
            let d2 = (-m2 + 16.0 * m1 - 30.0 * f0 + 16.0 * p1 - p2) / (12.0 * h * h);
            Ok((f0, d1, d2))
        }
        Stencil::Forward | Stencil::Backward => {
            let sign = if matches!(stencil, Stencil::Forward) { 1.0 } else { -1.0 };
            let step = sign * h;
            let (f1, f2, f3) = (f(x + step)?, f(x + 2.0 * step)?, f(x + 3.0 * step)?);
            let d1 = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step);
            let d2 = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
            Ok((f0, d1, d2))
        }
    }
}

pub(crate) fn fd_jet<U: Surface>(surface: &U, support: &Support, s: f64, t: f64, h_s: f64, h_t: f64) -> Result<Jet> {
    let s_stencil = pick(support.s_min, support.s_max, s, h_s, true)?;
    let t_stencil = pick(support.t_min, support.t_max, t, h_t, false)?;
    let (u, u_s, u_ss) = derivatives(|x| surface.value(x, t), s, h_s, s_stencil)?;
    let (_, u_t, _) = derivatives(|y| surface.value(s, y), t, h_t, t_stencil)?;
    Ok(Jet { u, u_t, u_s, u_ss })
}
