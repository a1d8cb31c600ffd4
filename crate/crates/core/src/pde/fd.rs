use serde::{Deserialize, Serialize};

use super::{GridSpec, Support, Surface};
use crate::error::{Error, Result};
use crate::model::{parabolicity_bound, ModelParams};

/// Time discretisation. `Weighted { theta: 0.5 }` is Crank–Nicolson,
/// `theta: 1` fully implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    Weighted { theta: f64 },
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::Explicit => 0.0,
            Scheme::Weighted { theta } => theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdOptions {
    pub scheme: Scheme,
    pub picard_max_iters: usize,
    /// Picard stops when `max |Δu| ≤ picard_tol · (1 + max |u|)`.
    pub picard_tol: f64,
    /// Allowed mismatch between terminal and boundary data at the corners.
    pub corner_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            scheme: Scheme::Weighted { theta: 0.5 },
            picard_max_iters: 100,
            picard_tol: 1e-12,
            corner_tol: 1e-8,
        }
    }
}

/// Grid solution with bilinear evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSurface {
    s_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
    /// `values[j][i]` at `(s_nodes[i], t_nodes[j])`, `t` ascending.
    values: Vec<Vec<f64>>,
    pub picard_iterations: usize,
}

impl FdSurface {
    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j][i]
    }

    /// Maximum nodal deviation from `exact`.
    pub fn max_error<U: Surface>(&self, exact: &U) -> Result<f64> {
        let mut err = 0.0f64;
        for (j, &t) in self.t_nodes.iter().enumerate() {
            for (i, &s) in self.s_nodes.iter().enumerate() {
                err = err.max((self.values[j][i] - exact.value(s, t)?).abs());
            }
        }
        Ok(err)
    }
}

fn bracket(nodes: &[f64], x: f64) -> (usize, f64) {
    let k = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1) - 1;
    let w = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
    (k, w)
}

impl Surface for FdSurface {
    fn value(&self, s: f64, t: f64) -> Result<f64> {
        let sup = self.support();
        if s < sup.s_min || s > sup.s_max || t < sup.t_min || t > sup.t_max {
            return Err(Error::OutsideSupport {
                z: s,
                lo: sup.s_min,
                hi: sup.s_max,
            });
        }
        let (i, ws) = bracket(&self.s_nodes, s);
        let (j, wt) = bracket(&self.t_nodes, t);
        let row = |j: usize| self.values[j][i] * (1.0 - ws) + self.values[j][i + 1] * ws;
        Ok(row(j) * (1.0 - wt) + row(j + 1) * wt)
    }

    fn support(&self) -> Support {
        Support {
            s_min: self.s_nodes[0],
            s_max: self.s_nodes[self.s_nodes.len() - 1],
            t_min: self.t_nodes[0],
            t_max: self.t_nodes[self.t_nodes.len() - 1],
        }
    }
}

/// Three-point weights on a non-uniform grid, as `(lower, centre, upper)`.
#[derive(Clone, Copy)]
struct Weights {
    d1: (f64, f64, f64),
    d2: (f64, f64, f64),
}

fn weights(s: &[f64]) -> Vec<Weights> {
    (1..s.len() - 1)
        .map(|i| {
            let (hm, hp) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let sum = hm + hp;
            Weights {
                d1: (-hp / (hm * sum), (hp - hm) / (hp * hm), hm / (hp * sum)),
                d2: (2.0 / (hm * sum), -2.0 / (hm * hp), 2.0 / (hp * sum)),
            }
        })
        .collect()
}

fn second_derivative(w: &Weights, u: &[f64], i: usize) -> f64 {
    w.d2.0 * u[i - 1] + w.d2.1 * u[i] + w.d2.2 * u[i + 1]
}

fn check_parabolic(s: &[f64], w: &[Weights], u: &[f64], t: f64, bound: f64) -> Result<()> {
    for i in 1..s.len() - 1 {
        let x = s[i] * second_derivative(&w[i - 1], u, i);
        if !(x < bound) {
            return Err(Error::ParabolicityLost {
                s: s[i],
                t,
                s_gamma: x,
                bound,
            });
        }
    }
    Ok(())
}

/// Operator rows `(A, B, C)` with the nonlinear factor evaluated on `frozen`.
fn rows(p: &ModelParams, s: &[f64], w: &[Weights], frozen: &[f64]) -> Vec<(f64, f64, f64)> {
    let half_var = 0.5 * p.sigma2();
    (1..s.len() - 1)
        .map(|i| {
            let wi = &w[i - 1];
            let x = s[i] * second_derivative(wi, frozen, i);
            let a = half_var * s[i] * s[i] * (1.0 - p.mu() * x.cbrt());
            let drift = p.r() * s[i];
            (
                a * wi.d2.0 + drift * wi.d1.0,
                a * wi.d2.1 + drift * wi.d1.1 - p.r(),
                a * wi.d2.2 + drift * wi.d1.2,
            )
        })
        .collect()
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// March the equation backward from `grid.t_max` to `grid.t_min` with
/// Dirichlet data at `S_min` and `S_max`.
///
/// Within each step the factor `1 − μ cbrt(S u_SS)` is frozen at the latest
/// iterate and the resulting linear problem solved exactly (Picard). The
/// solver stops with [`Error::ParabolicityLost`] at the first node where
/// `S u_SS` reaches `(3/(4μ))³`, on the terminal data or any later level.
pub fn fd_solve<T, L, H>(
    p: &ModelParams,
    terminal: T,
    lower: L,
    upper: H,
    grid: &GridSpec,
    opts: &FdOptions,
) -> Result<FdSurface>
where
    T: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    grid.validate()?;
    let theta = opts.scheme.theta();
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Config(format!("theta = {theta} outside [0, 1]")));
    }
    if grid.t_max <= grid.t_min {
        return Err(Error::Config("fd_solve needs t_min < t_max".into()));
    }
    let s = grid.s_nodes();
    let t = grid.t_nodes();
    let (n, m) = (s.len(), t.len());
    let t1 = t[m - 1];

    let mut level: Vec<f64> = s.iter().map(|&x| terminal(x)).collect();
    for (edge, side) in [(level[0], lower(t1)), (level[n - 1], upper(t1))] {
        if (edge - side).abs() > opts.corner_tol * (1.0 + edge.abs()) {
            return Err(Error::Config(format!(
                "terminal and boundary data disagree at a corner: {edge} vs {side}"
            )));
        }
    }

    let w = weights(&s);
    let bound = parabolicity_bound(p.mu());
    check_parabolic(&s, &w, &level, t1, bound)?;
    let linear = p.mu() == 0.0;

    let mut values = vec![Vec::new(); m];
    values[m - 1] = level.clone();
    let mut total_iterations = 0;
    for j in (0..m - 1).rev() {
        let dt = t[j + 1] - t[j];
        let explicit_rows = rows(p, &s, &w, &level);
        let rhs: Vec<f64> = (1..n - 1)
            .map(|i| {
                let (a, b, c) = explicit_rows[i - 1];
                level[i] + (1.0 - theta) * dt * (a * level[i - 1] + b * level[i] + c * level[i + 1])
            })
            .collect();
        let (lo, hi) = (lower(t[j]), upper(t[j]));

        let mut iterate = level.clone();
        iterate[0] = lo;
        iterate[n - 1] = hi;
        let mut converged = false;
        let mut change = f64::INFINITY;
        for _ in 0..opts.picard_max_iters.max(1) {
            total_iterations += 1;
            let implicit_rows = rows(p, &s, &w, &iterate);
            let k = n - 2;
            let mut sub = vec![0.0; k];
            let mut diag = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut b = rhs.clone();
            for r in 0..k {
                let (a, bb, c) = implicit_rows[r];
                sub[r] = -theta * dt * a;
                diag[r] = 1.0 - theta * dt * bb;
                sup[r] = -theta * dt * c;
            }
            b[0] -= sub[0] * lo;
            b[k - 1] -= sup[k - 1] * hi;
            solve_tridiagonal(&sub, &diag, &sup, &mut b);

            let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            change = b
                .iter()
                .zip(&iterate[1..n - 1])
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            iterate[1..n - 1].copy_from_slice(&b);
            if linear || theta == 0.0 || change <= opts.picard_tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::PicardStalled {
                t: t[j],
                iterations: opts.picard_max_iters,
                change,
            });
        }
        check_parabolic(&s, &w, &iterate, t[j], bound)?;
        level = iterate;
        values[j] = level.clone();
    }

    Ok(FdSurface {
        s_nodes: s,
        t_nodes: t,
        values,
        picard_iterations: total_iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Order {
    /// Errors at rounding level on every grid.
    Exact,
    Observed(f64),
}

/// Errors at or below this are treated as rounding.
const ROUNDING_LEVEL: f64 = 1e-10;

/// Observed order from errors on grids `h, h/2, h/4`: the mean of
/// `log2(e_h / e_{h/2})` and `log2(e_{h/2} / e_{h/4})`.
pub fn convergence_order(errors: [f64; 3]) -> Result<Order> {
    if errors.iter().all(|&e| e <= ROUNDING_LEVEL) {
        return Ok(Order::Exact);
    }
    if !(errors[0] > errors[1] && errors[1] > errors[2]) {
        return Err(Error::NonMonotoneErrors(errors.to_vec()));
    }
    let r1 = (errors[0] / errors[1]).log2();
    let r2 = (errors[1] / errors[2]).log2();
    Ok(Order::Observed(0.5 * (r1 + r2)))
}
