use anyhow::{Context, Result};
use rapm_core::hedging::{hedge_paths, lag_experiment, PathConfig};
use rapm_core::invariant::InvariantSolution;
use rapm_core::pde::{fd_solve, fmt17, residual_norm, surface_csv, BlackScholesCall, FdSurface, Restricted};
use rapm_core::symmetry::{
    basis_u, e_table, preserves_solutions, prolongation_check, subalgebra_catalog, u_table, CatalogParams, Flow,
    PROLONGATION_TOLERANCE,
};
use rapm_core::{Error, GridSpec, ModelParams, Surface};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{default_grid, RunConfig, Terminal, DEFAULT_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// Inputs or results failed a check.
    Validation,
    /// A numerical procedure broke down.
    Numerical,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Validation => 1,
            Status::Numerical => 2,
        }
    }

    fn from_checks(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Validation
        }
    }
}

/// A JSON report plus any files to write next to it.
pub struct Outcome {
    pub status: Status,
    pub report: Value,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn new(status: Status, report: Value) -> Self {
        Outcome {
            status,
            report,
            files: Vec::new(),
        }
    }

    fn with_file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

pub fn params(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.model;
    let adm = p.admissible(cfg.maturity)?;
    let report = json!({
        "command": "params",
        "config": cfg,
        "mu": p.mu(),
        "c_times_r": p.cost() * p.risk_premium(),
        "c_over_r": p.cost() / p.risk_premium(),
        "sigma2_t": p.sigma2() * cfg.maturity,
        "admissibility": adm,
        "pass": adm.ok(),
    });
    Ok(Outcome::new(Status::from_checks(adm.ok()), report))
}

fn build(cfg: &RunConfig) -> Result<InvariantSolution> {
    cfg.family
        .build(&cfg.model)
        .with_context(|| format!("building family {}", cfg.family.name()))
}

fn family_grid(cfg: &RunConfig, sol: &InvariantSolution) -> Result<GridSpec> {
    if let Some(g) = cfg.grid {
        return Ok(g);
    }
    let (s, t, n_s, n_t) = DEFAULT_GRID;
    sol.suggested_grid(s, t, n_s, n_t)
        .context("the default grid does not fit the family's support window; set `grid` in the config")
}

pub fn solve_invariant(cfg: &RunConfig) -> Result<Outcome> {
    let sol = build(cfg)?;
    let grid = family_grid(cfg, &sol)?;
    let surface = Restricted::to_grid(&sol, &grid);
    let csv = surface_csv(&surface, &grid)?;
    let residual = residual_norm(&surface, &cfg.model, &grid)?;
    let report = json!({
        "command": "solve-invariant",
        "config": cfg,
        "family": cfg.family.name(),
        "grid": grid,
        "residual": residual,
        "residual_within_tolerance": residual.max_scaled <= cfg.tolerance,
    });
    let mut out = Outcome::new(Status::Pass, report)
        .with_file("surface.csv", csv)
        .with_file("residual.csv", residual.to_csv())
        .with_file("family.json", serde_json::to_string_pretty(&sol)?)
        .with_file("config.json", serde_json::to_string_pretty(cfg)?);
    if let Some(curve) = sol.curve() {
        out = out.with_file("curve.csv", curve.to_csv());
    }
    Ok(out)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.model;
    let sol = build(cfg)?;
    let grid = family_grid(cfg, &sol)?;
    let surface = Restricted::to_grid(&sol, &grid);
    let residual = residual_norm(&surface, p, &grid)?;
    let mut checks = vec![
        Check::at_most("residual", residual.max_scaled, cfg.tolerance),
        Check::at_most("parabolicity-violations", residual.parabolicity_violations as f64, 0.0),
    ];
    if let InvariantSolution::Special(f) = &sol {
        let ode = f.ode_residuals()?;
        checks.push(Check::at_most("reduced-first-order", ode.first_order, 1e-5));
        checks.push(Check::at_most("reduced-second-order", ode.second_order, 1e-5));
    }

    let flows = flow_checks(cfg, &sol, &grid, &mut checks)?;
    let ok = checks.iter().all(|c| c.pass);
    let report = json!({
        "command": "verify",
        "config": cfg,
        "family": cfg.family.name(),
        "grid": grid,
        "residual": residual,
        "flows": flows,
        "checks": checks,
        "pass": ok,
    });
    Ok(Outcome::new(Status::from_checks(ok), report))
}

/// Run the configured flows. Symmetries must preserve the residual and the
/// control must not. Flows that move the support window of a parametric
/// family are skipped.
fn flow_checks(
    cfg: &RunConfig,
    sol: &InvariantSolution,
    grid: &GridSpec,
    checks: &mut Vec<Check>,
) -> Result<Vec<Value>> {
    let moves_support = sol.z_window()?.is_some();
    let mut flows = Vec::new();
    for &which in &cfg.flows.flows {
        if moves_support && matches!(which, Flow::U1 | Flow::U3) {
            flows.push(json!({ "flow": which, "skipped": "flow moves the support window of a parametric family" }));
            continue;
        }
        for &lam in &cfg.flows.lambdas {
            let rep = preserves_solutions(which, lam, sol, &cfg.model, grid)?;
            let expected = which != Flow::SquareShift;
            checks.push(Check {
                name: format!("flow {} λ={lam}", flow_name(which)),
                value: (rep.flowed_max_abs - rep.base_max_abs).abs(),
                tolerance: rep.tolerance,
                pass: rep.pass == expected,
            });
            flows.push(json!({ "report": rep, "expected_to_preserve": expected }));
        }
    }
    Ok(flows)
}

fn flow_name(f: Flow) -> String {
    serde_json::to_value(f)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn fd_csv(fd: &FdSurface) -> String {
    let mut out = String::from("S,t,u\n");
    for (j, &t) in fd.t_nodes().iter().enumerate() {
        for (i, &s) in fd.s_nodes().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", fmt17(s), fmt17(t), fmt17(fd.node(i, j))));
        }
    }
    out
}

fn coarsen(g: &GridSpec, level: usize) -> GridSpec {
    let f = 1usize << level;
    GridSpec {
        n_s: (g.n_s - 1) / f + 1,
        n_t: (g.n_t - 1) / f + 1,
        ..*g
    }
}

/// Check that a surface is defined wherever the solver will sample it.
fn check_data<U: Surface>(u: &U, grid: &GridSpec) -> Result<()> {
    let t1 = grid.t_max;
    for s in grid.s_nodes() {
        u.value(s, t1).context("terminal data")?;
    }
    for t in grid.t_nodes() {
        u.value(grid.s_min, t).context("lower boundary data")?;
        u.value(grid.s_max, t).context("upper boundary data")?;
    }
    Ok(())
}

fn solve_with<U: Surface>(p: &ModelParams, cfg: &RunConfig, u: &U, grid: &GridSpec) -> rapm_core::Result<FdSurface> {
    let (t1, lo, hi) = (grid.t_max, grid.s_min, grid.s_max);
    let at = |s: f64, t: f64| u.value(s, t).unwrap_or(f64::NAN);
    fd_solve(p, |s| at(s, t1), |t| at(lo, t), |t| at(hi, t), grid, &cfg.fd.options)
}

pub fn fd_solve_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.model;
    let sol;
    let call;
    let power;
    let (data, oracle, fallback): (&dyn Surface, Option<&dyn Surface>, GridSpec) = match cfg.fd.terminal {
        Terminal::Family => {
            sol = build(cfg)?;
            let g = family_grid(cfg, &sol)?;
            (&sol, Some(&sol), g)
        }
        Terminal::Call { strike } => {
            call = BlackScholesCall {
                sigma: p.sigma(),
                r: p.r(),
                strike,
                maturity: cfg.maturity,
            };
            (&call, (p.mu() == 0.0).then_some(&call as &dyn Surface), default_grid())
        }
        Terminal::Power { scale, exponent } => {
            power = PowerData { scale, exponent };
            (&power, None, default_grid())
        }
    };
    let grid = cfg.grid.unwrap_or(fallback);
    check_data(&data, &grid)?;

    let mut errors = Vec::new();
    let mut finest = None;
    for level in 0..=cfg.fd.coarsenings {
        let g = coarsen(&grid, level);
        match solve_with(&p, cfg, &data, &g) {
            Ok(fd) => {
                if let Some(o) = oracle {
                    errors.push(json!({ "n_s": g.n_s, "n_t": g.n_t, "max_error": fd.max_error(&o)? }));
                }
                if level == 0 {
                    finest = Some(fd);
                }
            }
            Err(Error::ParabolicityLost { s, t, s_gamma, bound }) => {
                let report = json!({
                    "command": "fd-solve",
                    "config": cfg,
                    "grid": g,
                    "status": "parabolicity-lost",
                    "location": { "S": s, "t": t },
                    "s_gamma": s_gamma,
                    "bound": bound,
                    "pass": false,
                });
                return Ok(Outcome::new(Status::Numerical, report));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let fd = finest.expect("level 0 always runs");
    let ratios: Vec<f64> = errors
        .windows(2)
        .filter_map(|w| Some(w[1]["max_error"].as_f64()? / w[0]["max_error"].as_f64()?))
        .collect();
    let report = json!({
        "command": "fd-solve",
        "config": cfg,
        "grid": grid,
        "status": "solved",
        "picard_iterations": fd.picard_iterations,
        "oracle_errors": errors,
        "refinement_ratios": ratios,
        "pass": true,
    });
    Ok(Outcome::new(Status::Pass, report).with_file("fd_surface.csv", fd_csv(&fd)))
}

/// `scale · S^exponent` at every time, so the boundaries hold their
/// terminal values.
struct PowerData {
    scale: f64,
    exponent: f64,
}

impl Surface for PowerData {
    fn value(&self, s: f64, _t: f64) -> rapm_core::Result<f64> {
        Ok(self.scale * s.powf(self.exponent))
    }
}

pub fn simulate(cfg: &RunConfig, per_path: bool) -> Result<Outcome> {
    let p = &cfg.model;
    let rep = lag_experiment(p, &cfg.simulation)?;
    let report = json!({
        "command": "simulate",
        "config": cfg,
        "experiment": rep,
        "checks": { "variance_smallest_at_optimum": rep.variance_smallest_at_optimum },
    });
    let mut out = Outcome::new(Status::Pass, report);
    if per_path {
        let e = &cfg.simulation;
        let paths = PathConfig {
            s0: e.s0,
            rho: e.rho,
            sigma: p.sigma(),
            dt: rep.path_dt,
            horizon: e.horizon,
            seed: e.seed,
            n_paths: e.n_paths,
        };
        let call = BlackScholesCall {
            sigma: p.sigma(),
            r: p.r(),
            strike: e.strike,
            maturity: e.horizon,
        };
        let mut csv = String::from("path,S_T,error,cost\n");
        for (i, o) in hedge_paths(p, &call, &paths, rep.dt_opt_grid)?.iter().enumerate() {
            csv.push_str(&format!(
                "{i},{},{},{}\n",
                fmt17(o.s_terminal),
                fmt17(o.error),
                fmt17(o.cost)
            ));
        }
        out = out.with_file("paths.csv", csv);
    }
    Ok(out)
}

pub fn symmetry_table(rate: f64, e_basis: bool) -> Result<(Outcome, String)> {
    let table = if e_basis { e_table(rate)? } else { u_table(rate)? };
    let text = table.to_string();
    let report = json!({ "command": "symmetry table", "rate": rate, "table": table });
    Ok((Outcome::new(Status::Pass, report), text))
}

pub fn symmetry_catalog(rate: f64, params: CatalogParams) -> Result<Outcome> {
    let mut entries = Vec::new();
    let mut ok = true;
    for e in subalgebra_catalog() {
        let closed = e.is_subalgebra(rate, &params)?;
        ok &= closed;
        entries.push(json!({ "entry": e, "closed": closed }));
    }
    let report =
        json!({ "command": "symmetry catalog", "rate": rate, "params": params, "subalgebras": entries, "pass": ok });
    Ok(Outcome::new(Status::from_checks(ok), report))
}

pub fn symmetry_prolong(cfg: &RunConfig, samples: usize, seed: u64) -> Result<Outcome> {
    let names = rapm_core::symmetry::U_NAMES;
    let mut reports = Vec::new();
    let mut ok = true;
    for (name, x) in names.iter().zip(basis_u(cfg.model.r())?) {
        let rep = prolongation_check(&x, &cfg.model, samples, seed)?;
        ok &= rep.pass;
        reports.push(json!({ "generator": name, "field": x.to_string(), "report": rep }));
    }
    let report = json!({
        "command": "symmetry prolong",
        "config": cfg,
        "tolerance": PROLONGATION_TOLERANCE,
        "generators": reports,
        "pass": ok,
    });
    Ok(Outcome::new(Status::from_checks(ok), report))
}

pub fn symmetry_check_flow(cfg: &RunConfig) -> Result<Outcome> {
    let sol = build(cfg)?;
    let grid = family_grid(cfg, &sol)?;
    let mut checks = Vec::new();
    let flows = flow_checks(cfg, &sol, &grid, &mut checks)?;
    let ok = checks.iter().all(|c| c.pass);
    let report = json!({
        "command": "symmetry check-flow",
        "config": cfg,
        "family": cfg.family.name(),
        "grid": grid,
        "flows": flows,
        "checks": checks,
        "pass": ok,
    });
    Ok(Outcome::new(Status::from_checks(ok), report))
}
