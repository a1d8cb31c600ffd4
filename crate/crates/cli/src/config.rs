use std::path::Path;

use anyhow::{Context, Result};
use rapm_core::hedging::LagExperiment;
use rapm_core::invariant::{FamilySpec, H2Spec};
use rapm_core::pde::FdOptions;
use rapm_core::symmetry::Flow;
use rapm_core::{GridSpec, ModelParams};
use serde::{Deserialize, Serialize};

/// Everything a command may read. Unknown keys are rejected and the resolved
/// value, defaults included, is echoed in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    /// Option maturity `T` for the admissibility checks.
    pub maturity: f64,
    pub family: FamilySpec,
    /// Evaluation grid; parametric families fall back to a grid fitted to
    /// their support.
    pub grid: Option<GridSpec>,
    /// Bound on `max |residual| / (1 + |u|)`.
    pub tolerance: f64,
    pub fd: FdSection,
    pub simulation: LagExperiment,
    pub flows: FlowSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelParams::new(0.3, 0.05, 0.02, 8.0).expect("valid defaults"),
            maturity: 1.0,
            family: FamilySpec::H2(H2Spec {
                phi: 0.3,
                branch: 0,
                c1: 0.3,
                c2: 1.0,
            }),
            grid: None,
            tolerance: 1e-8,
            fd: FdSection::default(),
            simulation: LagExperiment::default(),
            flows: FlowSection::default(),
        }
    }
}

pub const DEFAULT_GRID: ((f64, f64), (f64, f64), usize, usize) = ((10.0, 200.0), (0.0, 0.9), 50, 50);

pub fn default_grid() -> GridSpec {
    let (s, t, n_s, n_t) = DEFAULT_GRID;
    GridSpec::new(s, t, n_s, n_t)
}

/// Source of terminal and boundary data for `fd-solve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Terminal {
    /// Terminal and boundary values of the configured invariant family.
    Family,
    /// European call; boundaries from the classical (μ = 0) price.
    Call { strike: f64 },
    /// `scale · S^exponent`, boundaries held at their terminal values.
    Power { scale: f64, exponent: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdSection {
    pub terminal: Terminal,
    pub options: FdOptions,
    /// Extra solves, each on a grid with half the points per axis.
    pub coarsenings: usize,
}

impl Default for FdSection {
    fn default() -> Self {
        FdSection {
            terminal: Terminal::Family,
            options: FdOptions::default(),
            coarsenings: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub flows: Vec<Flow>,
    pub lambdas: Vec<f64>,
}

impl Default for FlowSection {
    fn default() -> Self {
        let mut flows = Flow::SYMMETRIES.to_vec();
        flows.push(Flow::SquareShift);
        FlowSection {
            flows,
            lambdas: vec![-1.0, 0.5, 3.0],
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub sigma: Option<f64>,
    pub rate: Option<f64>,
    pub cost: Option<f64>,
    pub risk_premium: Option<f64>,
    pub maturity: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        let m = cfg.model;
        cfg.model = ModelParams::new(
            o.sigma.unwrap_or(m.sigma()),
            o.rate.unwrap_or(m.r()),
            o.cost.unwrap_or(m.cost()),
            o.risk_premium.unwrap_or(m.risk_premium()),
        )?;
        if let Some(t) = o.maturity {
            cfg.maturity = t;
        }
        if let Some(seed) = o.seed {
            cfg.simulation.seed = seed;
        }
        Ok(cfg)
    }
}
