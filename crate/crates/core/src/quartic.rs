//! Real roots of the quartics `p³(1 − μ_eff·p) + d = 0` that every reduction
//! produces, and continuation of a root along a one-parameter family.
//!
//! The derivative `p²(3 − 4μ_eff·p)` vanishes only at `p = 0` (an inflection)
//! and at `p_c = 3/(4μ_eff)`, so the polynomial is monotone on each side of
//! `p_c`. There are therefore at most two real roots, one per side, and they
//! can be bracketed without any eigen-solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roots closer than this are reported as one root with multiplicity.
pub const MERGE_DISTANCE: f64 = 1e-7;

/// `−mu_eff·p⁴ + p³ + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapmQuartic {
    pub mu_eff: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: u8,
}

impl RapmQuartic {
    pub fn new(mu_eff: f64, d: f64) -> Self {
        RapmQuartic { mu_eff, d }
    }

    pub fn value(&self, p: f64) -> f64 {
        p * p * p * (1.0 - self.mu_eff * p) + self.d
    }

    pub fn derivative(&self, p: f64) -> f64 {
        p * p * (3.0 - 4.0 * self.mu_eff * p)
    }

    /// `p_c = 3/(4μ_eff)`, the only extremum. `None` for the cubic case.
    pub fn fold_point(&self) -> Option<f64> {
        (self.mu_eff != 0.0).then(|| 0.75 / self.mu_eff)
    }

    /// Polynomial residual bound used throughout: `1e-10·max(1, |x|⁴)`.
    pub fn residual_ok(&self, x: f64) -> bool {
        self.value(x).abs() <= 1e-10 * x.powi(4).max(1.0)
    }

    /// All real roots in ascending order.
    pub fn real_roots(&self) -> Vec<RealRoot> {
        let RapmQuartic { mu_eff: mu, d } = *self;
        assert!(mu.is_finite() && d.is_finite(), "non-finite quartic coefficients");

        if mu == 0.0 {
            return vec![RealRoot {
                value: (-d).cbrt(),
                multiplicity: if d.abs().cbrt() < MERGE_DISTANCE { 3 } else { 1 },
            }];
        }

        let pc = 0.75 / mu;
        let fc = self.value(pc);
        // The extremum is a maximum for mu > 0 and a minimum for mu < 0.
        let level = fc * mu.signum();
        // Half-distance of the two roots straddling the fold, from the local
        // quadratic model f ≈ f(p_c) − (3 p_c / 2)(p − p_c)².
        let fold_half_width = (2.0 * fc.abs() / (3.0 * pc.abs())).sqrt();
        if fold_half_width < MERGE_DISTANCE {
            return vec![RealRoot {
                value: pc,
                multiplicity: 2,
            }];
        }
        if level < 0.0 {
            return Vec::new();
        }

        let bound = 1.0 + (1.0 + d.abs()) / mu.abs();
        let mut roots: Vec<RealRoot> = [(-bound, pc), (pc, bound)]
            .into_iter()
            .map(|(lo, hi)| {
                let value = self.bracketed_root(lo, hi);
                let multiplicity = if value.abs() < MERGE_DISTANCE && d.abs().cbrt() < MERGE_DISTANCE {
                    3
                } else {
                    1
                };
                RealRoot {
                    value: if multiplicity == 3 { (-d).cbrt() } else { value },
                    multiplicity,
                }
            })
            .collect();
        roots.sort_by(|a, b| a.value.total_cmp(&b.value));
        roots
    }

    /// Real roots expanded into branch slots: a fold (double) root occupies
    /// both adjacent slots, so branch indices stay stable up to the fold.
    pub fn branch_roots(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        for root in self.real_roots() {
            out.push(root.value);
            if root.multiplicity == 2 {
                out.push(root.value);
            }
        }
        out
    }

    pub fn root_on_branch(&self, branch: usize) -> Result<f64> {
        let roots = self.branch_roots();
        roots.get(branch).copied().ok_or(Error::NoRealRoot {
            branch,
            available: roots.len(),
        })
    }

    /// Safeguarded Newton on a bracket where the polynomial is monotone and
    /// changes sign.
    fn bracketed_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut f_lo = self.value(lo);
        if f_lo == 0.0 {
            return lo;
        }
        if self.value(hi) == 0.0 {
            return hi;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..400 {
            let fx = self.value(x);
            if fx == 0.0 {
                return x;
            }
            if (fx < 0.0) == (f_lo < 0.0) {
                lo = x;
                f_lo = fx;
            } else {
                hi = x;
            }
            let dfx = self.derivative(x);
            let newton = x - fx / dfx;
            let next = if dfx != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == x || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Continuation settings for [`track_root`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Number of intervals the parameter range is split into.
    pub steps: usize,
    /// Allowed jump is `slope_factor·|Δs|·(|slope| + 1)`, capped by `max_jump`.
    pub slope_factor: f64,
    pub max_jump: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            steps: 200,
            slope_factor: 50.0,
            max_jump: 1.0,
        }
    }
}

/// A continuous selection of real roots along a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootBranch {
    pub branch_id: usize,
    /// `(parameter, root)` pairs.
    pub samples: Vec<(f64, f64)>,
}

impl RootBranch {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,root\n");
        for (s, k) in &self.samples {
            out.push_str(&format!("{},{}\n", crate::pde::fmt17(*s), crate::pde::fmt17(*k)));
        }
        out
    }
}

/// Side of the fold `p_c` a root lies on. A continuous branch keeps its side
/// until it reaches the fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchSide {
    /// Cubic case, a single real root.
    Only,
    Left,
    Right,
}

impl RapmQuartic {
    pub fn side_of(&self, root: f64) -> BranchSide {
        match self.fold_point() {
            None => BranchSide::Only,
            Some(pc) if root < pc => BranchSide::Left,
            Some(_) => BranchSide::Right,
        }
    }

    /// The simple real root on `side`, if any.
    pub fn root_on_side(&self, side: BranchSide) -> Option<f64> {
        self.real_roots()
            .into_iter()
            .find(|r| r.multiplicity != 2 && (side == BranchSide::Only || self.side_of(r.value) == side))
            .map(|r| r.value)
    }
}

fn side_of(q: &RapmQuartic, root: f64) -> BranchSide {
    q.side_of(root)
}

fn side_exists(q: &RapmQuartic, side: BranchSide) -> bool {
    q.root_on_side(side).is_some()
}

/// Follow the real root that starts at `seed_root` across `range`.
///
/// Refuses to step through a fold (where the tracked root merges with its
/// neighbour and leaves the real line) and reports the parameter value where
/// that happens, located by bisection.
pub fn track_root<F>(family: F, range: (f64, f64), seed_root: f64, opts: &TrackOptions) -> Result<RootBranch>
where
    F: Fn(f64) -> RapmQuartic,
{
    let (start, end) = range;
    if opts.steps == 0 {
        return Err(Error::Config("track_root needs at least one step".into()));
    }
    let q0 = family(start);
    let slots = q0.branch_roots();
    let (branch_id, &root0) = slots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - seed_root).abs().total_cmp(&(b.1 - seed_root).abs()))
        .ok_or(Error::NoRealRoot {
            branch: 0,
            available: 0,
        })?;
    if (root0 - seed_root).abs() > 1e-6 * seed_root.abs().max(1.0) {
        return Err(Error::InvalidParameter {
            name: "seed_root",
            value: seed_root,
            reason: "is not a root of the family at the start of the range",
        });
    }
    let side = side_of(&q0, root0);

    let ds = (end - start) / opts.steps as f64;
    let mut samples = Vec::with_capacity(opts.steps + 1);
    samples.push((start, root0));
    let mut slope: Option<f64> = None;

    for i in 1..=opts.steps {
        let s = if i == opts.steps { end } else { start + ds * i as f64 };
        let (s_prev, k_prev) = *samples.last().expect("seeded");
        let q = family(s);
        let predicted = k_prev + slope.unwrap_or(0.0) * (s - s_prev);
        let candidate = q
            .real_roots()
            .into_iter()
            .filter(|r| r.multiplicity != 2 && side_of(&q, r.value) == side)
            .min_by(|a, b| (a.value - predicted).abs().total_cmp(&(b.value - predicted).abs()));

        let Some(root) = candidate else {
            let at = locate_termination(&family, s_prev, s, side);
            return Err(Error::BranchTerminated {
                at,
                reason: "real root merged with its neighbour",
            });
        };
        let allowed = opts
            .max_jump
            .min(opts.slope_factor * (s - s_prev).abs() * (slope.unwrap_or(0.0).abs() + 1.0));
        if (root.value - predicted).abs() > allowed {
            return Err(Error::BranchTerminated {
                at: s,
                reason: "continuity threshold exceeded",
            });
        }
        slope = Some((root.value - k_prev) / (s - s_prev));
        samples.push((s, root.value));
    }
    Ok(RootBranch { branch_id, samples })
}

fn locate_termination<F: Fn(f64) -> RapmQuartic>(family: &F, mut good: f64, mut bad: f64, side: BranchSide) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if side_exists(&family(mid), side) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    0.5 * (good + bad)
}
