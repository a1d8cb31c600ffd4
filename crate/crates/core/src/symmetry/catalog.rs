//! The optimal system of subalgebras `h1..h12`, written in the `e`-basis.
//!
//! The table is encoded as data and checked, not re-derived. `h7` and `h8`
//! use one `φ` for both of their generators.

use serde::{Deserialize, Serialize};

use super::expr::exact;
use super::field::{basis_e, combination, express_in, rank, VectorField};
use crate::error::{Error, Result};

/// Values for the free parameters `a ∈ ℝ`, `ε = ±1`, `φ ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub a: f64,
    pub eps: f64,
    pub phi: f64,
}

type Coords = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    A,
    Eps,
    Phi,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubalgebraEntry {
    pub id: &'static str,
    pub dimension: usize,
    pub generators: &'static [&'static str],
    pub parameters: &'static [Parameter],
    #[serde(skip)]
    build: fn(&CatalogParams) -> Vec<Coords>,
}

fn dir(p: &CatalogParams) -> Coords {
    [0.0, 0.0, p.phi.cos(), p.phi.sin()]
}

fn orth(p: &CatalogParams) -> Coords {
    [0.0, 0.0, p.phi.sin(), -p.phi.cos()]
}

fn plus(base: Coords, k: f64, v: Coords) -> Coords {
    [
        base[0] + k * v[0],
        base[1] + k * v[1],
        base[2] + k * v[2],
        base[3] + k * v[3],
    ]
}

const E1: Coords = [1.0, 0.0, 0.0, 0.0];
const E2: Coords = [0.0, 1.0, 0.0, 0.0];
const E3: Coords = [0.0, 0.0, 1.0, 0.0];
const E4: Coords = [0.0, 0.0, 0.0, 1.0];

const E1_PLUS_A: &str = "e1 + a(e3 cos φ + e4 sin φ)";
const E2_PLUS_EPS: &str = "e2 + ε(e3 cos φ + e4 sin φ)";
const ORTH: &str = "e3 sin φ − e4 cos φ";

use Parameter::{Eps, Phi, A};

/// The twelve entries. The same list serves `r = 0` and `r ≠ 0`; only the
/// meaning of `e1..e4` changes (see [`basis_e`]).
pub fn subalgebra_catalog() -> Vec<SubalgebraEntry> {
    vec![
        SubalgebraEntry {
            id: "h1",
            dimension: 1,
            generators: &["e2"],
            parameters: &[],
            build: |_| vec![E2],
        },
        SubalgebraEntry {
            id: "h2",
            dimension: 1,
            generators: &["e3 cos φ + e4 sin φ"],
            parameters: &[Phi],
            build: |p| vec![dir(p)],
        },
        SubalgebraEntry {
            id: "h3",
            dimension: 1,
            generators: &[E1_PLUS_A],
            parameters: &[A, Phi],
            build: |p| vec![plus(E1, p.a, dir(p))],
        },
        SubalgebraEntry {
            id: "h4",
            dimension: 1,
            generators: &[E2_PLUS_EPS],
            parameters: &[Eps, Phi],
            build: |p| vec![plus(E2, p.eps, dir(p))],
        },
        SubalgebraEntry {
            id: "h5",
            dimension: 2,
            generators: &[E1_PLUS_A, "e2"],
            parameters: &[A, Phi],
            build: |p| vec![plus(E1, p.a, dir(p)), E2],
        },
        SubalgebraEntry {
            id: "h6",
            dimension: 2,
            generators: &["e3", "e4"],
            parameters: &[],
            build: |_| vec![E3, E4],
        },
        SubalgebraEntry {
            id: "h7",
            dimension: 2,
            generators: &[E1_PLUS_A, ORTH],
            parameters: &[A, Phi],
            build: |p| vec![plus(E1, p.a, dir(p)), orth(p)],
        },
        SubalgebraEntry {
            id: "h8",
            dimension: 2,
            generators: &[E2_PLUS_EPS, ORTH],
            parameters: &[Eps, Phi],
            build: |p| vec![plus(E2, p.eps, dir(p)), orth(p)],
        },
        SubalgebraEntry {
            id: "h9",
            dimension: 2,
            generators: &["e2", ORTH],
            parameters: &[Phi],
            build: |p| vec![E2, orth(p)],
        },
        SubalgebraEntry {
            id: "h10",
            dimension: 3,
            generators: &["e1", "e3", "e4"],
            parameters: &[],
            build: |_| vec![E1, E3, E4],
        },
        SubalgebraEntry {
            id: "h11",
            dimension: 3,
            generators: &["e2", "e3", "e4"],
            parameters: &[],
            build: |_| vec![E2, E3, E4],
        },
        SubalgebraEntry {
            id: "h12",
            dimension: 3,
            generators: &[E1_PLUS_A, ORTH, "e2"],
            parameters: &[A, Phi],
            build: |p| vec![plus(E1, p.a, dir(p)), orth(p), E2],
        },
    ]
}

/// Look up an entry by id (`"h1"` .. `"h12"`).
pub fn subalgebra(id: &str) -> Result<SubalgebraEntry> {
    subalgebra_catalog()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::Config(format!("no subalgebra {id}")))
}

impl SubalgebraEntry {
    /// Generator coordinates in the `e`-basis.
    pub fn coordinates(&self, params: &CatalogParams) -> Vec<Coords> {
        (self.build)(params)
    }

    /// Generators as vector fields for a given rate.
    pub fn fields(&self, r: f64, params: &CatalogParams) -> Result<Vec<VectorField>> {
        let basis = basis_e(r)?;
        self.coordinates(params)
            .iter()
            .map(|c| {
                let q = c.iter().map(|&x| exact(x)).collect::<Result<Vec<_>>>()?;
                combination(&basis, &q)
            })
            .collect()
    }

    /// The generators are independent and every bracket stays in their span.
    pub fn is_subalgebra(&self, r: f64, params: &CatalogParams) -> Result<bool> {
        let fields = self.fields(r, params)?;
        if rank(&fields) != self.dimension {
            return Ok(false);
        }
        for (i, x) in fields.iter().enumerate() {
            for y in &fields[i + 1..] {
                if express_in(&x.commutator(y)?, &fields).is_none() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let cat = subalgebra_catalog();
        assert_eq!(cat.len(), 12);
        assert_eq!(cat[0].generators, ["e2"]);
        assert_eq!(subalgebra("h6").unwrap().generators, ["e3", "e4"]);
        let h12 = subalgebra("h12").unwrap();
        assert_eq!(h12.dimension, 3);
        assert_eq!(h12.parameters, [A, Phi]);
        for e in &cat {
            assert_eq!(e.generators.len(), e.dimension);
        }
    }

    #[test]
    fn every_entry_closes() {
        let params = CatalogParams {
            a: 0.7,
            eps: -1.0,
            phi: 1.1,
        };
        for r in [0.0, 0.05, 0.3] {
            for e in subalgebra_catalog() {
                assert!(e.is_subalgebra(r, &params).unwrap(), "{} at r={r}", e.id);
            }
        }
    }

    #[test]
    fn a_non_subalgebra_is_detected() {
        // ⟨e1, e3 + e2⟩ is not closed: [e1, e3 + e2] = e2
        let fake = SubalgebraEntry {
            id: "x",
            dimension: 2,
            generators: &["e1", "e3 + e2"],
            parameters: &[],
            build: |_| vec![E1, [0.0, 1.0, 1.0, 0.0]],
        };
        let p = CatalogParams {
            a: 0.0,
            eps: 1.0,
            phi: 0.0,
        };
        assert!(!fake.is_subalgebra(0.05, &p).unwrap());
    }
}
