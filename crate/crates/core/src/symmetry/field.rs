use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::expr::{exact, format_rational, MicroExpr, Monomial};
use crate::error::{Error, Result};

/// `ξ^t ∂_t + ξ^S ∂_S + ξ^u ∂_u` on `(t, S, u)` for a fixed rate `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    rate: BigRational,
    pub xi_t: MicroExpr,
    pub xi_s: MicroExpr,
    pub xi_u: MicroExpr,
}

impl VectorField {
    pub fn new(rate: BigRational, xi_t: MicroExpr, xi_s: MicroExpr, xi_u: MicroExpr) -> Self {
        VectorField { rate, xi_t, xi_s, xi_u }
    }

    pub fn zero(rate: BigRational) -> Self {
        Self::new(rate, MicroExpr::zero(), MicroExpr::zero(), MicroExpr::zero())
    }

    pub fn rate(&self) -> &BigRational {
        &self.rate
    }

    pub fn is_zero(&self) -> bool {
        self.xi_t.is_zero() && self.xi_s.is_zero() && self.xi_u.is_zero()
    }

    /// `X(f)`.
    pub fn apply(&self, f: &MicroExpr) -> MicroExpr {
        self.xi_t
            .mul(&f.d_t(&self.rate))
            .add(&self.xi_s.mul(&f.d_s()))
            .add(&self.xi_u.mul(&f.d_u()))
    }

    fn same_rate(&self, o: &Self) -> Result<()> {
        if self.rate == o.rate {
            Ok(())
        } else {
            Err(Error::Config("vector fields built for different rates".into()))
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_rate(o)?;
        Ok(Self::new(
            self.rate.clone(),
            self.xi_t.add(&o.xi_t),
            self.xi_s.add(&o.xi_s),
            self.xi_u.add(&o.xi_u),
        ))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(
            self.rate.clone(),
            self.xi_t.scale(k),
            self.xi_s.scale(k),
            self.xi_u.scale(k),
        )
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&-BigRational::one()))
    }

    /// `[X, Y]^i = X(Y^i) − Y(X^i)`.
    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.same_rate(o)?;
        Ok(Self::new(
            self.rate.clone(),
            self.apply(&o.xi_t).sub(&o.apply(&self.xi_t)),
            self.apply(&o.xi_s).sub(&o.apply(&self.xi_s)),
            self.apply(&o.xi_u).sub(&o.apply(&self.xi_u)),
        ))
    }

    fn components(&self) -> [&MicroExpr; 3] {
        [&self.xi_t, &self.xi_s, &self.xi_u]
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in self.components().into_iter().zip(["∂t", "∂S", "∂u"]) {
            if !c.is_zero() {
                parts.push(format!("({c}){d}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `Σ c_i X_i`.
pub fn combination(fields: &[VectorField], coeffs: &[BigRational]) -> Result<VectorField> {
    let first = fields.first().ok_or_else(|| Error::Config("empty basis".into()))?;
    let mut out = VectorField::zero(first.rate.clone());
    for (x, c) in fields.iter().zip(coeffs) {
        out = out.add(&x.scale(c))?;
    }
    Ok(out)
}

/// `U1 = S∂S + u∂u`, `U2 = e^{rt}∂u`, `U3 = ∂t`, `U4 = S∂u`.
pub fn basis_u(r: f64) -> Result<[VectorField; 4]> {
    let rate = exact(r)?;
    let field = |t: MicroExpr, s: MicroExpr, u: MicroExpr| VectorField::new(rate.clone(), t, s, u);
    let z = MicroExpr::zero;
    Ok([
        field(z(), MicroExpr::s(), MicroExpr::u()),
        field(z(), z(), MicroExpr::exp_rt(1)),
        field(MicroExpr::one(), z(), z()),
        field(z(), z(), MicroExpr::s()),
    ])
}

/// The basis in which the algebra splits as `L2 ⊕ ⟨e3⟩ ⊕ ⟨e4⟩`.
///
/// For `r ≠ 0`: `e1 = (r−1)U1 + U3`, `e2 = U2`, `e3 = rU1 + U3`, `e4 = U4`.
/// For `r = 0`: `e1 = −U1`, `e2 = U2`, `e3 = U3`, `e4 = U4`.
pub fn basis_e(r: f64) -> Result<[VectorField; 4]> {
    let [u1, u2, u3, u4] = basis_u(r)?;
    let rate = u1.rate.clone();
    let one = BigRational::one();
    if rate.is_zero() {
        return Ok([u1.scale(&-one), u2, u3, u4]);
    }
    let e1 = u1.scale(&(&rate - &one)).add(&u3)?;
    let e3 = u1.scale(&rate).add(&u3)?;
    Ok([e1, u2, e3, u4])
}

/// Coordinates of `x` in `basis`, or `None` when `x` is outside the span.
/// Exact Gaussian elimination over the rationals.
pub fn express_in(x: &VectorField, basis: &[VectorField]) -> Option<Vec<BigRational>> {
    let n = basis.len();
    // one equation per (component, monomial) that appears anywhere
    let mut keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for f in basis.iter().chain(std::iter::once(x)) {
        for (i, c) in f.components().into_iter().enumerate() {
            keys.extend(c.terms().map(|(m, _)| (i, *m)));
        }
    }
    let coeff = |f: &VectorField, (i, m): (usize, Monomial)| -> BigRational {
        f.components()[i]
            .terms()
            .find(|(k, _)| **k == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    };
    let mut rows: Vec<Vec<BigRational>> = keys
        .iter()
        .map(|&k| {
            let mut row: Vec<BigRational> = basis.iter().map(|b| coeff(b, k)).collect();
            row.push(coeff(x, k));
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut out = vec![BigRational::zero(); n];
    for (i, &col) in pivots.iter().enumerate() {
        out[col] = rows[i][n].clone();
    }
    Some(out)
}

/// Number of linearly independent fields.
pub fn rank(fields: &[VectorField]) -> usize {
    (0..fields.len())
        .filter(|&i| express_in(&fields[i], &fields[..i]).is_none())
        .count()
}

/// `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]`.
pub fn jacobi(x: &VectorField, y: &VectorField, z: &VectorField) -> Result<VectorField> {
    x.commutator(y)?
        .commutator(z)?
        .add(&y.commutator(z)?.commutator(x)?)?
        .add(&z.commutator(x)?.commutator(y)?)
}

/// All brackets of a basis expressed in that basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorTable {
    pub rate: f64,
    pub names: Vec<String>,
    /// `entries[i][j]` is `[X_i, X_j]` written in the basis
    pub entries: Vec<Vec<String>>,
    #[serde(skip)]
    pub coefficients: Vec<Vec<Vec<BigRational>>>,
}

impl CommutatorTable {
    pub fn build(rate: f64, basis: &[VectorField], names: &[&str]) -> Result<Self> {
        let exact_rate = exact(rate)?;
        let mut coefficients = Vec::new();
        let mut entries = Vec::new();
        for x in basis {
            let mut row_c = Vec::new();
            let mut row_s = Vec::new();
            for y in basis {
                let c = express_in(&x.commutator(y)?, basis)
                    .ok_or_else(|| Error::Config("bracket left the span of the basis".into()))?;
                row_s.push(format_combination(&c, names, &exact_rate));
                row_c.push(c);
            }
            coefficients.push(row_c);
            entries.push(row_s);
        }
        Ok(CommutatorTable {
            rate,
            names: names.iter().map(|s| s.to_string()).collect(),
            entries,
            coefficients,
        })
    }
}

impl fmt::Display for CommutatorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .flatten()
            .map(|e| e.chars().count())
            .chain(self.names.iter().map(|n| n.chars().count()))
            .max()
            .unwrap_or(1)
            + 2;
        write!(f, "{:width$}", "[ , ]")?;
        for n in &self.names {
            write!(f, "{n:>width$}")?;
        }
        writeln!(f)?;
        for (n, row) in self.names.iter().zip(&self.entries) {
            write!(f, "{n:width$}")?;
            for e in row {
                write!(f, "{e:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `−r·U2`-style text; a coefficient equal to `±r` is printed as `r`.
pub(crate) fn format_combination(c: &[BigRational], names: &[&str], rate: &BigRational) -> String {
    let mut out = String::new();
    for (k, name) in c.iter().zip(names) {
        if k.is_zero() {
            continue;
        }
        let neg = k.is_negative();
        let mag = k.abs();
        let factor = if mag.is_one() {
            String::new()
        } else if !rate.is_zero() && &mag == rate {
            "r·".into()
        } else {
            format!("{}·", format_rational(&mag))
        };
        match (out.is_empty(), neg) {
            (true, true) => out.push('-'),
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
            (true, false) => {}
        }
        out.push_str(&factor);
        out.push_str(name);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
