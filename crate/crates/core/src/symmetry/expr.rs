use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational from a finite `f64` (every finite double is a dyadic rational).
pub fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::InvalidParameter {
        name: "value",
        value: x,
        reason: "must be finite",
    })
}

/// Exponents of `t^t · S^s · u^u · e^{e·r·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub t: u32,
    pub s: u32,
    pub u: u32,
    pub e: i32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { t: 0, s: 0, u: 0, e: 0 };

    fn times(self, o: Monomial) -> Monomial {
        Monomial {
            t: self.t + o.t,
            s: self.s + o.s,
            u: self.u + o.u,
            e: self.e + o.e,
        }
    }
}

/// Finite sums of monomials `t^a S^b u^c e^{d r t}` with rational
/// coefficients, kept canonical: ordered, merged, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MicroExpr {
    terms: BTreeMap<Monomial, BigRational>,
}

impl MicroExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::ONE)
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MicroExpr { terms }
    }

    pub fn t() -> Self {
        Self::term(BigRational::one(), Monomial { t: 1, ..Monomial::ONE })
    }

    pub fn s() -> Self {
        Self::term(BigRational::one(), Monomial { s: 1, ..Monomial::ONE })
    }

    pub fn u() -> Self {
        Self::term(BigRational::one(), Monomial { u: 1, ..Monomial::ONE })
    }

    /// `e^{k r t}`.
    pub fn exp_rt(k: i32) -> Self {
        Self::term(BigRational::one(), Monomial { e: k, ..Monomial::ONE })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    fn accumulate(&mut self, m: Monomial, c: BigRational) {
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.accumulate(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        MicroExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.accumulate(m1.times(*m2), c1 * c2);
            }
        }
        out
    }

    /// `∂/∂t`, where `r` enters through `e^{drt}`.
    pub fn d_t(&self, r: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.t > 0 {
                out.accumulate(Monomial { t: m.t - 1, ..*m }, c * BigInt::from(m.t));
            }
            if m.e != 0 {
                out.accumulate(*m, c * r * BigInt::from(m.e));
            }
        }
        out
    }

    pub fn d_s(&self) -> Self {
        self.power_derivative(|m| &mut m.s)
    }

    pub fn d_u(&self) -> Self {
        self.power_derivative(|m| &mut m.u)
    }

    fn power_derivative(&self, slot: impl Fn(&mut Monomial) -> &mut u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut m = *m;
            let k = *slot(&mut m);
            if k > 0 {
                *slot(&mut m) = k - 1;
                out.accumulate(m, c * BigInt::from(k));
            }
        }
        out
    }

    /// Numerical value at a point.
    pub fn eval(&self, r: f64, t: f64, s: f64, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.to_f64().unwrap_or(f64::NAN)
                    * t.powi(m.t as i32)
                    * s.powi(m.s as i32)
                    * u.powi(m.u as i32)
                    * (m.e as f64 * r * t).exp()
            })
            .sum()
    }
}

/// Short human-readable form of an exact coefficient.
pub(crate) fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        let x = q.to_f64().unwrap_or(f64::NAN);
        let s = format!("{x}");
        if exact(x).map(|e| &e == q).unwrap_or(false) {
            s
        } else {
            format!("{s}…")
        }
    }
}

impl fmt::Display for MicroExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let mag = c.abs();
            let mut factors = Vec::new();
            if !mag.is_one() || *m == Monomial::ONE {
                factors.push(format_rational(&mag));
            }
            for (name, k) in [("t", m.t), ("S", m.s), ("u", m.u)] {
                match k {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{k}")),
                }
            }
            match m.e {
                0 => {}
                1 => factors.push("e^(rt)".into()),
                e => factors.push(format!("e^({e}rt)")),
            }
            write!(f, "{}", factors.join("·"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn derivatives() {
        let r = q(1, 20);
        // t²·S·e^{2rt}
        let f = MicroExpr::term(q(3, 1), Monomial { t: 2, s: 1, u: 0, e: 2 });
        let ft = f.d_t(&r);
        let expected = MicroExpr::term(q(6, 1), Monomial { t: 1, s: 1, u: 0, e: 2 })
            .add(&MicroExpr::term(q(3, 10), Monomial { t: 2, s: 1, u: 0, e: 2 }));
        assert_eq!(ft, expected);
        assert_eq!(f.d_s(), MicroExpr::term(q(3, 1), Monomial { t: 2, s: 0, u: 0, e: 2 }));
        assert!(f.d_u().is_zero());
    }

    #[test]
    fn cancellation_is_canonical() {
        let a = MicroExpr::s().add(&MicroExpr::u());
        let b = a.sub(&MicroExpr::u());
        assert_eq!(b, MicroExpr::s());
        assert!(a.sub(&a).is_zero());
        assert_eq!(MicroExpr::exp_rt(1).mul(&MicroExpr::exp_rt(-1)), MicroExpr::one());
    }

    #[test]
    fn display() {
        let e = MicroExpr::s()
            .scale(&q(-1, 1))
            .add(&MicroExpr::exp_rt(1))
            .add(&MicroExpr::constant(q(1, 2)));
        assert_eq!(e.to_string(), "0.5 + e^(rt) - S");
    }

    fn small_expr() -> impl Strategy<Value = MicroExpr> {
        prop::collection::vec((-5i64..=5, 0u32..3, 0u32..3, 0u32..3, -2i32..=2), 0..5).prop_map(|ts| {
            ts.into_iter().fold(MicroExpr::zero(), |acc, (c, t, s, u, e)| {
                acc.add(&MicroExpr::term(q(c, 1), Monomial { t, s, u, e }))
            })
        })
    }

    proptest! {
        #[test]
        fn leibniz_rule(a in small_expr(), b in small_expr()) {
            let r = q(3, 10);
            let lhs = a.mul(&b).d_t(&r);
            let rhs = a.d_t(&r).mul(&b).add(&a.mul(&b.d_t(&r)));
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.mul(&b).d_s(), a.d_s().mul(&b).add(&a.mul(&b.d_s())));
        }

        #[test]
        fn eval_matches_structure(a in small_expr(), b in small_expr()) {
            let (r, t, s, u) = (0.3, 0.7, 1.3, -0.4);
            let prod = a.mul(&b).eval(r, t, s, u);
            let sep = a.eval(r, t, s, u) * b.eval(r, t, s, u);
            prop_assert!((prod - sep).abs() <= 1e-9 * (1.0 + sep.abs()));
        }
    }
}
