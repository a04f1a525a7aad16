//! Laurent polynomials with rational coefficients over named parameters.
//!
//! Indices and exponents in derivations are either plain rationals or
//! expressions such as `(a1 + b0) r - 1`; division by a parameter is allowed,
//! so monomials carry signed powers.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Product of parameters with nonzero signed powers.
pub type Monomial = BTreeMap<String, i32>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational64>,
}

pub fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Self { terms }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Rational64::from(n))
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(name, 1)
    }

    pub fn monomial(name: &str, power: i32) -> Self {
        let mut m = Monomial::new();
        if power != 0 {
            m.insert(name.to_string(), power);
        }
        let mut terms = BTreeMap::new();
        terms.insert(m, Rational64::one());
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if no parameter occurs.
    pub fn as_constant(&self) -> Option<Rational64> {
        match self.terms.len() {
            0 => Some(Rational64::zero()),
            1 => self.terms.get(&Monomial::new()).copied(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rational64 {
        self.terms.get(&Monomial::new()).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn scale(&self, c: Rational64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Multiplicative inverse, defined for a single nonzero term.
    pub fn inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let inv: Monomial = m.iter().map(|(k, e)| (k.clone(), -e)).collect();
        let mut terms = BTreeMap::new();
        terms.insert(inv, c.recip());
        Some(Self { terms })
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn substitute(&self, name: &str, value: Rational64) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut coeff = *c;
            if let Some(e) = rest.remove(name) {
                coeff *= value.pow(e);
            }
            out = out + Self { terms: [(rest, coeff)].into_iter().filter(|(_, c)| !c.is_zero()).collect() };
        }
        out
    }

    /// All coefficients nonnegative (so the value is `>= 0` for positive parameters).
    pub fn nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn nonpositive_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_positive())
    }

    fn insert(&mut self, m: Monomial, c: Rational64) {
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }
}

impl From<Rational64> for Poly {
    fn from(c: Rational64) -> Self {
        Self::constant(c)
    }
}

impl From<i64> for Poly {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.insert(m, c);
        }
        self
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.clone() + o.clone()
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational64::one())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + (-o)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self.clone() - o.clone()
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut m = ma.clone();
                for (k, e) in mb {
                    let v = m.entry(k.clone()).or_insert(0);
                    *v += e;
                    if *v == 0 {
                        m.remove(k);
                    }
                }
                out.insert(m, ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

pub fn fmt_rational(c: Rational64) -> String {
    if c.is_integer() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    m.iter()
        .map(|(k, e)| if *e == 1 { k.clone() } else { format!("{k}^{e}") })
        .collect::<Vec<_>>()
        .join("·")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // parameter terms first, constant last: "a0·r - 1"
        let mut ordered: Vec<(&Monomial, &Rational64)> =
            self.terms.iter().filter(|(m, _)| !m.is_empty()).collect();
        ordered.extend(self.terms.iter().filter(|(m, _)| m.is_empty()));
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_empty() {
                write!(f, "{}", fmt_rational(a))?;
            } else if a.is_one() {
                write!(f, "{}", fmt_monomial(m))?;
            } else {
                write!(f, "{}·{}", fmt_rational(a), fmt_monomial(m))?;
            }
        }
        Ok(())
    }
}

/// Proves `p > 0` from parameters `>= 0` and assumptions `a_k > 0`.
///
/// A parameter is known positive if some assumption is that parameter alone,
/// or if it carries a negative power somewhere in `p`. Succeeds if `p` has
/// nonnegative coefficients and a term whose parameters are all known
/// positive, or if `p - λ a_k` has nonnegative coefficients for one
/// assumption `a_k` and some `λ > 0`.
pub fn prove_positive(p: &Poly, assumptions: &[Poly]) -> bool {
    let mut positive: Vec<&String> = assumptions
        .iter()
        .filter_map(|a| {
            let (m, c) = a.terms.iter().next()?;
            (a.terms.len() == 1 && m.len() == 1 && c.is_positive() && m.values().all(|e| *e > 0))
                .then(|| m.keys().next().unwrap())
        })
        .collect();
    positive.extend(p.terms.keys().flat_map(|m| m.iter().filter(|(_, e)| **e < 0).map(|(k, _)| k)));
    let strict_term = p
        .terms
        .iter()
        .any(|(m, c)| c.is_positive() && m.keys().all(|k| positive.contains(&k)));
    if p.nonnegative_coefficients() && strict_term {
        return true;
    }
    assumptions.iter().any(|a| multiplier_exists(p, a))
}

/// Is there `λ > 0` with every coefficient of `p - λ a` nonnegative?
fn multiplier_exists(p: &Poly, a: &Poly) -> bool {
    let mut lo = Rational64::zero();
    let mut lo_strict = true;
    let mut hi: Option<Rational64> = None;
    let mut monos: Vec<&Monomial> = p.terms.keys().chain(a.terms.keys()).collect();
    monos.sort();
    monos.dedup();
    for m in monos {
        let c = p.terms.get(m).copied().unwrap_or_else(Rational64::zero);
        let am = a.terms.get(m).copied().unwrap_or_else(Rational64::zero);
        // need c - λ am >= 0
        if am.is_zero() {
            if c.is_negative() {
                return false;
            }
        } else if am.is_positive() {
            let b = c / am;
            hi = Some(hi.map_or(b, |h: Rational64| h.min(b)));
        } else {
            let b = c / am;
            if b > lo || (b == lo && lo_strict) {
                lo = b;
                lo_strict = false;
            }
        }
    }
    match hi {
        None => true,
        Some(h) => {
            if lo_strict {
                h > lo
            } else {
                h >= lo && h.is_positive()
            }
        }
    }
}
