//! Lattice expressions built from abstract generators, Lebesgue factors,
//! powers, products and order duals.
//!
//! The normal form is a formal product `prod_g g^{e_g} · (L^1)^μ` in which a
//! dual is `X′ = L^1 · X^{-1}`; `L^t` has L¹-mass `1/t`. Powers and products are
//! then linear in `(e, μ)` and the dual is `e -> -e`, `μ -> 1 - μ`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{fmt_rational, Poly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attr {
    Fatou,
    OrderContinuous,
    Banach,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    /// Declared convexity `p` and concavity `q`.
    pub convexity: Option<(Rational64, Rational64)>,
    pub attrs: BTreeSet<Attr>,
}

impl Generator {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), convexity: None, attrs: BTreeSet::new() }
    }

    pub fn with_convexity(mut self, p: Rational64, q: Rational64) -> Result<Self> {
        if !(p > Rational64::one() && p <= q) {
            return Err(Error::Declaration(format!(
                "{}: need 1 < p <= q, got p = {}, q = {}",
                self.name,
                fmt_rational(p),
                fmt_rational(q)
            )));
        }
        self.convexity = Some((p, q));
        Ok(self)
    }

    pub fn with(mut self, attr: Attr) -> Self {
        self.attrs.insert(attr);
        self
    }
}

/// Surface syntax; [`normalize`] maps it to a [`LatticeExpr`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Gen(String),
    /// `L^t` for `t >= 1`; `None` is `L^∞`.
    Leb(Option<Rational64>),
    Pow(Box<Term>, Poly),
    Prod(Vec<Term>),
    Dual(Box<Term>),
}

impl Term {
    pub fn gen(name: &str) -> Self {
        Term::Gen(name.to_string())
    }
    pub fn leb(t: Rational64) -> Self {
        Term::Leb(Some(t))
    }
    pub fn pow(self, a: impl Into<Poly>) -> Self {
        Term::Pow(Box::new(self), a.into())
    }
    pub fn dual(self) -> Self {
        Term::Dual(Box::new(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeExpr {
    gens: BTreeMap<String, Poly>,
    mass: Poly,
}

/// Sign of a parameter polynomial when all parameters are positive.
pub fn sign(p: &Poly) -> Option<Ordering> {
    if p.is_zero() {
        Some(Ordering::Equal)
    } else if p.nonnegative_coefficients() {
        Some(Ordering::Greater)
    } else if p.nonpositive_coefficients() {
        Some(Ordering::Less)
    } else {
        None
    }
}

fn require_positive(a: &Poly, what: &str) -> Result<()> {
    if sign(a) == Some(Ordering::Greater) {
        Ok(())
    } else {
        Err(Error::Form(format!("{what} exponent {a} is not positive")))
    }
}

pub fn normalize(t: &Term) -> Result<LatticeExpr> {
    match t {
        Term::Gen(g) => Ok(LatticeExpr::gen(g)),
        Term::Leb(None) => Ok(LatticeExpr::identity()),
        Term::Leb(Some(t)) => LatticeExpr::lebesgue(*t),
        Term::Pow(inner, a) => normalize(inner)?.pow(a),
        Term::Prod(fs) => {
            let mut out = LatticeExpr::identity();
            for f in fs {
                out = out.mul(&normalize(f)?);
            }
            Ok(out)
        }
        Term::Dual(inner) => Ok(normalize(inner)?.dual()),
    }
}

impl LatticeExpr {
    pub fn identity() -> Self {
        Self { gens: BTreeMap::new(), mass: Poly::zero() }
    }

    pub fn gen(name: &str) -> Self {
        let mut gens = BTreeMap::new();
        gens.insert(name.to_string(), Poly::int(1));
        Self { gens, mass: Poly::zero() }
    }

    pub fn l1() -> Self {
        Self { gens: BTreeMap::new(), mass: Poly::int(1) }
    }

    pub fn lebesgue(t: Rational64) -> Result<Self> {
        if t < Rational64::one() {
            return Err(Error::Form(format!("L^t needs t >= 1, got {}", fmt_rational(t))));
        }
        Ok(Self { gens: BTreeMap::new(), mass: Poly::constant(t.recip()) })
    }

    pub fn exponent(&self, g: &str) -> Poly {
        self.gens.get(g).cloned().unwrap_or_default()
    }

    pub fn mass(&self) -> &Poly {
        &self.mass
    }

    pub fn generators(&self) -> impl Iterator<Item = &String> {
        self.gens.keys()
    }

    fn scaled(&self, a: &Poly) -> Self {
        let gens = self
            .gens
            .iter()
            .map(|(g, e)| (g.clone(), e * a))
            .filter(|(_, e)| !e.is_zero())
            .collect();
        Self { gens, mass: &self.mass * a }
    }

    /// `self^a`, `a > 0`.
    pub fn pow(&self, a: &Poly) -> Result<Self> {
        require_positive(a, "power")?;
        Ok(self.scaled(a))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut gens = self.gens.clone();
        for (g, e) in &o.gens {
            let v = gens.remove(g).unwrap_or_default() + e.clone();
            if !v.is_zero() {
                gens.insert(g.clone(), v);
            }
        }
        Self { gens, mass: &self.mass + &o.mass }
    }

    /// Formal quotient: the `Z` with `Z · o = self`.
    pub fn div(&self, o: &Self) -> Result<Self> {
        let q = self.mul(&o.scaled(&Poly::int(-1)));
        q.check_form()?;
        Ok(q)
    }

    pub fn dual(&self) -> Self {
        let gens = self.gens.iter().map(|(g, e)| (g.clone(), -e.clone())).collect();
        Self { gens, mass: Poly::int(1) - self.mass.clone() }
    }

    /// Whether the formal product is an honest lattice: nonnegative mass, and
    /// positive mass whenever a dual part occurs.
    pub fn check_form(&self) -> Result<()> {
        let mut has_dual = false;
        for (g, e) in &self.gens {
            match sign(e) {
                Some(Ordering::Less) => has_dual = true,
                Some(_) => {}
                None => return Err(Error::Form(format!("sign of the exponent {e} of {g} is undetermined"))),
            }
        }
        match sign(&self.mass) {
            Some(Ordering::Greater) => Ok(()),
            Some(Ordering::Equal) if !has_dual => Ok(()),
            _ => Err(Error::Form(format!("{} is not a lattice (L¹-mass {})", self, self.mass))),
        }
    }

    /// Attribute holds for every generator; order continuity also needs no dual part.
    pub fn has_attr(&self, ctx: &Context, attr: Attr) -> bool {
        self.gens.iter().all(|(g, e)| {
            ctx.generators.get(g).is_some_and(|d| d.attrs.contains(&attr))
                && (attr != Attr::OrderContinuous || sign(e) == Some(Ordering::Greater))
        })
    }

    /// `1 / convexity = sum_{e>0} e/p + sum_{e<0} e/q + μ`.
    pub fn convexity(&self, ctx: &Context) -> Result<Rational64> {
        let mut inv = self
            .mass
            .as_constant()
            .ok_or_else(|| Error::Form(format!("symbolic L¹-mass {}", self.mass)))?;
        for (g, e) in &self.gens {
            let e = e.as_constant().ok_or_else(|| Error::Form(format!("symbolic exponent {e} of {g}")))?;
            let (p, q) = ctx
                .generators
                .get(g)
                .and_then(|d| d.convexity)
                .ok_or_else(|| Error::Declaration(format!("{g} has no declared convexity")))?;
            inv += if e.is_positive() { e / p } else { e / q };
        }
        if !inv.is_positive() {
            return Err(Error::Form(format!("{self} has no finite convexity")));
        }
        Ok(inv.recip())
    }

    pub fn display(&self, ctx: &Context) -> String {
        let mut best = (self.plain(), self.plain_score());
        for (name, a) in ctx.aliases.iter().rev() {
            for (label, base) in [(name.clone(), a.clone()), (primed(name), a.dual())] {
                if let Some((s, score)) = self.via_alias(&label, &base) {
                    if score < best.1 {
                        best = (s, score);
                    }
                }
            }
        }
        best.0
    }

    /// `self = base^γ · (L^1)^m` with constant `γ > 0`, `m >= 0`.
    fn via_alias(&self, label: &str, base: &Self) -> Option<(String, (usize, usize))> {
        if base.gens.is_empty() || base.gens.keys().ne(self.gens.keys()) {
            return None;
        }
        let (g0, e0) = base.gens.iter().next()?;
        let gamma = (self.gens[g0].as_constant()?) / e0.as_constant()?;
        if !gamma.is_positive() {
            return None;
        }
        let gp = Poly::constant(gamma);
        if base.gens.iter().any(|(g, e)| self.gens[g] != e * &gp) {
            return None;
        }
        let m = &self.mass - &(&base.mass * &gp);
        if matches!(sign(&m), Some(Ordering::Less) | None) {
            return None;
        }
        let mut parts = vec![with_exp(label, &gp)];
        if !m.is_zero() {
            parts.push(lebesgue_label(&m));
        }
        let score = (usize::from(!gamma.is_one()), parts.len());
        Some((parts.join("·"), score))
    }

    fn plain_score(&self) -> (usize, usize) {
        let parts = self.plain_parts();
        let nonunit = parts.iter().filter(|f| !f.starts_with("L^") && f.contains('^')).count();
        (nonunit, parts.len())
    }

    fn plain(&self) -> String {
        self.plain_parts().join("·")
    }

    fn plain_parts(&self) -> Vec<String> {
        if self.gens.is_empty() && self.mass.is_zero() {
            return vec!["L^{∞}".into()];
        }
        let mut parts = Vec::new();
        let mut neg = Vec::new();
        for (g, e) in &self.gens {
            if sign(e) == Some(Ordering::Less) {
                neg.push((g, -e.clone()));
            } else {
                parts.push(with_exp(g, e));
            }
        }
        if neg.is_empty() {
            if !self.mass.is_zero() {
                parts.push(lebesgue_label(&self.mass));
            }
            return parts;
        }
        let neg_total = neg.iter().fold(Poly::zero(), |a, (_, e)| a + e.clone());
        let residual = &self.mass - &neg_total;
        let factorwise = residual.as_constant().is_some_and(|r| !r.is_negative());
        if factorwise {
            for (g, e) in &neg {
                parts.push(with_exp(&primed(g), e));
            }
            if !residual.is_zero() {
                parts.push(lebesgue_label(&residual));
            }
        } else if let Some(inv) = self.mass.inverse() {
            // X^{-a} Y^{-b} (L^1)^μ = (X^{a/μ} Y^{b/μ})′^μ
            let inner: Vec<String> = neg.iter().map(|(g, e)| with_exp(g, &(e * &inv))).collect();
            parts.push(with_exp(&format!("({})′", inner.join("·")), &self.mass));
        } else {
            for (g, e) in &neg {
                parts.push(format!("{g}^{{-({e})}}"));
            }
            parts.push(format!("(L^{{1}})^{{{}}}", self.mass));
        }
        parts
    }
}

fn primed(name: &str) -> String {
    if name.chars().all(|c| c.is_alphanumeric() || c == '′') {
        format!("{name}′")
    } else {
        format!("({name})′")
    }
}

fn with_exp(base: &str, e: &Poly) -> String {
    match e.as_constant() {
        Some(c) if c.is_one() => base.to_string(),
        Some(c) => format!("{base}^{{{}}}", fmt_rational(c)),
        None => format!("{base}^{{{e}}}"),
    }
}

fn lebesgue_label(mass: &Poly) -> String {
    match mass.as_constant() {
        Some(m) if m <= Rational64::one() && m.is_positive() => format!("L^{{{}}}", fmt_rational(m.recip())),
        _ => format!("(L^{{1}})^{{{mass}}}"),
    }
}

impl fmt::Display for LatticeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plain())
    }
}

/// Generator declarations and display aliases.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Context {
    pub generators: BTreeMap<String, Generator>,
    pub aliases: Vec<(String, LatticeExpr)>,
}

impl Context {
    pub fn declare(&mut self, g: Generator) {
        self.generators.insert(g.name.clone(), g);
    }

    pub fn alias(&mut self, name: &str, e: LatticeExpr) {
        self.aliases.push((name.to_string(), e));
    }

    /// Every generator of `e` is declared.
    pub fn check_declared(&self, e: &LatticeExpr) -> Result<()> {
        match e.gens.keys().find(|g| !self.generators.contains_key(*g)) {
            Some(g) => Err(Error::Declaration(format!("generator {g} is not declared"))),
            None => Ok(()),
        }
    }
}

/// `(1/convexity, 1/concavity)` evaluated on the syntax tree.
pub fn term_indices(t: &Term, ctx: &Context) -> Result<(Rational64, Rational64)> {
    match t {
        Term::Gen(g) => {
            let (p, q) = ctx
                .generators
                .get(g)
                .and_then(|d| d.convexity)
                .ok_or_else(|| Error::Declaration(format!("{g} has no declared convexity")))?;
            Ok((p.recip(), q.recip()))
        }
        Term::Leb(None) => Ok((Rational64::zero(), Rational64::zero())),
        Term::Leb(Some(t)) => Ok((t.recip(), t.recip())),
        Term::Pow(inner, a) => {
            let a = a.as_constant().ok_or_else(|| Error::Form(format!("symbolic exponent {a}")))?;
            let (x, y) = term_indices(inner, ctx)?;
            Ok((a * x, a * y))
        }
        Term::Prod(fs) => fs.iter().try_fold((Rational64::zero(), Rational64::zero()), |acc, f| {
            let (x, y) = term_indices(f, ctx)?;
            Ok((acc.0 + x, acc.1 + y))
        }),
        Term::Dual(inner) => {
            let (x, y) = term_indices(inner, ctx)?;
            Ok((Rational64::one() - y, Rational64::one() - x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::rat;
    use super::*;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.declare(Generator::new("X").with_convexity(rat(2, 1), rat(4, 1)).unwrap());
        c
    }

    fn y() -> LatticeExpr {
        // X^{3/2} L^8
        normalize(&Term::Prod(vec![Term::gen("X").pow(rat(3, 2)), Term::leb(rat(8, 1))])).unwrap()
    }

    #[test]
    fn normal_forms() {
        let s = rat(8, 7);
        let alt = Term::Prod(vec![
            Term::gen("X").pow(rat(3, 2) * s).pow(s.recip()),
            Term::leb(rat(1, 1)).pow(Rational64::one() - s.recip()),
        ]);
        assert_eq!(normalize(&alt).unwrap(), y());
        assert_eq!(y().to_string(), "X^{3/2}·L^{8}");
        assert_eq!(normalize(&Term::gen("X").pow(1)).unwrap().to_string(), "X");
        let half = y().pow(&Poly::constant(rat(1, 2))).unwrap();
        assert_eq!(half.to_string(), "X^{3/4}·L^{16}");
        assert!(normalize(&Term::gen("X").pow(0)).is_err());
        assert!(normalize(&Term::gen("X").pow(-1)).is_err());
    }

    #[test]
    fn duals() {
        let w = normalize(&Term::Prod(vec![
            Term::gen("X").pow(rat(1, 2)),
            Term::leb(rat(8, 1)).pow(rat(1, 2)),
        ]))
        .unwrap();
        let expect = normalize(&Term::Prod(vec![
            Term::gen("X").dual().pow(rat(1, 2)),
            Term::leb(rat(8, 7)).pow(rat(1, 2)),
        ]))
        .unwrap();
        assert_eq!(w.dual(), expect);
        let l2 = LatticeExpr::lebesgue(rat(2, 1)).unwrap();
        assert_eq!(l2.dual(), l2);
        let l3 = LatticeExpr::lebesgue(rat(3, 1)).unwrap();
        assert_eq!(l3.dual(), LatticeExpr::lebesgue(rat(3, 2)).unwrap());
        let h = y().pow(&Poly::constant(rat(1, 2))).unwrap();
        assert_eq!(h.dual().dual(), h);
        assert_eq!(LatticeExpr::gen("X").dual().to_string(), "X′");
        assert_eq!(y().dual().to_string(), "(X^{12/7})′^{7/8}");
    }

    #[test]
    fn convexities() {
        let c = ctx();
        assert_eq!(y().convexity(&c).unwrap(), rat(8, 7));
        assert_eq!(LatticeExpr::lebesgue(rat(2, 1)).unwrap().convexity(&c).unwrap(), rat(2, 1));
        let w = y().pow(&Poly::constant(rat(1, 2))).unwrap().mul(
            &LatticeExpr::lebesgue(rat(8, 1)).unwrap().pow(&Poly::constant(rat(1, 2))).unwrap(),
        );
        assert_eq!(w.convexity(&c).unwrap(), rat(2, 1));
        assert!(matches!(LatticeExpr::gen("Z").convexity(&c), Err(Error::Declaration(_))));
        assert!(Generator::new("Z").with_convexity(rat(3, 1), rat(2, 1)).is_err());
        assert!(Generator::new("Z").with_convexity(rat(1, 1), rat(2, 1)).is_err());
    }

    #[test]
    fn alias_display() {
        let mut c = ctx();
        c.alias("Y", y());
        let t8 = LatticeExpr::lebesgue(rat(8, 1)).unwrap();
        let half = Poly::constant(rat(1, 2));
        let w = y().pow(&half).unwrap().mul(&t8.pow(&half).unwrap());
        c.alias("W", w.clone());
        assert_eq!(y().display(&c), "Y");
        assert_eq!(y().dual().display(&c), "Y′");
        assert_eq!(w.dual().display(&c), "W′");
        let t8p = LatticeExpr::lebesgue(rat(8, 7)).unwrap();
        assert_eq!(y().dual().mul(&t8p).display(&c), "Y′·L^{8/7}");
        assert_eq!(LatticeExpr::gen("X").dual().display(&c), "X′");
        let z = LatticeExpr::gen("X").pow(&Poly::constant(rat(12, 7))).unwrap().dual();
        assert_eq!(z.display(&c), "(X^{12/7})′");
    }

    #[test]
    fn quotient_and_form() {
        let y = y();
        let t = LatticeExpr::lebesgue(rat(8, 7)).unwrap();
        assert_eq!(y.dual().mul(&t).div(&t).unwrap(), y.dual());
        assert!(LatticeExpr::identity().div(&LatticeExpr::gen("X")).is_err());
    }
}
