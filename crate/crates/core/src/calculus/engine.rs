//! Regularity facts and the rules that derive them.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::bound::{eventually_positive, fmt_sum, BoundExpr};
use super::expr::{Attr, Context, Generator, LatticeExpr, Term};
use super::poly::{fmt_rational, prove_positive, Poly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityFact {
    pub expr: LatticeExpr,
    pub alpha: Poly,
    pub beta: Poly,
    pub c: BoundExpr,
    pub m: BoundExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fact {
    Regular(RegularityFact),
    /// `||op||_expr <= bound`.
    Bounded { op: String, expr: LatticeExpr, bound: BoundExpr },
    /// A concrete weight in `F(α, β)` with constant `c`.
    WeightClass { weight: String, alpha: Rational64, beta: Rational64, c: BoundExpr },
    Identity { lhs: Term, rhs: Term, normal: LatticeExpr },
    Value { name: String, value: Rational64 },
    Check { statement: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rule {
    Power { gamma: Poly },
    Product,
    Max,
    Weaken { alpha: Poly, beta: Poly },
    Duality,
    Divisibility,
    Aptoconj,
    A2rdiv,
    A1apt,
    Ainfainf,
    Aregrh { gamma: Poly },
    L1clp { theta: Rational64 },
    Lozanovsky { expr: LatticeExpr },
    BtsbAxiom,
    Themcr2,
    Btsbge,
    Interp { theta: Rational64 },
    Lebesgue { t: Rational64 },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Power { .. } => "power",
            Rule::Product => "product",
            Rule::Max => "max",
            Rule::Weaken { .. } => "weaken",
            Rule::Duality => "duality",
            Rule::Divisibility => "divisibility",
            Rule::Aptoconj => "aptoconj",
            Rule::A2rdiv => "a2rdiv",
            Rule::A1apt => "a1apt",
            Rule::Ainfainf => "ainfainf",
            Rule::Aregrh { .. } => "aregrh",
            Rule::L1clp { .. } => "l1clp",
            Rule::Lozanovsky { .. } => "lozanovsky",
            Rule::BtsbAxiom => "btsb-axiom",
            Rule::Themcr2 => "themcr2",
            Rule::Btsbge => "btsbge",
            Rule::Interp { .. } => "interp",
            Rule::Lebesgue { .. } => "lebesgue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub id: usize,
    pub rule: String,
    pub premises: Vec<usize>,
    pub fact: Fact,
}

/// Declarations, assumptions and the derived steps.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub ctx: Context,
    /// Polynomials assumed positive.
    pub assumptions: Vec<Poly>,
    /// Operators assumed `A_2`-nondegenerate.
    pub nondegenerate: BTreeSet<String>,
    pub steps: Vec<Step>,
}

fn rule_err(rule: &Rule, condition: impl Into<String>) -> Error {
    Error::Rule { rule: rule.name().to_string(), condition: condition.into() }
}

fn class_label(alpha: &Poly, beta: &Poly) -> String {
    match (alpha.as_constant(), beta.as_constant()) {
        (Some(a), Some(b)) if a.is_one() => format!("A_{}", fmt_rational(b + Rational64::one())),
        (Some(a), Some(b)) => format!("F({}, {})", fmt_rational(a), fmt_rational(b)),
        _ => format!("F({alpha}, {beta})"),
    }
}

fn fmt_term(t: &Term) -> String {
    match t {
        Term::Gen(g) => g.clone(),
        Term::Leb(None) => "L^{∞}".into(),
        Term::Leb(Some(t)) => format!("L^{{{}}}", fmt_rational(*t)),
        Term::Pow(inner, a) => {
            let base = match **inner {
                Term::Gen(_) | Term::Leb(None) => fmt_term(inner),
                _ => format!("({})", fmt_term(inner)),
            };
            match a.as_constant() {
                Some(c) => format!("{base}^{{{}}}", fmt_rational(c)),
                None => format!("{base}^{{{a}}}"),
            }
        }
        Term::Prod(fs) => fs.iter().map(fmt_term).collect::<Vec<_>>().join("·"),
        Term::Dual(inner) => match **inner {
            Term::Gen(_) => format!("{}′", fmt_term(inner)),
            _ => format!("({})′", fmt_term(inner)),
        },
    }
}

impl Fact {
    pub fn render(&self, ctx: &Context) -> String {
        match self {
            Fact::Regular(r) => {
                let mut s = format!("{} {}-regular", r.expr.display(ctx), class_label(&r.alpha, &r.beta));
                if !r.c.growth.is_zero() {
                    s.push_str(&format!(", C ≲ (s′)^{{{}}}", fmt_rational(r.c.growth)));
                }
                s
            }
            Fact::Bounded { op, expr, bound } => format!("‖{op}‖_{{{}}} ≤ {bound}", expr.display(ctx)),
            Fact::WeightClass { weight, alpha, beta, c } => format!(
                "{weight} ∈ {} with constant {c}",
                class_label(&Poly::constant(*alpha), &Poly::constant(*beta))
            ),
            Fact::Identity { lhs, rhs, normal } => {
                format!("{} = {} = {}", fmt_term(lhs), fmt_term(rhs), normal.display(ctx))
            }
            Fact::Value { name, value } => format!("{name} = {}", fmt_rational(*value)),
            Fact::Check { statement } => statement.clone(),
        }
    }
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, g: Generator) {
        self.ctx.declare(g);
    }

    pub fn assume(&mut self, p: Poly) {
        self.assumptions.push(p);
    }

    pub fn fact(&self, id: usize) -> Result<&Fact> {
        self.steps
            .iter()
            .find(|s| s.id == id)
            .map(|s| &s.fact)
            .ok_or_else(|| Error::Config(format!("no step #{id}")))
    }

    fn push(&mut self, rule: &str, premises: Vec<usize>, fact: Fact) -> usize {
        let id = self.steps.len() + 1;
        self.steps.push(Step { id, rule: rule.to_string(), premises, fact });
        id
    }

    fn fresh(&self, tag: &str) -> BoundExpr {
        BoundExpr::opaque(&format!("k_{tag}{}", self.steps.len() + 1))
    }

    fn positive(&self, p: &Poly) -> bool {
        prove_positive(p, &self.assumptions)
    }

    fn nonnegative(&self, p: &Poly) -> bool {
        p.is_zero() || self.positive(p) || p.nonnegative_coefficients()
    }

    /// Records a fact taken as given.
    pub fn axiom(&mut self, fact: Fact) -> Result<usize> {
        match &fact {
            Fact::Regular(r) => {
                self.ctx.check_declared(&r.expr)?;
                r.expr.check_form()?;
                if !self.nonnegative(&r.alpha) || !self.nonnegative(&r.beta) || (r.alpha.is_zero() && r.beta.is_zero()) {
                    return Err(Error::Form(format!("bad indices ({}, {})", r.alpha, r.beta)));
                }
            }
            Fact::Bounded { expr, .. } => {
                self.ctx.check_declared(expr)?;
                expr.check_form()?;
            }
            _ => {}
        }
        Ok(self.push("axiom", vec![], fact))
    }

    /// Records an exact value.
    pub fn value(&mut self, name: &str, value: Rational64) -> usize {
        self.push("value", vec![], Fact::Value { name: name.to_string(), value })
    }

    /// Records a verified statement; fails with `rule` if `holds` is false.
    pub fn check(&mut self, rule: &str, premises: Vec<usize>, statement: String, holds: bool) -> Result<usize> {
        if !holds {
            return Err(Error::Rule { rule: rule.to_string(), condition: statement });
        }
        Ok(self.push(rule, premises, Fact::Check { statement }))
    }

    /// Records `lhs = rhs` after checking both have the same normal form.
    pub fn identity(&mut self, lhs: Term, rhs: Term) -> Result<usize> {
        let a = super::expr::normalize(&lhs)?;
        let b = super::expr::normalize(&rhs)?;
        if a != b {
            return Err(Error::Rule {
                rule: "identity".into(),
                condition: format!("{} has normal form {a}, {} has {b}", fmt_term(&lhs), fmt_term(&rhs)),
            });
        }
        Ok(self.push("identity", vec![], Fact::Identity { lhs, rhs, normal: a }))
    }

    fn regular(&self, rule: &Rule, id: usize) -> Result<RegularityFact> {
        match self.fact(id)? {
            Fact::Regular(r) => Ok(r.clone()),
            _ => Err(rule_err(rule, format!("premise #{id} is not a regularity fact"))),
        }
    }

    fn bounded(&self, rule: &Rule, id: usize) -> Result<(String, LatticeExpr, BoundExpr)> {
        match self.fact(id)? {
            Fact::Bounded { op, expr, bound } => Ok((op.clone(), expr.clone(), bound.clone())),
            _ => Err(rule_err(rule, format!("premise #{id} is not a norm bound"))),
        }
    }

    fn arity(rule: &Rule, premises: &[usize], n: usize) -> Result<()> {
        if premises.len() != n {
            return Err(rule_err(rule, format!("expects {n} premises, got {}", premises.len())));
        }
        Ok(())
    }

    fn require(&self, rule: &Rule, ok: bool, condition: impl Into<String>) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(rule_err(rule, condition))
        }
    }

    fn require_attr(&self, rule: &Rule, e: &LatticeExpr, attr: Attr) -> Result<()> {
        let ok = e.has_attr(&self.ctx, attr);
        self.require(rule, ok, format!("{} lacks {attr:?}", e.display(&self.ctx)))
    }

    fn require_ap(&self, rule: &Rule, r: &RegularityFact) -> Result<Rational64> {
        let b = r.beta.as_constant();
        match (r.alpha.as_constant(), b) {
            (Some(a), Some(b)) if a.is_one() => Ok(b + Rational64::one()),
            _ => Err(rule_err(rule, format!("{} is not an A_p index pair", class_label(&r.alpha, &r.beta)))),
        }
    }

    /// Applies `rule` to prior steps; returns the ids of the new steps.
    pub fn apply(&mut self, rule: Rule, premises: &[usize]) -> Result<Vec<usize>> {
        let facts = self.derive(&rule, premises)?;
        Ok(facts.into_iter().map(|f| self.push(rule.name(), premises.to_vec(), f)).collect())
    }

    /// The conclusions of `rule` on `premises`, without recording them.
    pub fn derive(&self, rule: &Rule, premises: &[usize]) -> Result<Vec<Fact>> {
        let reg = |r: RegularityFact| Fact::Regular(r);
        match rule {
            Rule::Power { gamma } => {
                Self::arity(rule, premises, 1)?;
                self.require(rule, self.positive(gamma), format!("γ = {gamma} > 0"))?;
                match self.fact(premises[0])?.clone() {
                    Fact::Regular(r) => Ok(vec![reg(RegularityFact {
                        expr: r.expr.pow(gamma)?,
                        alpha: &r.alpha * gamma,
                        beta: &r.beta * gamma,
                        c: r.c,
                        m: r.m,
                    })]),
                    Fact::WeightClass { weight, alpha, beta, c } => {
                        let g = gamma.as_constant().ok_or_else(|| rule_err(rule, "symbolic γ on a weight"))?;
                        Ok(vec![Fact::WeightClass {
                            weight: format!("({weight})^{{{}}}", fmt_rational(g)),
                            alpha: alpha * g,
                            beta: beta * g,
                            c,
                        }])
                    }
                    _ => Err(rule_err(rule, "premise is neither a regularity nor a weight fact")),
                }
            }
            Rule::Product => {
                Self::arity(rule, premises, 2)?;
                match (self.fact(premises[0])?.clone(), self.fact(premises[1])?.clone()) {
                    (Fact::Regular(a), Fact::Regular(b)) => {
                        let c = match (a.alpha.as_constant(), b.alpha.as_constant(), a.beta.as_constant(), b.beta.as_constant()) {
                            (Some(a0), Some(a1), Some(b0), Some(b1)) => product_constant(a0, a1, b0, b1, &a.c, &b.c),
                            _ => None,
                        }
                        .unwrap_or_else(|| a.c.mul(&b.c).mul(&self.fresh("prod")));
                        Ok(vec![reg(RegularityFact {
                            expr: a.expr.mul(&b.expr),
                            alpha: &a.alpha + &b.alpha,
                            beta: &a.beta + &b.beta,
                            c,
                            m: a.m.mul(&b.m),
                        })])
                    }
                    (
                        Fact::WeightClass { weight: w0, alpha: a0, beta: b0, c: c0 },
                        Fact::WeightClass { weight: w1, alpha: a1, beta: b1, c: c1 },
                    ) => {
                        let c = product_constant(a0, a1, b0, b1, &c0, &c1)
                            .ok_or_else(|| rule_err(rule, "mixed α = 0 and α > 0 has no explicit constant"))?;
                        Ok(vec![Fact::WeightClass { weight: format!("{w0}·{w1}"), alpha: a0 + a1, beta: b0 + b1, c }])
                    }
                    _ => Err(rule_err(rule, "premises must both be regularity or both weight facts")),
                }
            }
            Rule::Max => {
                Self::arity(rule, premises, 2)?;
                match (self.fact(premises[0])?.clone(), self.fact(premises[1])?.clone()) {
                    (
                        Fact::WeightClass { weight: w0, alpha: a0, beta: b0, c: c0 },
                        Fact::WeightClass { weight: w1, alpha: a1, beta: b1, c: c1 },
                    ) => {
                        self.require(rule, a0 == a1 && b0 == b1, "premises share the class F(α, β)")?;
                        self.require(rule, c0 == c1, "premises share the constant C")?;
                        Ok(vec![Fact::WeightClass {
                            weight: format!("{w0}∨{w1}"),
                            alpha: a0,
                            beta: b0,
                            c: BoundExpr::number(2).mul(&c0),
                        }])
                    }
                    _ => Err(rule_err(rule, "premises must be weight facts")),
                }
            }
            Rule::Weaken { alpha, beta } => {
                Self::arity(rule, premises, 1)?;
                let r = self.regular(rule, premises[0])?;
                self.require(rule, self.nonnegative(&(alpha - &r.alpha)), format!("{alpha} >= {}", r.alpha))?;
                self.require(rule, self.nonnegative(&(beta - &r.beta)), format!("{beta} >= {}", r.beta))?;
                Ok(vec![reg(RegularityFact { alpha: alpha.clone(), beta: beta.clone(), ..r })])
            }
            Rule::Duality => {
                Self::arity(rule, premises, 1)?;
                let r = self.regular(rule, premises[0])?;
                let one = Poly::int(1);
                self.require(rule, self.positive(&(&r.alpha - &one)), format!("α = {} > 1", r.alpha))?;
                self.require(rule, self.positive(&r.beta), format!("β = {} > 0", r.beta))?;
                self.require_attr(rule, &r.expr, Attr::Fatou)?;
                self.require_attr(rule, &r.expr, Attr::Banach)?;
                let k = self.fresh("dual");
                Ok(vec![reg(RegularityFact {
                    expr: r.expr.dual(),
                    alpha: &r.beta + &one,
                    beta: &r.alpha - &one,
                    c: r.c.mul(&k),
                    m: r.m.mul(&k),
                })])
            }
            Rule::Divisibility => {
                Self::arity(rule, premises, 2)?;
                let xy = self.regular(rule, premises[0])?;
                let y = self.regular(rule, premises[1])?;
                let x = xy.expr.div(&y.expr).map_err(|e| rule_err(rule, e.to_string()))?;
                for e in [&x, &y.expr] {
                    self.require_attr(rule, e, Attr::Fatou)?;
                }
                let k = self.fresh("div");
                Ok(vec![reg(RegularityFact {
                    expr: x,
                    alpha: &xy.alpha + &y.beta,
                    beta: &xy.beta + &y.alpha,
                    c: xy.c.mul(&y.c).mul(&k),
                    m: xy.m.mul(&y.m).mul(&k),
                })])
            }
            Rule::Aptoconj => {
                Self::arity(rule, premises, 1)?;
                let z = self.regular(rule, premises[0])?;
                let p = self.require_ap(rule, &z)?;
                self.require(rule, p > Rational64::one(), "p > 1")?;
                let x = z.expr.dual();
                // Z = X′ is norming for X when X has the Fatou property
                self.require_attr(rule, &x, Attr::Fatou)?;
                let k = self.fresh("conj");
                Ok(vec![reg(RegularityFact {
                    expr: x.pow(&Poly::constant(p.recip()))?,
                    alpha: Poly::int(1),
                    beta: Poly::zero(),
                    c: z.c.mul(&k),
                    m: z.m.mul(&k),
                })])
            }
            Rule::A2rdiv => {
                Self::arity(rule, premises, 1)?;
                let z = self.regular(rule, premises[0])?;
                self.require(rule, self.require_ap(rule, &z)? == Rational64::from(2), "premise is A_2-regular")?;
                let half = Poly::constant(Rational64::new(1, 2));
                let k = self.fresh("rdiv");
                Ok(vec![reg(RegularityFact {
                    expr: z.expr.pow(&half)?.mul(&LatticeExpr::l1().pow(&half)?),
                    alpha: Poly::int(1),
                    beta: Poly::zero(),
                    c: z.c.mul(&k),
                    m: z.m.mul(&k),
                })])
            }
            Rule::A1apt => {
                Self::arity(rule, premises, 2)?;
                let x = self.regular(rule, premises[0])?;
                let xd = self.regular(rule, premises[1])?;
                self.require_ap(rule, &x)?;
                self.require(rule, self.require_ap(rule, &xd)?.is_one(), "second premise is A_1-regular")?;
                let delta = power_ratio(&xd.expr, &x.expr)
                    .ok_or_else(|| rule_err(rule, "second premise is not a power X^δ of the first"))?;
                self.require(rule, delta.is_positive(), "δ > 0")?;
                let k = self.fresh("apt");
                Ok(vec![reg(RegularityFact {
                    expr: x.expr,
                    alpha: Poly::int(1),
                    beta: Poly::zero(),
                    c: x.c.mul(&xd.c).mul(&k),
                    m: x.m.mul(&xd.m).mul(&k),
                })])
            }
            Rule::Ainfainf => {
                Self::arity(rule, premises, 2)?;
                let x = self.regular(rule, premises[0])?;
                let xd = self.regular(rule, premises[1])?;
                self.require_ap(rule, &x)?;
                self.require_ap(rule, &xd)?;
                self.require(rule, xd.expr == x.expr.dual(), "second premise is the dual of the first")?;
                self.require_attr(rule, &x.expr, Attr::Fatou)?;
                let k = self.fresh("inf");
                let a1 = |e: LatticeExpr, c: &BoundExpr, m: &BoundExpr| {
                    reg(RegularityFact { expr: e, alpha: Poly::int(1), beta: Poly::zero(), c: c.mul(&k), m: m.mul(&k) })
                };
                let c = x.c.mul(&xd.c);
                let m = x.m.mul(&xd.m);
                Ok(vec![a1(x.expr.clone(), &c, &m), a1(xd.expr, &c, &m)])
            }
            Rule::Aregrh { gamma } => {
                Self::arity(rule, premises, 1)?;
                let z = self.regular(rule, premises[0])?;
                self.require_ap(rule, &z)?;
                self.require(rule, self.positive(gamma), format!("γ = {gamma} > 0"))?;
                let check = threshold_check(&z.c).map_err(|c| rule_err(rule, c))?;
                let k = self.fresh("rh");
                Ok(vec![
                    Fact::Check { statement: check },
                    reg(RegularityFact {
                        expr: z.expr.pow(gamma)?,
                        alpha: z.alpha,
                        beta: z.beta,
                        c: z.c.frozen().mul(&k),
                        m: z.m.frozen().mul(&k),
                    }),
                ])
            }
            Rule::L1clp { theta } => {
                Self::arity(rule, premises, 1)?;
                let x = self.regular(rule, premises[0])?;
                self.require_ap(rule, &x)?;
                self.require(
                    rule,
                    theta.is_positive() && *theta <= Rational64::one(),
                    format!("θ = {} in (0, 1]", fmt_rational(*theta)),
                )?;
                let k = self.fresh("clp");
                let th = Poly::constant(*theta);
                let rest = Rational64::one() - theta;
                let mut expr = x.expr.pow(&th)?;
                if rest.is_positive() {
                    expr = expr.mul(&LatticeExpr::l1().pow(&Poly::constant(rest))?);
                }
                Ok(vec![reg(RegularityFact { expr, c: x.c.mul(&k), m: x.m.mul(&k), ..x })])
            }
            Rule::Lozanovsky { expr } => {
                Self::arity(rule, premises, 0)?;
                self.ctx.check_declared(expr)?;
                expr.check_form()?;
                let prod = expr.mul(&expr.dual());
                self.require(rule, prod == LatticeExpr::l1(), "E·E′ = L^{1}")?;
                Ok(vec![Fact::Check {
                    statement: format!(
                        "L^{{1}} = ({})·({})′",
                        expr.display(&self.ctx),
                        expr.display(&self.ctx)
                    ),
                }])
            }
            Rule::BtsbAxiom => {
                Self::arity(rule, premises, 1)?;
                let (op, e, b) = self.bounded(rule, premises[0])?;
                self.require(rule, self.nondegenerate.contains(&op), format!("{op} is A_2-nondegenerate"))?;
                let y = e.pow(&Poly::int(2))?;
                self.require_attr(rule, &y, Attr::OrderContinuous)?;
                Ok(vec![reg(RegularityFact {
                    expr: y.dual(),
                    alpha: Poly::int(1),
                    beta: Poly::int(1),
                    c: BoundExpr::opaque("c_btsb").mul(&b.pow(Rational64::from(2))),
                    m: BoundExpr::number(2),
                })])
            }
            Rule::Themcr2 => {
                Self::arity(rule, premises, 1)?;
                let (op, e, b) = self.bounded(rule, premises[0])?;
                self.require(rule, self.nondegenerate.contains(&op), format!("{op} is A_2-nondegenerate"))?;
                let conv = e.convexity(&self.ctx)?;
                self.require(rule, conv >= Rational64::from(2), format!("convexity {} >= 2", fmt_rational(conv)))?;
                self.require_attr(rule, &e, Attr::Fatou)?;
                self.require_attr(rule, &e, Attr::OrderContinuous)?;
                let k = self.fresh("mcr");
                let c = b.pow(Rational64::from(2)).mul(&k);
                let a1 = |x: LatticeExpr| {
                    reg(RegularityFact { expr: x, alpha: Poly::int(1), beta: Poly::zero(), c: c.clone(), m: k.clone() })
                };
                Ok(vec![a1(e.clone()), a1(e.dual())])
            }
            Rule::Btsbge => {
                Self::arity(rule, premises, 2)?;
                let (op, e, b) = self.bounded(rule, premises[0])?;
                let yd = self.regular(rule, premises[1])?;
                self.require(rule, self.nondegenerate.contains(&op), format!("{op} is A_2-nondegenerate"))?;
                let y = e.pow(&Poly::int(2))?;
                self.require(rule, yd.expr == y.dual(), "second premise concerns (first premise)^2 dualized")?;
                self.require(rule, self.positive(&yd.alpha), format!("α = {} > 0", yd.alpha))?;
                self.require(rule, yd.beta == Poly::int(1), "β = 1")?;
                self.require_attr(rule, &y, Attr::OrderContinuous)?;
                Ok(vec![reg(RegularityFact {
                    expr: yd.expr,
                    alpha: Poly::int(1),
                    beta: Poly::int(1),
                    c: BoundExpr::opaque("c3").mul(&b.pow(Rational64::from(2))),
                    m: BoundExpr::opaque("m3"),
                })])
            }
            Rule::Interp { theta } => {
                Self::arity(rule, premises, 2)?;
                let (op0, a, b0) = self.bounded(rule, premises[0])?;
                let (op1, b, b1) = self.bounded(rule, premises[1])?;
                self.require(rule, op0 == op1, "bounds concern one operator")?;
                self.require(
                    rule,
                    theta.is_positive() && *theta <= Rational64::one(),
                    format!("θ = {} in (0, 1]", fmt_rational(*theta)),
                )?;
                let rest = Rational64::one() - theta;
                let mut expr = a.pow(&Poly::constant(*theta))?;
                if rest.is_positive() {
                    expr = expr.mul(&b.pow(&Poly::constant(rest))?);
                }
                Ok(vec![Fact::Bounded {
                    op: op0,
                    expr,
                    bound: super::bound::interp_norm_bound(&b0, &b1, *theta),
                }])
            }
            Rule::Lebesgue { t } => {
                Self::arity(rule, premises, 0)?;
                self.require(rule, *t > Rational64::one(), format!("t = {} > 1", fmt_rational(*t)))?;
                Ok(vec![reg(RegularityFact {
                    expr: LatticeExpr::lebesgue(*t)?,
                    alpha: Poly::int(1),
                    beta: Poly::zero(),
                    c: BoundExpr::opaque("c_M"),
                    m: BoundExpr::number(2),
                })])
            }
        }
    }
}

/// `C0^θ C1^{1-θ}` with `θ = α0/(α0+α1)`, or `β0/(β0+β1)` when both `α` vanish.
fn product_constant(
    a0: Rational64,
    a1: Rational64,
    b0: Rational64,
    b1: Rational64,
    c0: &BoundExpr,
    c1: &BoundExpr,
) -> Option<BoundExpr> {
    let theta = if a0.is_positive() && a1.is_positive() {
        a0 / (a0 + a1)
    } else if a0.is_zero() && a1.is_zero() && (b0 + b1).is_positive() {
        b0 / (b0 + b1)
    } else {
        return None;
    };
    Some(super::bound::interp_norm_bound(c0, c1, theta))
}

/// `δ` with `a = b^δ`, if any.
fn power_ratio(a: &LatticeExpr, b: &LatticeExpr) -> Option<Rational64> {
    let g = b.generators().next()?;
    let d = a.exponent(g).as_constant()? / b.exponent(g).as_constant()?;
    match b.pow(&Poly::constant(d)) {
        Ok(x) if &x == a => Some(d),
        _ => None,
    }
}

/// The reverse Hölder threshold `ρ = 1 + 1/(c4 (s′)^e)` exceeds `s = s′/(s′-1)`
/// for large `s′` when the `A_2` constant grows like `(s′)^e`, `e < 1`.
fn threshold_check(c: &BoundExpr) -> std::result::Result<String, String> {
    let e = c.growth;
    let one = Rational64::one();
    let c4 = BoundExpr::opaque_growth("c4", Rational64::zero());
    let sp = |g: Rational64| BoundExpr { symbols: Default::default(), growth: g };
    let c4s = |g: Rational64| c4.mul(&sp(g));
    let numerator = vec![
        (one, c4s(e + one)),
        (-one, c4s(e)),
        (one, sp(one)),
        (-one, sp(Rational64::zero())),
    ];
    // ρ/s - 1 = (numerator - c4 (s′)^{e+1}) / (c4 (s′)^{e+1})
    let diff = vec![(one, sp(one)), (-one, sp(Rational64::zero())), (-one, c4s(e))];
    let statement = format!(
        "ρ/s = ({})/({}) > 1 ⇔ s′ - 1 > {}: growth {} < 1, holds for large s′",
        fmt_sum(&numerator),
        c4s(e + one),
        c4s(e),
        fmt_rational(e)
    );
    if e < one && eventually_positive(&diff) {
        Ok(statement)
    } else {
        Err(format!("growth exponent {} of the A_2 constant is not < 1", fmt_rational(e)))
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} [{}]", self.id, self.rule)
    }
}
