//! Built-in derivations replayed rule by rule.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::bound::BoundExpr;
use super::engine::{Engine, Fact, RegularityFact, Rule};
use super::expr::{Attr, Generator, LatticeExpr, Term};
use super::poly::{fmt_rational, Poly};
use crate::error::{Error, Result};

pub const SCRIPTS: [&str; 3] = ["themcr2", "frdiv-from-duality", "main-chain"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub id: usize,
    pub rule: String,
    pub premises: Vec<usize>,
    pub text: String,
    pub fact: Fact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub script: String,
    pub steps: Vec<TraceStep>,
    /// Exact values of the exponents the script fixes.
    pub values: BTreeMap<String, Rational64>,
    pub final_facts: Vec<String>,
    pub ok: bool,
    pub failure: Option<String>,
}

impl DerivationTrace {
    /// JSON view: step texts and rationals as strings (`"3/2"`), no raw facts.
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| serde_json::json!({"id": s.id, "rule": s.rule, "premises": s.premises, "text": s.text}))
            .collect();
        let values: serde_json::Map<String, serde_json::Value> =
            self.values.iter().map(|(k, v)| (k.clone(), fmt_rational(*v).into())).collect();
        serde_json::json!({
            "script": self.script,
            "ok": self.ok,
            "failure": self.failure,
            "values": values,
            "final_facts": self.final_facts,
            "steps": steps,
        })
    }

    pub fn last_text(&self) -> Option<&str> {
        self.steps.last().map(|s| s.text.as_str())
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let from = if s.premises.is_empty() {
                String::new()
            } else {
                let ids: Vec<String> = s.premises.iter().map(|i| format!("#{i}")).collect();
                format!(" from {}", ids.join(", "))
            };
            writeln!(f, "#{}: {}  [rule {}{}]", s.id, s.text, s.rule, from)?;
        }
        if let Some(err) = &self.failure {
            writeln!(f, "FAILED: {err}")?;
        }
        Ok(())
    }
}

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn c(x: Rational64) -> Poly {
    Poly::constant(x)
}

fn v(name: &str) -> Poly {
    Poly::var(name)
}

fn conj(x: Rational64) -> Rational64 {
    x / (x - Rational64::one())
}

/// Replays a built-in script. `p` is the convexity exponent of `main-chain`.
pub fn replay(script: &str, p: Rational64) -> Result<DerivationTrace> {
    let mut engine = Engine::new();
    let mut values = BTreeMap::new();
    let run = match script {
        "themcr2" => themcr2(&mut engine),
        "frdiv-from-duality" => frdiv_from_duality(&mut engine),
        "main-chain" => {
            if !(p > Rational64::one() && p < Rational64::from(3)) {
                return Err(Error::Config(format!("main-chain needs 1 < p < 3, got {}", fmt_rational(p))));
            }
            main_chain(&mut engine, p, &mut values)
        }
        other => {
            return Err(Error::Config(format!("unknown script {other}; known: {}", SCRIPTS.join(", "))))
        }
    };
    let steps: Vec<TraceStep> = engine
        .steps
        .iter()
        .map(|s| TraceStep {
            id: s.id,
            rule: s.rule.clone(),
            premises: s.premises.clone(),
            text: s.fact.render(&engine.ctx),
            fact: s.fact.clone(),
        })
        .collect();
    let (final_ids, failure) = match run {
        Ok(ids) => (ids, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    let final_facts = final_ids
        .iter()
        .filter_map(|id| steps.iter().find(|s| s.id == *id).map(|s| s.text.clone()))
        .collect();
    Ok(DerivationTrace {
        script: script.to_string(),
        steps,
        values,
        final_facts,
        ok: failure.is_none(),
        failure,
    })
}

fn regular(expr: LatticeExpr, alpha: Poly, beta: Poly, c: &str, m: &str) -> Fact {
    Fact::Regular(RegularityFact { expr, alpha, beta, c: BoundExpr::opaque(c), m: BoundExpr::opaque(m) })
}

fn expect(engine: &Engine, ids: &[usize], expected: &[&str]) -> Result<()> {
    for (id, want) in ids.iter().zip(expected) {
        let got = engine.fact(*id)?.render(&engine.ctx);
        if got != *want {
            return Err(Error::Check(format!("step #{id} concluded \"{got}\", expected \"{want}\"")));
        }
    }
    Ok(())
}

/// `M` bounded on `X` and `X′` from the boundedness of a nondegenerate `T` on a
/// 2-convex `X`.
fn themcr2(e: &mut Engine) -> Result<Vec<usize>> {
    e.declare(
        Generator::new("X")
            .with_convexity(q(2, 1), q(4, 1))?
            .with(Attr::Fatou)
            .with(Attr::OrderContinuous)
            .with(Attr::Banach),
    );
    e.nondegenerate.insert("T".into());
    let x = LatticeExpr::gen("X");
    let y = x.pow(&Poly::int(2))?;
    e.ctx.alias("Y", y);
    let b = e.axiom(Fact::Bounded { op: "T".into(), expr: x, bound: BoundExpr::opaque("c") })?;
    e.identity(Term::gen("X"), Term::gen("X").pow(2).pow(c(q(1, 2))))?;
    let y_dual = e.apply(Rule::BtsbAxiom, &[b])?[0];
    let x_a1 = e.apply(Rule::Aptoconj, &[y_dual])?[0];
    let xd_a1 = e.apply(Rule::A2rdiv, &[y_dual])?[0];
    let finals = vec![x_a1, xd_a1];
    expect(e, &finals, &["X A_1-regular", "X′ A_1-regular"])?;
    Ok(finals)
}

/// Divisibility from duality for r-convex lattices, with symbolic indices.
fn frdiv_from_duality(e: &mut Engine) -> Result<Vec<usize>> {
    for g in ["X", "Y"] {
        e.declare(Generator::new(g).with(Attr::Fatou).with(Attr::Banach));
    }
    let (a1, b1, a0, b0, r) = (v("a1"), v("b1"), v("a0"), v("b0"), v("r"));
    let one = Poly::int(1);
    e.assume(r.clone());
    e.assume(&(&a0 * &r) - &one);
    e.assume(&(&(&a1 + &b0) * &r) - &one);
    e.assume(&b0 * &r);
    let x = LatticeExpr::gen("X");
    let y = LatticeExpr::gen("Y");
    let xy = e.axiom(regular(x.mul(&y), a1.clone(), b1.clone(), "C1", "m1"))?;
    let yf = e.axiom(regular(y.clone(), a0.clone(), b0.clone(), "C0", "m0"))?;
    let half = c(q(1, 2));
    let s3 = e.apply(Rule::Power { gamma: &r * &half }, &[xy])?[0];
    let s4 = e.apply(Rule::Power { gamma: r.clone() }, &[yf])?[0];
    let s5 = e.apply(Rule::Duality, &[s4])?[0];
    let s6 = e.apply(Rule::Power { gamma: half.clone() }, &[s5])?[0];
    e.apply(Rule::Lozanovsky { expr: y.pow(&r)? }, &[])?;
    let s8 = e.apply(Rule::Product, &[s3, s6])?[0];
    let s9 = e.apply(Rule::Duality, &[s8])?[0];
    let s10 = e.apply(Rule::Power { gamma: Poly::int(2) }, &[s9])?[0];
    let s11 = e.apply(Rule::Duality, &[s10])?[0];
    let s12 = e.apply(Rule::Power { gamma: r.inverse().unwrap() }, &[s11])?[0];
    match e.fact(s12)? {
        Fact::Regular(f) if f.expr == x && f.alpha == &a1 + &b0 && f.beta == &b1 + &a0 => Ok(vec![s12]),
        other => Err(Error::Check(format!("unexpected conclusion {}", other.render(&e.ctx)))),
    }
}

/// Exponent bookkeeping of the main chain: `2 <= t(3-p)/4 <= u <= t(3-p)/2 <= t`
/// at 16 rationals `s` in `(1, p_Y]`.
pub fn index_bounds_hold(p: Rational64) -> (bool, Vec<Rational64>) {
    let r = (Rational64::one() + p) / 2;
    let p_y = Rational64::from(4) * p / (Rational64::from(3) * p + 1);
    let t = conj(p_y);
    let lo = t * (Rational64::from(3) - p) / 4;
    let hi = t * (Rational64::from(3) - p) / 2;
    let mut us = Vec::new();
    let mut ok = Rational64::from(2) <= lo && hi <= t;
    for k in 1..=16 {
        let s = Rational64::one() + (p_y - Rational64::one()) * Rational64::new(k, 16);
        let inv_sp = Rational64::one() - s.recip();
        let u = (Rational64::from(2) - r) / (inv_sp + t.recip());
        ok &= lo <= u && u <= hi;
        us.push(u);
    }
    (ok, us)
}

/// Boundedness of `T` on a p-convex `X` gives `A_2`-regularity of `X′`.
fn main_chain(e: &mut Engine, p: Rational64, values: &mut BTreeMap<String, Rational64>) -> Result<Vec<usize>> {
    let one = Rational64::one();
    let two = Rational64::from(2);
    let r = (one + p) / 2;
    let p_y = Rational64::from(4) * p / (Rational64::from(3) * p + 1);
    let t = conj(p_y);
    let s = p_y;
    let s_prime = conj(s);
    let u = (two - r) / (s_prime.recip() + t.recip());
    let lt_index = (two - r) * s_prime;
    for (name, val) in [("p", p), ("r", r), ("p_Y", p_y), ("t", t), ("s", s), ("s′", s_prime), ("u", u)] {
        values.insert(name.to_string(), val);
        e.value(name, val);
    }
    let (ok, _) = index_bounds_hold(p);
    e.check(
        "check",
        vec![],
        "2 ≤ t(3-p)/4 ≤ u(s) ≤ t(3-p)/2 ≤ t at 16 rationals s in (1, p_Y]".into(),
        ok,
    )?;

    e.declare(
        Generator::new("X")
            .with_convexity(p, two * p)?
            .with(Attr::Fatou)
            .with(Attr::OrderContinuous)
            .with(Attr::Banach),
    );
    e.nondegenerate.insert("T".into());
    let x = LatticeExpr::gen("X");
    let l = |t: Rational64| LatticeExpr::lebesgue(t);
    let y = x.pow(&c(r))?.mul(&l(s_prime)?);
    let w = y.pow(&c(q(1, 2)))?.mul(&l(t)?.pow(&c(q(1, 2)))?);
    e.ctx.alias("Y", y.clone());
    e.ctx.alias("W", w.clone());

    let tx = e.axiom(Fact::Bounded { op: "T".into(), expr: x.clone(), bound: BoundExpr::opaque("c") })?;
    let tl = e.axiom(Fact::Bounded {
        op: "T".into(),
        expr: l(lt_index)?,
        bound: BoundExpr::opaque_growth("c", one),
    })?;
    e.identity(
        Term::Prod(vec![Term::gen("X").pow(c(r)), Term::leb(s_prime)]),
        Term::Prod(vec![Term::gen("X").pow(c(r * s)).pow(c(s.recip())), Term::leb(one).pow(c(one - s.recip()))]),
    )?;
    let y_half = Term::Prod(vec![Term::gen("X").pow(c(r)), Term::leb(s_prime)]).pow(c(q(1, 2)));
    e.identity(
        y_half,
        Term::Prod(vec![Term::gen("X").pow(c(r / 2)), Term::leb(lt_index).pow(c(one - r / 2))]),
    )?;
    let t_y = e.apply(Rule::Interp { theta: r / 2 }, &[tx, tl])?[0];
    let conv_y = y.convexity(&e.ctx)?;
    e.check(
        "check",
        vec![],
        format!("convexity(Y) = {} = p_Y", fmt_rational(conv_y)),
        conv_y == p_y,
    )?;
    let tu = e.axiom(Fact::Bounded { op: "T".into(), expr: l(u)?, bound: BoundExpr::opaque("c_u") })?;
    let t_w = e.apply(Rule::Interp { theta: r / 2 }, &[tx, tu])?[0];
    e.identity(
        Term::Prod(vec![
            Term::Prod(vec![Term::gen("X").pow(c(r)), Term::leb(s_prime)]).pow(c(q(1, 2))),
            Term::leb(t).pow(c(q(1, 2))),
        ]),
        Term::Prod(vec![Term::gen("X").pow(c(r / 2)), Term::leb(u).pow(c(one - r / 2))]),
    )?;
    let conv_w = w.convexity(&e.ctx)?;
    e.check("check", vec![], format!("convexity(W) = {}", fmt_rational(conv_w)), conv_w == two)?;
    let mcr = e.apply(Rule::Themcr2, &[t_w])?;
    let w_dual = mcr[1];
    let sq = e.apply(Rule::Power { gamma: Poly::int(2) }, &[w_dual])?[0];
    let lt = e.apply(Rule::Lebesgue { t: conj(t) }, &[])?[0];
    let f21 = e.apply(Rule::Divisibility, &[sq, lt])?[0];
    let a2 = e.apply(Rule::Btsbge, &[t_y, f21])?[0];
    let growth = match e.fact(a2)? {
        Fact::Regular(f) => f.c.growth,
        _ => Rational64::zero(),
    };
    e.check(
        "check",
        vec![a2],
        format!("growth exponent {} = 2 - r < 1", fmt_rational(growth)),
        growth == two - r && growth < one,
    )?;
    let rh = e.apply(Rule::Aregrh { gamma: c(s) }, &[a2])?;
    let last = e.apply(Rule::L1clp { theta: (r * s).recip() }, &[rh[1]])?[0];
    expect(e, &[last], &["X′ A_2-regular"])?;
    Ok(vec![last])
}
