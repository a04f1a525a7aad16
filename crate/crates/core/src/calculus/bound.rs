//! Constants tracked as opaque monomials `c_1^{k_1} ... c_n^{k_n} · (s′)^e`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::fmt_rational;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundExpr {
    /// Opaque positive constants with rational powers.
    pub symbols: BTreeMap<String, Rational64>,
    /// Growth exponent in `s′`.
    pub growth: Rational64,
}

impl BoundExpr {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn opaque(name: &str) -> Self {
        Self::opaque_growth(name, Rational64::zero())
    }

    pub fn opaque_growth(name: &str, growth: Rational64) -> Self {
        let mut symbols = BTreeMap::new();
        symbols.insert(name.to_string(), Rational64::one());
        Self { symbols, growth }
    }

    pub fn number(c: i64) -> Self {
        Self::opaque(&c.to_string())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut symbols = self.symbols.clone();
        for (k, e) in &o.symbols {
            let v = *symbols.get(k).unwrap_or(&Rational64::zero()) + e;
            if v.is_zero() {
                symbols.remove(k);
            } else {
                symbols.insert(k.clone(), v);
            }
        }
        Self { symbols, growth: self.growth + o.growth }
    }

    pub fn pow(&self, a: Rational64) -> Self {
        if a.is_zero() {
            return Self::one();
        }
        Self {
            symbols: self.symbols.iter().map(|(k, e)| (k.clone(), e * a)).collect(),
            growth: self.growth * a,
        }
    }

    /// Drops the `s′` dependence once `s` is fixed.
    pub fn frozen(&self) -> Self {
        Self { symbols: self.symbols.clone(), growth: Rational64::zero() }
    }

    /// Numeric value; numeric symbol names evaluate to themselves.
    pub fn eval(&self, values: &HashMap<String, f64>, s_prime: f64) -> Option<f64> {
        let mut v = s_prime.powf(self.growth.to_f64()?);
        for (k, e) in &self.symbols {
            let base = match values.get(k) {
                Some(x) => *x,
                None => k.parse::<f64>().ok()?,
            };
            v *= base.powf(e.to_f64()?);
        }
        Some(v)
    }
}

/// `b1^θ b2^{1-θ}`: the interpolation estimate for norms.
pub fn interp_norm_bound(b1: &BoundExpr, b2: &BoundExpr, theta: Rational64) -> BoundExpr {
    b1.pow(theta).mul(&b2.pow(Rational64::one() - theta))
}

/// Whether `sum_k sign_k · b_k` is positive for all large `s′`: the terms of
/// largest growth must all be positive.
pub fn eventually_positive(terms: &[(Rational64, BoundExpr)]) -> bool {
    let live: Vec<&(Rational64, BoundExpr)> = terms.iter().filter(|(c, _)| !c.is_zero()).collect();
    let Some(top) = live.iter().map(|(_, b)| b.growth).max() else {
        return false;
    };
    live.iter().filter(|(_, b)| b.growth == top).all(|(c, _)| c.is_positive())
}

/// Renders `sum_k sign_k · b_k`.
pub fn fmt_sum(terms: &[(Rational64, BoundExpr)]) -> String {
    let mut out = String::new();
    for (i, (c, b)) in terms.iter().enumerate() {
        let body = if c.abs().is_one() {
            b.to_string()
        } else if b == &BoundExpr::one() {
            fmt_rational(c.abs())
        } else {
            format!("{}·{}", fmt_rational(c.abs()), b)
        };
        match (i, c.is_negative()) {
            (0, true) => out.push_str(&format!("-{body}")),
            (0, false) => out.push_str(&body),
            (_, true) => out.push_str(&format!(" - {body}")),
            (_, false) => out.push_str(&format!(" + {body}")),
        }
    }
    out
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .symbols
            .iter()
            .map(|(k, e)| if e.is_one() { k.clone() } else { format!("{k}^{{{}}}", fmt_rational(*e)) })
            .collect();
        if !self.growth.is_zero() {
            parts.push(if self.growth.is_one() {
                "s′".to_string()
            } else {
                format!("(s′)^{{{}}}", fmt_rational(self.growth))
            });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::rat;
    use super::*;

    #[test]
    fn interpolation_growth() {
        let c = BoundExpr::opaque("c");
        let lt = BoundExpr::opaque_growth("c", rat(1, 1));
        let b = interp_norm_bound(&c, &lt, rat(3, 4));
        assert_eq!(b.growth, rat(1, 4));
        assert_eq!(b.to_string(), "c·(s′)^{1/4}");
        assert_eq!(interp_norm_bound(&lt, &c, rat(1, 1)), lt);
        let l2 = BoundExpr::opaque_growth("d", rat(1, 1));
        assert_eq!(interp_norm_bound(&lt, &l2, rat(1, 2)).growth, rat(1, 1));
    }

    #[test]
    fn eval_and_display() {
        let b = BoundExpr::number(2).mul(&BoundExpr::opaque("C").pow(rat(1, 2)));
        let mut v = HashMap::new();
        v.insert("C".to_string(), 9.0);
        assert!((b.eval(&v, 1.0).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(b.to_string(), "2·C^{1/2}");
        assert_eq!(BoundExpr::one().to_string(), "1");
        assert!(BoundExpr::opaque("k").eval(&v, 1.0).is_none());
    }

    #[test]
    fn eventual_sign() {
        let sp = |e: Rational64| BoundExpr { symbols: BTreeMap::new(), growth: e };
        let c4 = |e| BoundExpr::opaque_growth("c4", e);
        let ok = [(rat(1, 1), sp(rat(1, 1))), (rat(-1, 1), sp(rat(0, 1))), (rat(-1, 1), c4(rat(1, 2)))];
        assert!(eventually_positive(&ok));
        let bad = [(rat(1, 1), sp(rat(1, 1))), (rat(-1, 1), c4(rat(1, 1)))];
        assert!(!eventually_positive(&bad));
        assert!(!eventually_positive(&[]));
        assert_eq!(fmt_sum(&ok), "s′ - 1 - c4·(s′)^{1/2}");
    }
}
