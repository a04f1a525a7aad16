//! Weights on a grid and their scalar constants.
//!
//! Every constant is a maximum over fibers and over grid intervals; the
//! fiber list plays the role of the essential supremum over the parameter
//! space.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Interval, PrefixSums};
use crate::operators::maximal::maximal_unchecked;

/// Strictly positive samples on a shared grid, one vector per fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    grid: Grid,
    fibers: Vec<Vec<f64>>,
}

impl Weight {
    pub fn new(grid: Grid, fibers: Vec<Vec<f64>>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::Invariant("a weight needs at least one fiber".into()));
        }
        for (k, fib) in fibers.iter().enumerate() {
            if fib.len() != grid.cells() {
                return Err(Error::Invariant(format!(
                    "fiber {k} has {} samples, grid has {} cells",
                    fib.len(),
                    grid.cells()
                )));
            }
            if let Some(i) = fib.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Invariant(format!(
                    "fiber {k} sample {i} = {} is not positive and finite",
                    fib[i]
                )));
            }
        }
        Ok(Self { grid, fibers })
    }

    pub fn single(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        Self::new(grid, vec![samples])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::single(grid, grid.midpoints().into_iter().map(f).collect())
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::from_fn(grid, |_| c)
    }

    /// `|x|^a` sampled at cell midpoints (never zero on an even grid).
    pub fn power(grid: Grid, a: f64) -> Result<Self> {
        Self::from_fn(grid, |x| x.abs().powf(a))
    }

    /// `1` on `[-L, 0)`, `k` on `[0, L]`.
    pub fn step(grid: Grid, k: f64) -> Result<Self> {
        Self::from_fn(grid, |x| if x < 0.0 { 1.0 } else { k })
    }

    /// Builds a weight from the textual spec language:
    /// `const:c=<v>`, `power:a=<v>`, `step:K=<v>` or `csv:<path>`.
    pub fn from_spec(spec: &str, grid: Grid) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in weight spec {spec:?}")))?;
        let param = |key: &str| -> Result<f64> {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected {key}=<value> in {spec:?}")))?;
            if k.trim() != key {
                return Err(Error::Parse(format!("expected parameter {key}, found {k:?}")));
            }
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {v:?}: {e}")))
        };
        let w = match kind.trim() {
            "const" => Self::constant(grid, param("c")?),
            "power" => Self::power(grid, param("a")?),
            "step" => Self::step(grid, param("K")?),
            "csv" => Self::from_csv(Path::new(rest.trim()), grid),
            other => Err(Error::Parse(format!("unknown weight kind {other:?}"))),
        };
        w.map_err(|e| match e {
            Error::Invariant(m) => Error::Domain(format!("{spec}: {m}")),
            e => e,
        })
    }

    /// One column per fiber, `N` rows; a non-numeric first row is treated as a header.
    pub fn from_csv(path: &Path, grid: Grid) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (r, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|s| s.parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push(v),
                Err(_) if r == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("row {r}: {e}"))),
            }
        }
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse("csv rows must share a nonzero column count".into()));
        }
        let fibers = (0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
        Self::new(grid, fibers)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fibers(&self) -> &[Vec<f64>] {
        &self.fibers
    }

    pub fn fiber(&self, k: usize) -> &[f64] {
        &self.fibers[k]
    }

    pub fn fiber_count(&self) -> usize {
        self.fibers.len()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let fibers = self.fibers.iter().map(|fib| fib.iter().map(|&v| f(v)).collect()).collect();
        Self::new(self.grid, fibers)
    }

    pub fn powf(&self, gamma: f64) -> Result<Self> {
        self.map(|v| v.powf(gamma))
    }

    pub fn recip(&self) -> Result<Self> {
        self.map(|v| 1.0 / v)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    fn zip_with(&self, other: &Weight, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid || self.fibers.len() != other.fibers.len() {
            return Err(Error::Invariant("weights live on different grids or fiber counts".into()));
        }
        let fibers = self
            .fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Self::new(self.grid, fibers)
    }

    pub fn max_with(&self, other: &Weight) -> Result<Self> {
        self.zip_with(other, f64::max)
    }

    pub fn min_with(&self, other: &Weight) -> Result<Self> {
        self.zip_with(other, f64::min)
    }

    pub fn mul(&self, other: &Weight) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self^theta * other^(1 - theta)`.
    pub fn geometric_mix(&self, other: &Weight, theta: f64) -> Result<Self> {
        self.zip_with(other, |a, b| a.powf(theta) * b.powf(1.0 - theta))
    }
}

/// Maximum of `value(a, b)` over all intervals `[a, b)` of `n` cells.
pub(crate) fn sweep_max<F>(n: usize, value: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut best = f64::NEG_INFINITY;
            for b in a + 1..=n {
                let v = value(a, b);
                if v > best {
                    best = v;
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

fn max_over_fibers(w: &Weight, f: impl Fn(&[f64]) -> f64) -> f64 {
    w.fibers().iter().map(|fib| f(fib)).fold(f64::NEG_INFINITY, f64::max)
}

/// Muckenhoupt constant `[w]_{A_p}`.
///
/// For `p > 1` this is the max over fibers and all intervals of
/// `(avg w)(avg w^{-1/(p-1)})^{p-1}`; for `p = 1` it is `max Mw / w`.
pub fn ap_constant(w: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("A_p needs p >= 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(a1_constant(w));
    }
    let q = p - 1.0;
    let expo = -1.0 / q;
    Ok(max_over_fibers(w, |fib| {
        let pw = PrefixSums::new(fib);
        let ps = PrefixSums::from_fn(fib.len(), |i| fib[i].powf(expo));
        if q == 1.0 {
            sweep_max(fib.len(), |a, b| pw.mean_range(a, b) * ps.mean_range(a, b))
        } else {
            sweep_max(fib.len(), |a, b| pw.mean_range(a, b) * ps.mean_range(a, b).powf(q))
        }
    }))
}

/// `max Mw / w` over fibers and cells: the smallest `C` with `Mw <= C w`.
pub fn a1_constant(w: &Weight) -> f64 {
    max_over_fibers(w, |fib| {
        let m = maximal_unchecked(fib);
        m.iter().zip(fib).map(|(a, b)| a / b).fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Balls used by the Fujii–Wilson sweep: lengths on a geometric ladder of
/// ratio `2^{1/4}`, starts on a stride of a quarter length, and the whole domain.
pub fn fujii_wilson_balls(n: usize) -> Vec<Interval> {
    let mut lengths: Vec<usize> = (0..)
        .map(|j| 2f64.powf(j as f64 / 4.0).round() as usize)
        .take_while(|&l| l <= n)
        .collect();
    lengths.push(n);
    lengths.dedup();
    let mut balls = Vec::new();
    for len in lengths {
        let stride = (len / 4).max(1);
        let mut start = 0;
        while start + len <= n {
            balls.push(Interval::new(start, len));
            start += stride;
        }
        if !(n - len).is_multiple_of(stride) {
            balls.push(Interval::new(n - len, len));
        }
    }
    balls
}

fn fw_ratio(fib: &[f64], ball: Interval) -> f64 {
    let local = &fib[ball.start..ball.end()];
    let m = maximal_unchecked(local);
    m.iter().sum::<f64>() / local.iter().sum::<f64>()
}

/// Fujii–Wilson constant `max_B int_B M[chi_B w] / int_B w` over
/// [`fujii_wilson_balls`].
pub fn fujii_wilson(w: &Weight) -> f64 {
    let balls = fujii_wilson_balls(w.grid().cells());
    max_over_fibers(w, |fib| {
        balls.par_iter().map(|&b| fw_ratio(fib, b)).reduce(|| f64::NEG_INFINITY, f64::max)
    })
}

/// Same ratio maximized over every interval; `O(N^4)`, for small grids.
pub fn fujii_wilson_exhaustive(w: &Weight) -> f64 {
    let n = w.grid().cells();
    max_over_fibers(w, |fib| {
        sweep_max(n, |a, b| fw_ratio(fib, Interval::new(a, b - a)))
    })
}

/// `max w(2B) / w(B)` with `2B` the concentric double truncated to the domain.
pub fn doubling_constant(w: &Weight) -> f64 {
    let n = w.grid().cells();
    max_over_fibers(w, |fib| {
        let ps = PrefixSums::new(fib);
        sweep_max(n, |a, b| {
            let iv = Interval::new(a, b - a);
            ps.sum(iv.doubled(n)) / ps.sum(iv)
        })
    })
}

/// Reverse Hölder ratio `max (avg w^r)^{1/r} / avg w`.
pub fn reverse_holder(w: &Weight, r: f64) -> Result<f64> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Domain(format!("reverse Hölder needs r > 1, got {r}")));
    }
    let n = w.grid().cells();
    let value = max_over_fibers(w, |fib| {
        let top = fib.iter().cloned().fold(0.0, f64::max);
        let pw = PrefixSums::new(fib);
        let pr = PrefixSums::from_fn(n, |i| (fib[i] / top).powf(r));
        sweep_max(n, |a, b| top * pr.mean_range(a, b).powf(1.0 / r) / pw.mean_range(a, b))
    });
    if !value.is_finite() {
        return Err(Error::Unbounded(format!("reverse Hölder ratio at r = {r}")));
    }
    Ok(value)
}

pub const RH_TOLERANCE: f64 = 1e-4;
const RH_MAX_EXPONENT: f64 = 1024.0;

/// Largest `r` (to [`RH_TOLERANCE`]) with `reverse_holder(w, r) <= cap`.
pub fn rh_exponent(w: &Weight, cap: f64) -> Result<f64> {
    if !(cap > 1.0) {
        return Err(Error::Domain(format!("reverse Hölder cap must exceed 1, got {cap}")));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while reverse_holder(w, hi)? <= cap {
        lo = hi;
        hi *= 2.0;
        if hi > RH_MAX_EXPONENT {
            return Err(Error::Unbounded(format!(
                "reverse Hölder ratio stays below {cap} up to r = {RH_MAX_EXPONENT}"
            )));
        }
    }
    while hi - lo > RH_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if reverse_holder(w, mid)? <= cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Constant of the factorizable class `F(alpha, beta)`, computed through
/// `w in F(a, b)  <=>  w^{1/a} in A_{b/a + 1}` (and `w^{-1/b} in A_1` when `a = 0`).
pub fn f_class_constant(w: &Weight, alpha: Rational64, beta: Rational64) -> Result<f64> {
    if alpha < Rational64::zero() || beta < Rational64::zero() {
        return Err(Error::Domain("F(alpha, beta) indices must be nonnegative".into()));
    }
    let a = alpha.to_f64().unwrap();
    let b = beta.to_f64().unwrap();
    if alpha.is_zero() {
        if beta.is_zero() {
            return Err(Error::Domain("F(0, 0) is not a weight class".into()));
        }
        return ap_constant(&w.powf(-1.0 / b)?, 1.0);
    }
    ap_constant(&w.powf(1.0 / a)?, (beta / alpha).to_f64().unwrap() + 1.0)
}

/// Bundle of the scalar constants of one weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub ap: BTreeMap<String, f64>,
    pub a1: f64,
    pub fujii_wilson: f64,
    pub doubling: f64,
    pub doubling_inverse: f64,
    pub rh: BTreeMap<String, f64>,
    pub rh_exponent: Option<f64>,
}

impl ConstantsReport {
    pub fn compute(w: &Weight, ps: &[f64], rs: &[f64], rh_cap: f64) -> Result<Self> {
        let mut ap = BTreeMap::new();
        for &p in ps {
            ap.insert(format_key(p), ap_constant(w, p)?);
        }
        let mut rh = BTreeMap::new();
        for &r in rs {
            rh.insert(format_key(r), reverse_holder(w, r)?);
        }
        let rh_exponent = match rh_exponent(w, rh_cap) {
            Ok(v) => Some(v),
            Err(Error::Unbounded(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            ap,
            a1: a1_constant(w),
            fujii_wilson: fujii_wilson(w),
            doubling: doubling_constant(w),
            doubling_inverse: doubling_constant(&w.recip()?),
            rh,
            rh_exponent,
        })
    }

    /// Flat JSON object: `ap_<p>`, `a1`, `fw`, `doubling`, `doubling_inv`,
    /// `rh_<r>`, `rh_exp` (`null` when unbounded).
    pub fn to_flat_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (p, v) in &self.ap {
            map.insert(format!("ap_{p}"), (*v).into());
        }
        map.insert("a1".into(), self.a1.into());
        map.insert("fw".into(), self.fujii_wilson.into());
        map.insert("doubling".into(), self.doubling.into());
        map.insert("doubling_inv".into(), self.doubling_inverse.into());
        for (r, v) in &self.rh {
            map.insert(format!("rh_{r}"), (*v).into());
        }
        map.insert(
            "rh_exp".into(),
            self.rh_exponent.map_or(serde_json::Value::Null, Into::into),
        );
        serde_json::Value::Object(map)
    }
}

/// `2.0 -> "2"`, `1.5 -> "1.5"`.
pub fn format_key(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: u32) -> Grid {
        Grid::new(1.0, k).unwrap()
    }

    #[test]
    fn weight_rejects_nonpositive() {
        let g = grid(3);
        assert!(matches!(Weight::single(g, vec![1.0; 7]), Err(Error::Invariant(_))));
        let mut v = vec![1.0; 8];
        v[3] = 0.0;
        assert!(matches!(Weight::single(g, v), Err(Error::Invariant(_))));
        assert!(Weight::new(g, vec![]).is_err());
    }

    #[test]
    fn spec_strings() {
        let g = grid(4);
        assert_eq!(Weight::from_spec("const:c=2", g).unwrap().fiber(0), &[2.0; 16][..]);
        let s = Weight::from_spec("step:K=4", g).unwrap();
        assert_eq!(s.fiber(0)[7], 1.0);
        assert_eq!(s.fiber(0)[8], 4.0);
        let p = Weight::from_spec("power:a=0.5", g).unwrap();
        assert!((p.fiber(0)[8] - (1.0f64 / 16.0).sqrt()).abs() < 1e-15);
        assert!(matches!(Weight::from_spec("step:k=4", g), Err(Error::Parse(_))));
        assert!(matches!(Weight::from_spec("bogus", g), Err(Error::Parse(_))));
        assert!(matches!(Weight::from_spec("power:a=x", g), Err(Error::Parse(_))));
    }

    #[test]
    fn csv_fibers() {
        let dir = std::env::temp_dir().join(format!("wl_csv_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.csv");
        let mut body = String::from("f0,f1\n");
        for i in 0..8 {
            body.push_str(&format!("{},{}\n", i + 1, 2));
        }
        std::fs::write(&path, body).unwrap();
        let w = Weight::from_spec(&format!("csv:{}", path.display()), grid(3)).unwrap();
        assert_eq!(w.fiber_count(), 2);
        assert_eq!(w.fiber(0)[7], 8.0);
        assert_eq!(w.fiber(1), &[2.0; 8][..]);
        assert!(Weight::from_spec(&format!("csv:{}", path.display()), grid(4)).is_err());
    }

    #[test]
    fn trivial_weight_constants() {
        let w = Weight::constant(grid(6), 1.0).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!((ap_constant(&w, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((fujii_wilson(&w) - 1.0).abs() < 1e-12);
        assert!((reverse_holder(&w, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let d = doubling_constant(&w);
        assert!((d - 2.0).abs() <= 1e-12);
        assert!(matches!(rh_exponent(&w, 1.1), Err(Error::Unbounded(_))));
        assert!(matches!(ap_constant(&w, 0.5), Err(Error::Domain(_))));
        assert!(reverse_holder(&w, 1.0).is_err());
    }

    /// Exhaustive interval enumeration without prefix sums.
    fn ap_brute(fib: &[f64], p: f64) -> f64 {
        let n = fib.len();
        let mut best: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..=n {
                let len = (b - a) as f64;
                let mw: f64 = fib[a..b].iter().sum::<f64>() / len;
                let ms: f64 = fib[a..b].iter().map(|v| v.powf(-1.0 / (p - 1.0))).sum::<f64>() / len;
                best = best.max(mw * ms.powf(p - 1.0));
            }
        }
        best
    }

    #[test]
    fn step_weight_closed_form() {
        for k in [2.0, 4.0, 10.0] {
            let expect: f64 = (2.0 + k + 1.0 / k) / 4.0;
            let w = Weight::step(grid(6), k).unwrap();
            let v = ap_constant(&w, 2.0).unwrap();
            // symmetric straddling intervals are grid-aligned: exact
            assert!((v - expect).abs() < 1e-12, "K={k}: {v} vs {expect}");
            assert!((ap_brute(w.fiber(0), 2.0) - v).abs() < 1e-12);
            let f = f_class_constant(&w, Rational64::from(1), Rational64::from(1)).unwrap();
            assert!((f - v).abs() < 1e-12);
        }
        let w = Weight::step(grid(5), 4.0).unwrap();
        assert!((ap_constant(&w, 2.0).unwrap() - 1.5625).abs() < 1e-12);
        assert!((ap_brute(w.fiber(0), 3.0) - ap_constant(&w, 3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn step_weight_reverse_holder_closed_form() {
        // straddling [-a, b] with t = a/b: sqrt((t + 16)/(t + 1)) / ((t + 4)/(t + 1))
        let oracle = (1..200000)
            .map(|i| i as f64 * 1e-4)
            .map(|t: f64| ((t + 16.0) / (t + 1.0)).sqrt() * (t + 1.0) / (t + 4.0))
            .fold(0.0, f64::max);
        let w = Weight::step(grid(10), 4.0).unwrap();
        let v = reverse_holder(&w, 2.0).unwrap();
        assert!((v - oracle).abs() < 2e-3 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn fujii_wilson_family_close_to_exhaustive() {
        let w = Weight::step(grid(6), 4.0).unwrap();
        let fam = fujii_wilson(&w);
        let all = fujii_wilson_exhaustive(&w);
        assert!(fam <= all + 1e-12);
        assert!(fam >= 0.97 * all, "{fam} vs {all}");
        eprintln!("fw family {fam} exhaustive {all}");
    }

    #[test]
    fn f_class_domain() {
        let w = Weight::constant(grid(4), 1.0).unwrap();
        let z = Rational64::from(0);
        assert!(matches!(f_class_constant(&w, z, z), Err(Error::Domain(_))));
        assert!((f_class_constant(&w, Rational64::from(2), Rational64::from(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((f_class_constant(&w, z, Rational64::from(1)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_json_keys() {
        let w = Weight::constant(grid(5), 1.0).unwrap();
        let rep = ConstantsReport::compute(&w, &[2.0], &[2.0], 1.5).unwrap();
        let j = rep.to_flat_json();
        for key in ["ap_2", "a1", "fw", "doubling", "rh_2", "rh_exp"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert!(j["rh_exp"].is_null());
    }
}
