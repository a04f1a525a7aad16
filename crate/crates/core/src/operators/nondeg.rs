//! Nondegeneracy sweeps: lower bounds for `|Tf|` on shifted copies of a ball,
//! and the shifted `A_2` estimate they imply for weighted norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::op_norm_weighted;
use super::DiscreteOperator;
use crate::error::{Error, Result};
use crate::grid::{Interval, PrefixSums};
use crate::weights::{ap_constant, doubling_constant, Weight};

/// Random profiles per ball length in the nondegeneracy test family.
pub const RANDOM_PROFILES: usize = 32;
const PROFILE_SEED: u64 = 0x6e6f_6e64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegReport {
    /// Shift in multiples of the radius `r` (half the ball length).
    pub shift: f64,
    pub empirical_c: f64,
    pub worst_interval: Interval,
    pub worst_test_function: String,
}

/// Cells between a ball of `len` cells and its shifted copy.
fn offset_cells(shift: f64, len: usize) -> usize {
    (shift * len as f64 / 2.0).round() as usize
}

/// Ball lengths `2, 4, 8, ...` whose two shifted copies fit on `cells` cells.
fn admissible_lengths(shift: f64, cells: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut len = 2;
    while 2 * offset_cells(shift, len) + len <= cells {
        out.push(len);
        len *= 2;
    }
    out
}

/// `min |Tf(x)| / avg_B f` over balls `B`, nonnegative test functions `f`
/// supported on `B`, and cells `x` of `B ± r·shift`.
///
/// The operators here commute with translations as long as the shifted copies
/// stay inside the domain, so one placement per ball length suffices. Test
/// functions: the indicator of `B` and [`RANDOM_PROFILES`] iid uniform profiles
/// seeded by the ball length.
pub fn nondegeneracy_constant(t: &DiscreteOperator, shift: f64) -> Result<NondegReport> {
    if !(shift >= 2.0) || !shift.is_finite() {
        return Err(Error::Precondition(format!("shift must be at least 2, got {shift}")));
    }
    let lengths = admissible_lengths(shift, t.grid.cells());
    if lengths.is_empty() {
        return Err(Error::Config(format!(
            "no ball fits with both copies shifted by {shift} radii on {} cells",
            t.grid.cells()
        )));
    }
    let mut jobs = Vec::new();
    for &len in &lengths {
        let mut rng = ChaCha8Rng::seed_from_u64(PROFILE_SEED ^ len as u64);
        jobs.push((len, "indicator".to_string(), vec![1.0; len]));
        for k in 0..RANDOM_PROFILES {
            let profile: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
            jobs.push((len, format!("random#{k}"), profile));
        }
    }
    let results: Vec<(f64, usize, usize)> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, (len, _, profile))| {
            let d = offset_cells(shift, *len);
            let mut window = vec![0.0; 2 * d + len];
            window[d..d + len].copy_from_slice(profile);
            let avg = profile.iter().sum::<f64>() / *len as f64;
            let tf = t.apply_window(&window)?;
            let worst = tf[..*len]
                .iter()
                .chain(&tf[2 * d..])
                .map(|v| v.abs() / avg)
                .fold(f64::INFINITY, f64::min);
            Ok((worst, idx, d))
        })
        .collect::<Result<_>>()?;
    let (c, idx, d) = results
        .into_iter()
        .fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a });
    let (len, name, _) = &jobs[idx];
    Ok(NondegReport {
        shift,
        empirical_c: c,
        worst_interval: Interval::new(d, *len),
        worst_test_function: name.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// Empirical nondegeneracy constant.
    pub c: f64,
    /// Weighted norm of `T` (max over fibers).
    pub m: f64,
    /// Largest `(avg_{B'} w)(avg_B w^{-1}) / (2 m^2 / c^2)` over admissible `B`, `B'`.
    pub worst_ratio: f64,
    pub worst_interval: Interval,
    /// Largest `c^2 w(B') / (2 m^2 w(B))`, the indicator instance.
    pub indicator_ratio: f64,
    pub pass: bool,
    pub ap2: f64,
    /// `D(w^{-1})^2`: `B` sits inside the fourfold concentric enlargement of `B'`.
    pub c_w: f64,
    /// `[w]_{A_2} / (C_w m^2)`, to be dominated by a fitted `c_T`.
    pub nondegwd_ratio: f64,
    /// The constant `2 / c^2` the derivation provides on admissible balls.
    pub c_t_theory: f64,
}

impl ShiftReport {
    pub fn satisfies(&self, c_t: f64) -> bool {
        self.nondegwd_ratio <= c_t
    }
}

/// Checks `(avg_{B'} w)(avg_B w^{-1}) <= 2 m^2 / c^2` for every admissible ball
/// of even length and both copies `B' = B ± r·shift`, and reports
/// `[w]_{A_2} / (C_w m^2)`.
pub fn verify_shift_ap2(t: &DiscreteOperator, w: &Weight, shift: f64) -> Result<ShiftReport> {
    let nd = nondegeneracy_constant(t, shift)?;
    let c = nd.empirical_c;
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("{} is degenerate at shift {shift}", t.name())));
    }
    let n = w.grid().cells();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_interval = Interval::new(0, 0);
    let mut indicator_ratio: f64 = 0.0;
    let mut m: f64 = 0.0;
    for k in 0..w.fiber_count() {
        let mk = op_norm_weighted(t, w, k)?.norm;
        m = m.max(mk);
        let bound = 2.0 * mk * mk / (c * c);
        let fib = w.fiber(k);
        let pw = PrefixSums::new(fib);
        let pinv = PrefixSums::from_fn(n, |i| 1.0 / fib[i]);
        let lens: Vec<usize> = (1..=n / 2).map(|h| 2 * h).collect();
        let (r, iv, ind) = lens
            .par_iter()
            .map(|&len| {
                let d = offset_cells(shift, len);
                let mut best = (0.0f64, Interval::new(0, len), 0.0f64);
                if 2 * d + len > n {
                    return best;
                }
                for s in d..=n - len - d {
                    let inv = pinv.mean_range(s, s + len);
                    let here = pw.mean_range(s, s + len);
                    for s2 in [s - d, s + d] {
                        let there = pw.mean_range(s2, s2 + len);
                        let lhs = there * inv / bound;
                        if lhs > best.0 {
                            best.0 = lhs;
                            best.1 = Interval::new(s, len);
                        }
                        best.2 = best.2.max(c * c * there / (2.0 * mk * mk * here));
                    }
                }
                best
            })
            .reduce(
                || (0.0, Interval::new(0, 0), 0.0),
                |a, b| {
                    let first = if b.0 > a.0 { (b.0, b.1) } else { (a.0, a.1) };
                    (first.0, first.1, a.2.max(b.2))
                },
            );
        if r > worst_ratio {
            worst_ratio = r;
            worst_interval = iv;
        }
        indicator_ratio = indicator_ratio.max(ind);
    }
    let ap2 = ap_constant(w, 2.0)?;
    let c_w = doubling_constant(&w.recip()?).powi(2);
    Ok(ShiftReport {
        c,
        m,
        worst_ratio,
        worst_interval,
        indicator_ratio,
        pass: worst_ratio <= 1.0 && indicator_ratio <= 1.0,
        ap2,
        c_w,
        nondegwd_ratio: ap2 / (c_w * m * m),
        c_t_theory: 2.0 / (c * c),
    })
}
