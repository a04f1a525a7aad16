//! Seeded test instances shared by the test suites, the calibration of frozen
//! constants and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use num_rational::Rational64;

use crate::error::Result;
use crate::grid::Grid;
use crate::majorants::{rdf_majorant, DEFAULT_DEPTH};
use crate::weights::Weight;

const WEIGHT_TAG: u64 = 0x7765_6967;
const PROFILE_TAG: u64 = 0x7072_6f66;

/// Piecewise constant weight with 2 to 8 pieces and levels `exp(1.5 Z)`.
pub fn seeded_weight(grid: Grid, seed: u64) -> Result<Weight> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ WEIGHT_TAG);
    let n = grid.cells();
    let pieces = rng.gen_range(2..=8usize).min(n);
    let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.gen_range(1..n)).collect();
    cuts.sort_unstable();
    let levels: Vec<f64> = (0..pieces)
        .map(|_| (1.5 * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();
    let values = (0..n).map(|i| levels[cuts.partition_point(|&c| c <= i)]).collect();
    Weight::single(grid, values)
}

/// Nonnegative profile: cubed uniform samples, so mass concentrates on a few cells.
pub fn seeded_profile(grid: Grid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PROFILE_TAG);
    (0..grid.cells()).map(|_| rng.gen::<f64>().powi(3)).collect()
}

/// Inputs of the `A_p` to `A_1` chain: `|f| <= w`, `w^δ <= u`, `u` an `A_1` majorant.
#[derive(Debug, Clone)]
pub struct A1aptInstance {
    pub f: Vec<f64>,
    pub w: Weight,
    pub u: Weight,
    pub p: f64,
    pub delta: Rational64,
}

/// `w` seeded, `f = w · profile`, `δ = 1/2`, `u` the Rubio de Francia majorant of `w^δ`.
pub fn a1apt_instance(grid: Grid, seed: u64) -> Result<A1aptInstance> {
    let w = seeded_weight(grid, seed)?;
    let profile = seeded_profile(grid, seed);
    let f = w.fiber(0).iter().zip(&profile).map(|(a, b)| a * b).collect();
    let delta = Rational64::new(1, 2);
    let root: Vec<f64> = w.fiber(0).iter().map(|v| v.sqrt()).collect();
    let u = rdf_majorant(&root, &grid, 2.0, DEFAULT_DEPTH)?.majorant_w;
    Ok(A1aptInstance { f, w, u, p: 2.0, delta })
}

/// `(g, h, p_Z)` for the `A_2` to `A_1` division chain.
pub fn a2rdiv_instance(grid: Grid, seed: u64) -> (Vec<f64>, Vec<f64>, f64) {
    let g = seeded_profile(grid, seed);
    let h = seeded_profile(grid, seed.wrapping_add(0x9e37_79b9));
    (g, h, 2.0)
}
