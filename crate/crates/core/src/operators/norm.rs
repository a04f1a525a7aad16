//! Operator norms: weighted `L^2` norms of linear operators, `L^p` norms by
//! Boyd's nonlinear power method, and an empirical bound for `M` on `L^p`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::maximal::maximal_unchecked;
use super::{DiscreteOperator, OperatorKind};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::weights::Weight;

pub const NORM_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;
const KRYLOV_DIM: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub norm: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..n).map(|_| 0.5 + rng.gen::<f64>()).collect()
}

/// Largest eigenvalue of a symmetric positive semidefinite map by restarted
/// Lanczos with full reorthogonalization.
///
/// Returns `(eigenvalue, matvecs, relative residual)`, where the residual is
/// `|G y - θ y| / θ` for the returned unit Ritz vector `y`.
pub(crate) fn top_eigenvalue(
    n: usize,
    apply: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, usize, f64)> {
    let kmax = KRYLOV_DIM.min(n);
    let mut start = start_vector(n);
    let mut matvecs = 0;
    loop {
        let s = norm2(&start);
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|v| v / s).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..kmax {
            let mut w = apply(&basis[j])?;
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = norm2(&w);
            if j + 1 == kmax || b <= 1e-13 * a.abs().max(1e-300) {
                break;
            }
            beta.push(b);
            basis.push(w.into_iter().map(|v| v / b).collect());
        }
        let k = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alpha[i];
            if i + 1 < k {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let (top, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let theta = eig.eigenvalues[top];
        let coeffs = eig.eigenvectors.column(top);
        let mut y = vec![0.0; n];
        for (c, q) in coeffs.iter().zip(&basis) {
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += c * qi;
            }
        }
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        let gy = apply(&y)?;
        matvecs += 1;
        if theta <= 0.0 {
            return Ok((0.0, matvecs, 0.0));
        }
        let residual =
            gy.iter().zip(&y).map(|(g, v)| (g - theta * v).powi(2)).sum::<f64>().sqrt() / theta;
        if residual <= NORM_TOLERANCE {
            return Ok((theta, matvecs, residual));
        }
        if matvecs >= MAX_ITERATIONS {
            return Err(Error::Convergence { iterations: matvecs, residual, last: y });
        }
        start = y;
    }
}

/// Norm of a linear `T` on the space with squared norm `sum |f_i|^2 w_i Δx`
/// for one fiber of `w`.
///
/// This is the spectral norm of `D T D^{-1}`, `D = diag(sqrt w)`.
pub fn op_norm_weighted(t: &DiscreteOperator, w: &Weight, fiber: usize) -> Result<WeightedNormReport> {
    if !t.is_linear() {
        return Err(Error::Precondition(format!("{} is not linear", t.name())));
    }
    if *w.grid() != t.grid {
        return Err(Error::Invariant("operator and weight live on different grids".into()));
    }
    if fiber >= w.fiber_count() {
        return Err(Error::Invariant(format!("fiber {fiber} out of range")));
    }
    if matches!(t.kind, OperatorKind::Identity) {
        return Ok(WeightedNormReport { norm: 1.0, iterations: 0, residual: 0.0 });
    }
    let d: Vec<f64> = w.fiber(fiber).iter().map(|v| v.sqrt()).collect();
    let n = d.len();
    let gram = |x: &[f64]| -> Result<Vec<f64>> {
        let pre: Vec<f64> = x.iter().zip(&d).map(|(v, s)| v / s).collect();
        let ax: Vec<f64> = t.apply_window(&pre)?.iter().zip(&d).map(|(v, s)| v * s).collect();
        let back: Vec<f64> = ax.iter().zip(&d).map(|(v, s)| v * s).collect();
        Ok(t.apply_transpose_window(&back)?.iter().zip(&d).map(|(v, s)| v / s).collect())
    };
    let (theta, iterations, residual) = top_eigenvalue(n, gram)?;
    Ok(WeightedNormReport { norm: theta.sqrt(), iterations, residual })
}

/// Norm on the fiber-stacked space: the maximum of the per-fiber norms.
pub fn op_norm_joint(t: &DiscreteOperator, w: &Weight) -> Result<f64> {
    let mut best: f64 = 0.0;
    for k in 0..w.fiber_count() {
        best = best.max(op_norm_weighted(t, w, k)?.norm);
    }
    Ok(best)
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn duality_map(x: &[f64], p: f64) -> Vec<f64> {
    x.iter().map(|v| v.signum() * v.abs().powf(p - 1.0)).collect()
}

/// Lower estimate of `||T||_{L^p -> L^p}` for a linear `T`.
///
/// Boyd's iteration `x <- J_{p'}(T^t J_p(T x))`; for `p = 2` the Lanczos value.
pub fn op_norm_lp(t: &DiscreteOperator, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("L^p norm needs 1 < p < inf, got {p}")));
    }
    let unit = Weight::constant(t.grid, 1.0)?;
    if p == 2.0 {
        return Ok(op_norm_weighted(t, &unit, 0)?.norm);
    }
    if !t.is_linear() {
        return Err(Error::Precondition(format!("{} is not linear", t.name())));
    }
    let q = p / (p - 1.0);
    let n = t.grid.cells();
    let mut x = start_vector(n);
    let mut last = 0.0;
    for it in 0..MAX_ITERATIONS {
        let nx = lp_norm(&x, p);
        x.iter_mut().for_each(|v| *v /= nx);
        let tx = t.apply_window(&x)?;
        let value = lp_norm(&tx, p);
        if it > 0 && (value - last).abs() <= 1e-12 * value {
            return Ok(value);
        }
        last = value;
        let back = t.apply_transpose_window(&duality_map(&tx, p))?;
        x = duality_map(&back, q);
    }
    Ok(last)
}

pub(crate) fn maximal_test_family(n: usize, p: f64) -> Vec<Vec<f64>> {
    let mut family = vec![vec![1.0; n]];
    for (center, width) in [(n / 2, 1), (0, 1), (n / 2, (n / 64).max(1)), (n / 2, (n / 8).max(1))] {
        let mut f = vec![0.0; n];
        let lo = center.saturating_sub(width / 2);
        f[lo..(lo + width).min(n)].iter_mut().for_each(|v| *v = 1.0);
        family.push(f);
    }
    for j in 1..=5 {
        let a = (1.0 - 0.5f64.powi(j)) / p;
        family.push((0..n).map(|i| ((i as f64 - n as f64 / 2.0).abs() + 0.5).powf(-a)).collect());
        family.push((0..n).map(|i| (i as f64 + 0.5).powf(-a)).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    for k in 0..8 {
        let e = if k < 4 { 1 } else { 8 };
        family.push((0..n).map(|_| rng.gen::<f64>().powi(e)).collect());
    }
    family
}

pub const MAXIMAL_SAFETY: f64 = 1.5;

/// Largest ratio `||Mf||_p / ||f||_p` over a fixed test family, times
/// [`MAXIMAL_SAFETY`]. Cached per `(p, grid)`.
pub fn maximal_norm_lp(p: f64, grid: &Grid) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("maximal norm needs 1 < p < inf, got {p}")));
    }
    type Cache = Mutex<HashMap<(u64, u64, u32), f64>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (p.to_bits(), grid.half_width().to_bits(), grid.resolution());
    if let Some(v) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let best = maximal_test_family(grid.cells(), p)
        .iter()
        .map(|f| lp_norm(&maximal_unchecked(f), p) / lp_norm(f, p))
        .fold(1.0f64, f64::max);
    let value = MAXIMAL_SAFETY * best;
    CACHE.get().unwrap().lock().unwrap().insert(key, value);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense_hilbert_weighted(n: usize, w: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                w[i].sqrt() / (std::f64::consts::PI * (i as f64 - j as f64)) / w[j].sqrt()
            }
        })
    }

    #[test]
    fn identity_norm_is_one() {
        let g = Grid::new(1.0, 6).unwrap();
        let w = Weight::step(g, 4.0).unwrap();
        let r = op_norm_weighted(&DiscreteOperator::identity(g), &w, 0).unwrap();
        assert_eq!(r.norm, 1.0);
    }

    #[test]
    fn lanczos_matches_dense_svd() {
        let g = Grid::new(1.0, 8).unwrap();
        for w in [Weight::constant(g, 1.0).unwrap(), Weight::step(g, 4.0).unwrap(), Weight::power(g, 0.5).unwrap()] {
            let r = op_norm_weighted(&DiscreteOperator::hilbert(g), &w, 0).unwrap();
            let dense = dense_hilbert_weighted(256, w.fiber(0));
            let sigma = dense.singular_values().max();
            assert!((r.norm - sigma).abs() <= 1e-6 * sigma, "{} vs {sigma}", r.norm);
            assert!(r.residual <= NORM_TOLERANCE);
        }
    }

    #[test]
    fn maximal_is_rejected() {
        let g = Grid::new(1.0, 5).unwrap();
        let w = Weight::constant(g, 1.0).unwrap();
        assert!(matches!(
            op_norm_weighted(&DiscreteOperator::maximal(g), &w, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn boyd_matches_lanczos_at_two() {
        let g = Grid::new(1.0, 7).unwrap();
        let t = DiscreteOperator::hilbert(g);
        let a = op_norm_lp(&t, 2.0).unwrap();
        let b = {
            let dense = dense_hilbert_weighted(128, &[1.0; 128]);
            dense.singular_values().max()
        };
        assert!((a - b).abs() < 1e-8);
        let p3 = op_norm_lp(&t, 3.0).unwrap();
        assert!(p3 > 0.5 && p3.is_finite());
    }

    #[test]
    fn maximal_norm_envelope() {
        let g = Grid::new(1.0, 9).unwrap();
        let v: Vec<f64> = [1.5, 2.0, 3.0].iter().map(|&p| maximal_norm_lp(p, &g).unwrap()).collect();
        assert!(v[1] >= 1.0 && v[1] <= 4.0);
        assert!(v[0] >= v[1] && v[1] >= v[2]);
        assert!(maximal_norm_lp(1.0, &g).is_err());
    }
}
