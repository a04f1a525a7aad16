//! Midpoint principal-value Hilbert transform.
//!
//! `(Hf)_i = (1/pi) sum_{j != i} f_j Δx / (x_i - x_j) = (1/pi) sum_{j != i} f_j / (i - j)`,
//! so the matrix is Toeplitz and independent of the cell width. Long inputs are
//! multiplied through a circulant embedding with FFTs.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Inputs at most this long use the direct `O(N^2)` sum.
pub const DIRECT_LIMIT: usize = 128;

pub fn hilbert(f: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("hilbert input sample {i} is not finite")));
    }
    Ok(hilbert_unchecked(f))
}

pub(crate) fn hilbert_unchecked(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n <= DIRECT_LIMIT {
        return hilbert_direct(f);
    }
    let hat = hilbert_hat(n);
    circulant_apply(&hat, f)
}

/// The defining sum evaluated term by term.
pub fn hilbert_direct(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for (j, &v) in f.iter().enumerate() {
                if j != i {
                    s += v / (i as f64 - j as f64);
                }
            }
            s / PI
        })
        .collect()
}

/// `y_i = sum_{j != i} sign(i - j) taps[|i - j|] f_j`.
pub(crate) fn odd_toeplitz_apply(taps: &[f64], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n <= DIRECT_LIMIT {
        return (0..n)
            .map(|i| {
                let mut s = 0.0;
                for (j, &v) in f.iter().enumerate() {
                    if j < i {
                        s += taps[i - j] * v;
                    } else if j > i {
                        s -= taps[j - i] * v;
                    }
                }
                s
            })
            .collect();
    }
    circulant_apply(&odd_hat(taps, n), f)
}

fn embed_size(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(m: usize) -> PlanPair {
    static PLANS: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let mut cache = PLANS.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        })
        .clone()
}

fn odd_hat(taps: &[f64], n: usize) -> Vec<Complex64> {
    let m = embed_size(n);
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    for d in 1..n {
        c[d].re = taps[d];
        c[m - d].re = -taps[d];
    }
    plans(m).0.process(&mut c);
    c
}

fn hilbert_hat(n: usize) -> Arc<Vec<Complex64>> {
    static HATS: OnceLock<Mutex<HashMap<usize, Arc<Vec<Complex64>>>>> = OnceLock::new();
    let mut cache = HATS.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let taps: Vec<f64> =
                (0..n).map(|d| if d == 0 { 0.0 } else { 1.0 / (PI * d as f64) }).collect();
            Arc::new(odd_hat(&taps, n))
        })
        .clone()
}

fn circulant_apply(hat: &[Complex64], f: &[f64]) -> Vec<f64> {
    let m = hat.len();
    let (fwd, inv) = plans(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (b, &v) in buf.iter_mut().zip(f) {
        b.re = v;
    }
    fwd.process(&mut buf);
    for (b, h) in buf.iter_mut().zip(hat) {
        *b *= h;
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf[..f.len()].iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fft_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [129, 256, 1000, 4096] {
            let f: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let fast = hilbert(&f).unwrap();
            let slow = hilbert_direct(&f);
            let scale = slow.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-10 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn even_input_gives_odd_output() {
        let n = 512;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64 - 0.5;
                (-(x * x) * 20.0).exp()
            })
            .collect();
        let h = hilbert(&f).unwrap();
        for i in 0..n {
            assert!((h[i] + h[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn antisymmetric_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 300;
        let f: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let l = dot(&hilbert(&f).unwrap(), &g);
        let r = dot(&f, &hilbert(&g).unwrap());
        assert!((l + r).abs() <= 1e-10 * l.abs().max(1.0));
    }

    #[test]
    fn odd_toeplitz_agrees_both_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200;
        let taps: Vec<f64> = (0..n).map(|d| 1.0 / (1.0 + d as f64).powi(2)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let fast = odd_toeplitz_apply(&taps, &f);
        for i in [0, 17, 199] {
            let mut s = 0.0;
            for j in 0..n {
                if j < i {
                    s += taps[i - j] * f[j];
                } else if j > i {
                    s -= taps[j - i] * f[j];
                }
            }
            assert!((fast[i] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nan() {
        assert!(hilbert(&[1.0, f64::NAN]).is_err());
    }
}
