//! Uncentered Hardy–Littlewood maximal operator over grid intervals.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `(Mf)(i) = max { mean(f, I) : I a cell interval containing i }`, exact.
///
/// For each left endpoint `a` the running means over `[a, b]` are folded into a
/// suffix maximum, so the whole operator costs `O(N^2)`.
pub fn maximal(f: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = f.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "maximal operator needs finite nonnegative input; f[{i}] = {}",
            f[i]
        )));
    }
    Ok(maximal_unchecked(f))
}

pub(crate) fn maximal_unchecked(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n == 0 {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in f {
        prefix.push(prefix.last().unwrap() + v);
    }
    let prefix = &prefix;
    let chunk = (n / (4 * rayon::current_num_threads().max(1))).max(64);
    let starts: Vec<usize> = (0..n).step_by(chunk).collect();
    starts
        .into_par_iter()
        .map(|a0| {
            let mut out = vec![0.0f64; n];
            let mut suffix = vec![0.0f64; n];
            for a in a0..(a0 + chunk).min(n) {
                let base = prefix[a];
                let mut best = f64::NEG_INFINITY;
                for b in (a..n).rev() {
                    let m = (prefix[b + 1] - base) / (b + 1 - a) as f64;
                    if m > best {
                        best = m;
                    }
                    suffix[b] = best;
                }
                for i in a..n {
                    if suffix[i] > out[i] {
                        out[i] = suffix[i];
                    }
                }
            }
            out
        })
        .reduce_with(|mut x, y| {
            for (a, b) in x.iter_mut().zip(y) {
                if b > *a {
                    *a = b;
                }
            }
            x
        })
        .map(|mut out| {
            // single-cell intervals: keep f itself exact under rounding
            for (o, &v) in out.iter_mut().zip(f) {
                if v > *o {
                    *o = v;
                }
            }
            out
        })
        .unwrap_or_else(|| vec![0.0; n])
}

/// Brute-force reference: every interval, every cell. `O(N^3)`, tests only.
#[cfg(test)]
pub(crate) fn maximal_brute(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0f64; n];
    for a in 0..n {
        for b in a..n {
            let m = f[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
            for o in &mut out[a..=b] {
                *o = o.max(m);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_is_fixed_point() {
        let m = maximal(&[1.0; 64]).unwrap();
        assert!(m.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn single_cell_indicator() {
        let n = 16;
        for c in 0..n {
            let mut f = vec![0.0; n];
            f[c] = 1.0;
            let m = maximal(&f).unwrap();
            let brute = maximal_brute(&f);
            for i in 0..n {
                let expect = 1.0 / ((i as f64 - c as f64).abs() + 1.0);
                assert!((m[i] - expect).abs() < 1e-15, "c={c} i={i}");
                assert!((brute[i] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dominates_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
            let m = maximal(&f).unwrap();
            assert!(m.iter().zip(&f).all(|(a, b)| a >= b));
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(matches!(maximal(&[1.0, -0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn matches_brute_force_large_chunks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..300).map(|_| rng.gen::<f64>().powi(3)).collect();
        let fast = maximal(&f).unwrap();
        let slow = maximal_brute(&f);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn sublinear_and_monotone(
            f in proptest::collection::vec(0.0f64..10.0, 1..40),
            g_extra in proptest::collection::vec(0.0f64..10.0, 40),
        ) {
            let g: Vec<f64> = f.iter().zip(&g_extra).map(|(a, b)| a + b).collect();
            let mf = maximal(&f).unwrap();
            let mg = maximal(&g).unwrap();
            let extra = &g_extra[..f.len()];
            let me = maximal(extra).unwrap();
            let sum: Vec<f64> = f.iter().zip(extra).map(|(a, b)| a + b).collect();
            let ms = maximal(&sum).unwrap();
            for i in 0..f.len() {
                prop_assert!(ms[i] <= mf[i] + me[i] + 1e-12);
                prop_assert!(mf[i] <= mg[i] + 1e-12);
            }
            prop_assert_eq!(maximal_brute(&f).len(), f.len());
        }
    }
}
