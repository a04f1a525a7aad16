use approx::assert_relative_eq;
use proptest::prelude::*;
use weightlab::instances::seeded_weight;
use weightlab::weights::{
    a1_constant, ap_constant, doubling_constant, fujii_wilson, fujii_wilson_exhaustive, reverse_holder,
    rh_exponent,
};
use weightlab::{Error, Grid, Weight};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ap_oracle(w: &[f64], p: f64) -> f64 {
    let n = w.len();
    let mut best: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..=n {
            let s = &w[a..b];
            let dual: Vec<f64> = s.iter().map(|x| x.powf(-1.0 / (p - 1.0))).collect();
            best = best.max(mean(s) * mean(&dual).powf(p - 1.0));
        }
    }
    best
}

fn maximal_oracle(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let mut m: f64 = 0.0;
            for a in 0..=i {
                for b in i + 1..=n {
                    m = m.max(mean(&f[a..b].iter().map(|x| x.abs()).collect::<Vec<_>>()));
                }
            }
            m
        })
        .collect()
}

fn rh_oracle(w: &[f64], r: f64) -> f64 {
    let n = w.len();
    let mut best: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..=n {
            let s = &w[a..b];
            let pr: Vec<f64> = s.iter().map(|x| x.powf(r)).collect();
            best = best.max(mean(&pr).powf(1.0 / r) / mean(s));
        }
    }
    best
}

#[test]
fn ap_matches_brute_force() {
    let g = Grid::new(1.0, 6).unwrap();
    for seed in 0..6 {
        let w = seeded_weight(g, seed).unwrap();
        for p in [1.5, 2.0, 3.0, 5.0] {
            assert_relative_eq!(ap_constant(&w, p).unwrap(), ap_oracle(w.fiber(0), p), max_relative = 1e-10);
        }
    }
    let w = Weight::power(g, -0.4).unwrap();
    assert_relative_eq!(ap_constant(&w, 2.0).unwrap(), ap_oracle(w.fiber(0), 2.0), max_relative = 1e-10);
}

#[test]
fn a1_matches_brute_force() {
    let g = Grid::new(1.0, 5).unwrap();
    for seed in 10..14 {
        let w = seeded_weight(g, seed).unwrap();
        let m = maximal_oracle(w.fiber(0));
        let oracle = m.iter().zip(w.fiber(0)).map(|(a, b)| a / b).fold(0.0, f64::max);
        assert_relative_eq!(a1_constant(&w), oracle, max_relative = 1e-10);
        assert!(a1_constant(&w) >= ap_constant(&w, 2.0).unwrap() * (1.0 - 1e-12));
    }
}

#[test]
fn reverse_holder_matches_brute_force() {
    let g = Grid::new(1.0, 6).unwrap();
    for seed in 20..24 {
        let w = seeded_weight(g, seed).unwrap();
        for r in [1.5, 2.0, 4.0] {
            assert_relative_eq!(reverse_holder(&w, r).unwrap(), rh_oracle(w.fiber(0), r), max_relative = 1e-10);
        }
    }
}

#[test]
fn step_weight_closed_forms() {
    // w = 1 left, K right: sup over balls straddling the jump is (2 + K + 1/K)/4
    let g = Grid::new(1.0, 10).unwrap();
    for k in [2.0, 4.0, 10.0] {
        let w = Weight::step(g, k).unwrap();
        let exact = (2.0 + k + 1.0 / k) / 4.0;
        assert_relative_eq!(ap_constant(&w, 2.0).unwrap(), exact, max_relative = 0.02);
        assert_relative_eq!(reverse_holder(&w, 2.0).unwrap(), oracle_rh_step(k), max_relative = 0.02);
    }
}

// max over t in [0,1] of sqrt(t + (1-t)K^2) / (t + (1-t)K)
fn oracle_rh_step(k: f64) -> f64 {
    (0..=100_000)
        .map(|i| {
            let t = i as f64 / 100_000.0;
            (t + (1.0 - t) * k * k).sqrt() / (t + (1.0 - t) * k)
        })
        .fold(0.0, f64::max)
}

#[test]
fn trivial_and_scale_invariance() {
    let g = Grid::new(2.0, 8).unwrap();
    let one = Weight::constant(g, 1.0).unwrap();
    let w = seeded_weight(g, 3).unwrap();
    let scaled = w.scale(17.0).unwrap();
    for p in [1.5, 2.0, 3.0] {
        assert_relative_eq!(ap_constant(&one, p).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(ap_constant(&w, p).unwrap(), ap_constant(&scaled, p).unwrap(), max_relative = 1e-12);
    }
    assert_relative_eq!(a1_constant(&w), a1_constant(&scaled), max_relative = 1e-12);
    assert_relative_eq!(fujii_wilson(&w), fujii_wilson(&scaled), max_relative = 1e-12);
    assert_relative_eq!(doubling_constant(&w), doubling_constant(&scaled), max_relative = 1e-12);
}

#[test]
fn ap_is_monotone_in_p() {
    let g = Grid::new(1.0, 8).unwrap();
    for seed in 0..5 {
        let w = seeded_weight(g, seed).unwrap();
        let vals: Vec<f64> = [1.25, 1.5, 2.0, 3.0, 6.0].iter().map(|&p| ap_constant(&w, p).unwrap()).collect();
        for pair in vals.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{vals:?}");
        }
        assert!(a1_constant(&w) >= vals[0] * (1.0 - 1e-12));
    }
}

#[test]
fn fujii_wilson_family_vs_exhaustive() {
    let g = Grid::new(1.0, 5).unwrap();
    for seed in 0..4 {
        let w = seeded_weight(g, seed).unwrap();
        let fw = fujii_wilson(&w);
        let full = fujii_wilson_exhaustive(&w);
        assert!(fw >= 1.0 - 1e-12);
        assert!(fw <= full * (1.0 + 1e-12), "{fw} > {full}");
        assert!(full <= ap_constant(&w, 2.0).unwrap().max(a1_constant(&w)) * (1.0 + 1e-12));
    }
}

#[test]
fn doubling_oracle() {
    let g = Grid::new(1.0, 5).unwrap();
    let w = seeded_weight(g, 8).unwrap();
    let f = w.fiber(0);
    let n = f.len();
    let mut best: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..=n {
            let len = b - a;
            let lo = a.saturating_sub(len / 2);
            let hi = (b + len - len / 2).min(n);
            best = best.max(f[lo..hi].iter().sum::<f64>() / f[a..b].iter().sum::<f64>());
        }
    }
    assert_relative_eq!(doubling_constant(&w), best, max_relative = 1e-12);
}

// on the line |x|^{-a} lies in RH_r for r < 1/a; on a grid only the ordering survives
#[test]
fn rh_exponent_falls_as_a_infinity_constant_grows() {
    let g = Grid::new(1.0, 10).unwrap();
    let mut last = (0.0, f64::INFINITY);
    for a in [0.2, 0.4, 0.6, 0.8] {
        let w = Weight::power(g, -a).unwrap();
        let fw = fujii_wilson(&w);
        let r = rh_exponent(&w, 2.0).unwrap();
        assert!(fw > last.0 && r < last.1, "a = {a}: fw {fw}, r {r}, previous {last:?}");
        last = (fw, r);
    }
}

#[test]
fn domain_errors() {
    let g = Grid::new(1.0, 4).unwrap();
    let w = Weight::constant(g, 1.0).unwrap();
    assert!(matches!(ap_constant(&w, 0.5), Err(Error::Domain(_))));
    assert!(matches!(reverse_holder(&w, 1.0), Err(Error::Domain(_))));
    assert!(matches!(Weight::from_spec("const:c=0", g), Err(Error::Domain(_))));
    assert!(matches!(Weight::from_spec("tri:c=1", g), Err(Error::Parse(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duality_identity(levels in prop::collection::vec(-3.0f64..3.0, 64), p in 1.2f64..4.0) {
        let g = Grid::new(1.0, 6).unwrap();
        let w = Weight::single(g, levels.iter().map(|x| x.exp()).collect()).unwrap();
        let q = p / (p - 1.0);
        let dual = w.powf(-1.0 / (p - 1.0)).unwrap();
        let lhs = ap_constant(&w, p).unwrap();
        let rhs = ap_constant(&dual, q).unwrap().powf(p - 1.0);
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-9, "{} vs {}", lhs, rhs);
    }
}
