//! Dense endpoint-grid oracles for the interval classes.

#![allow(dead_code)]

use bmolab::interval::StepFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Running integrals of `g(η)` at `x_i = a + i(b−a)/m`, `i = 0..=m`.
fn prefix(s: &StepFunction, m: usize, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = (s.b - s.a) / m as f64;
    let mut out = vec![0.0; m + 1];
    for i in 0..m {
        let (l, r) = (s.a + i as f64 * h, s.a + (i + 1) as f64 * h);
        // integral of the step function over one grid cell
        let mut acc = 0.0;
        for (pl, pr, v) in s.pieces() {
            let (lo, hi) = (pl.max(l), pr.min(r));
            if hi > lo {
                acc += (hi - lo) * g(v);
            }
        }
        out[i + 1] = out[i] + acc;
    }
    out
}

fn grid_sup(m: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> f64 {
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            for j in i + 1..=m {
                best = best.max(f(i, j));
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

/// `sup (⟨η²⟩ − ⟨η⟩²)^{1/2}` over subintervals with endpoints on an `m`-cell grid.
pub fn oracle_bmo(s: &StepFunction, m: usize) -> f64 {
    let shift = s.mean();
    let p1 = prefix(s, m, |v| v - shift);
    let p2 = prefix(s, m, |v| (v - shift) * (v - shift));
    let h = (s.b - s.a) / m as f64;
    grid_sup(m, |i, j| {
        let len = (j - i) as f64 * h;
        let a = (p1[j] - p1[i]) / len;
        (p2[j] - p2[i]) / len - a * a
    })
    .sqrt()
}

/// `sup ⟨w⟩⟨w^{−1/(p−1)}⟩^{p−1}` over the same subintervals.
pub fn oracle_ap(s: &StepFunction, p: f64, m: usize) -> f64 {
    let p1 = prefix(s, m, |v| v);
    let p2 = prefix(s, m, |v| v.powf(-1.0 / (p - 1.0)));
    let h = (s.b - s.a) / m as f64;
    grid_sup(m, |i, j| {
        let len = (j - i) as f64 * h;
        ((p1[j] - p1[i]) / len) * ((p2[j] - p2[i]) / len).powf(p - 1.0)
    })
}

/// Step functions on `[0, 1]` with up to eight pieces whose breakpoints sit
/// on the `1/m` grid. Values are normal, or `e^{0.8 N}` when `positive`.
pub fn grid_step_functions(count: usize, m: usize, positive: bool, seed: u64) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pieces = rng.random_range(2..=8);
            let mut ks: Vec<usize> = Vec::new();
            while ks.len() < pieces - 1 {
                let k = rng.random_range(1..m);
                if !ks.contains(&k) {
                    ks.push(k);
                }
            }
            ks.sort_unstable();
            let breaks = ks.iter().map(|&k| k as f64 / m as f64).collect();
            let values = (0..pieces)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if positive { (0.8 * z).exp() } else { z }
                })
                .collect();
            StepFunction::new(0.0, 1.0, breaks, values).unwrap()
        })
        .collect()
}
