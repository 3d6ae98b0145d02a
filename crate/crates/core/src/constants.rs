//! Dimensional constants: the trigamma identity for the variance of
//! `log|x|`, the heat kernel on balls at `t = r²/(2n)`, ball averages of
//! radial functions and the John–Nirenberg inequality for semigroup norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{E, PI};

use crate::envelope::GridFunction;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;
use crate::quadrature::{golden_max, integrate, integrate_pieces, Quad, Tolerance};
use crate::semigroup::{extend, k_bmo_norm, k_variance, kernel_eval, KernelKind, ProbeSet, SpaceTimePoint, TestFunction, Transform};
use crate::special::{ball_volume, gamma, ln_gamma, sphere_area, trigamma};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimReport {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub notes: String,
}

fn tight() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-11, max_segments: 2000 }
}

/// `∬ r₁^{n+1} r₂^{n+1} e^{-r₁²-r₂²} log²(r₁/r₂)` by nested quadrature.
pub fn polygamma_lhs(n: usize) -> Quad {
    let p = (n + 1) as f64;
    let top = (n as f64 / 2.0 + 1.0).sqrt() + 7.0;
    let w = |r: f64| if r <= 0.0 { 0.0 } else { (p * r.ln() - r * r).exp() };
    let inner = |r1: f64| {
        let l1 = r1.ln();
        let g = |r2: f64| {
            if r2 <= 0.0 {
                0.0
            } else {
                let d = l1 - r2.ln();
                w(r2) * d * d
            }
        };
        integrate_pieces(&g, &[0.0, r1, top], tight())
    };
    let mut err = 0.0;
    let peak = (p / 2.0).sqrt();
    let outer = |r1: f64| {
        if r1 <= 0.0 {
            return 0.0;
        }
        w(r1) * inner(r1).value
    };
    let q = integrate_pieces(&outer, &[0.0, peak, top], tight());
    err += q.abs_err;
    Quad { value: q.value, abs_err: err }
}

/// `(1/8) Γ(n/2+1)² Ψ₁(n/2+1)`.
pub fn polygamma_rhs(n: usize) -> f64 {
    let a = n as f64 / 2.0 + 1.0;
    0.125 * (2.0 * ln_gamma(a)).exp() * trigamma(a)
}

pub fn polygamma_identity(n: usize) -> Result<DimReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n ≥ 1".into()));
    }
    let q = polygamma_lhs(n);
    let rhs = polygamma_rhs(n);
    if !(q.abs_err <= 1e-8 * rhs.abs()) {
        return Err(Error::Quadrature(q.abs_err));
    }
    let rel = (q.value - rhs).abs() / rhs.abs();
    Ok(DimReport {
        n,
        lhs: q.value,
        rhs,
        ratio: q.value / rhs,
        pass: rel <= 1e-6,
        notes: format!("relative error {rel:.3e}, quadrature error {:.1e}", q.abs_err),
    })
}

/// `n Ψ₁(n/2+1)` for `n = 1..=n_max`; tends to 2.
pub fn trigamma_trend(n_max: usize) -> Vec<(usize, f64)> {
    (1..=n_max).map(|n| (n, n as f64 * trigamma(n as f64 / 2.0 + 1.0))).collect()
}

/// The heat kernel at `t = r²/(2n)` on `|u| = r` against
/// `r^{-n}(n/(2πe))^{n/2}`. The kernel is radially decreasing, so this is
/// its minimum over the ball.
pub fn heat_ball_lower_bound(n: usize, r: f64) -> Result<DimReport> {
    if n == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("n = {n}, r = {r}")));
    }
    let nf = n as f64;
    let t = r * r / (2.0 * nf);
    let mut u = vec![0.0; n];
    u[0] = r;
    let lhs = kernel_eval(KernelKind::Heat, n, t, &u)?;
    let rhs = r.powf(-nf) * (nf / (2.0 * PI * E)).powf(nf / 2.0);
    let inside = (0..=16).all(|k| {
        let mut v = vec![0.0; n];
        v[0] = r * k as f64 / 16.0;
        kernel_eval(KernelKind::Heat, n, t, &v).map(|h| h >= lhs * (1.0 - 1e-14)).unwrap_or(false)
    });
    let rel = (lhs - rhs).abs() / rhs;
    Ok(DimReport {
        n,
        lhs,
        rhs,
        ratio: lhs / rhs,
        pass: rel <= 1e-12 && inside,
        notes: format!("t_B = {t:e}, relative error {rel:.2e}"),
    })
}

/// `√n (n/(2e))^{n/2} / Γ(n/2+1)`.
pub fn heat_ball_constant(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    ((n as f64).ln() / 2.0 + h * (h / E).ln() - ln_gamma(h + 1.0)).exp()
}

/// Table of [`heat_ball_constant`] for `n = 1..=n_max` and its minimum.
pub fn heat_ball_constant_table(n_max: usize) -> (Vec<(usize, f64)>, (usize, f64)) {
    let rows: Vec<(usize, f64)> = (1..=n_max).map(|n| (n, heat_ball_constant(n))).collect();
    let min = rows.iter().copied().fold((0, f64::INFINITY), |m, r| if r.1 < m.1 { r } else { m });
    (rows, min)
}

/// Fraction of the sphere of radius `rho` about the origin inside the
/// ball of radius `r` centred at distance `a`.
pub(crate) fn cap_fraction(n: usize, a: f64, r: f64, rho: f64) -> f64 {
    if rho + a <= r {
        return 1.0;
    }
    if rho <= a - r || rho >= a + r {
        return 0.0;
    }
    let h = ((rho * rho + a * a - r * r) / (2.0 * a * rho)).clamp(-1.0, 1.0);
    let th = h.acos();
    match n {
        1 => unreachable!(),
        2 => th / PI,
        3 => 0.5 * (1.0 - h),
        _ => {
            let k = (n - 2) as i32;
            let norm = PI.sqrt() * gamma((n as f64 - 1.0) / 2.0) / gamma(n as f64 / 2.0);
            integrate(|s: f64| s.sin().powi(k), 0.0, th, tight()).value / norm
        }
    }
}

/// `⟨h(|x|)⟩` over the ball of radius `r` centred at distance `a` from the
/// origin; `breaks` are radii where `h` is not smooth.
pub fn ball_average_radial(h: &(dyn Fn(f64) -> f64 + Sync), n: usize, a: f64, r: f64, breaks: &[f64]) -> Quad {
    let mut knots = vec![0.0, (a - r).abs(), a + r];
    knots.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < a + r));
    if n == 1 {
        // interval [a-r, a+r]
        let (lo, hi) = (a - r, a + r);
        let mut k = vec![lo, hi];
        for b in knots.iter().chain(breaks) {
            for s in [*b, -*b] {
                if s > lo && s < hi {
                    k.push(s);
                }
            }
        }
        k.sort_by(f64::total_cmp);
        k.dedup();
        let f = |x: f64| {
            let v = h(x.abs());
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let q = integrate_pieces(&f, &k, tight());
        return Quad { value: q.value / (2.0 * r), abs_err: q.abs_err / (2.0 * r) };
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let nf = n as f64;
    let f = |rho: f64| {
        if rho <= 0.0 {
            return 0.0;
        }
        let c = cap_fraction(n, a, r, rho);
        if c == 0.0 {
            return 0.0;
        }
        let v = h(rho) * rho.powf(nf - 1.0) * c;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let q = integrate_pieces(&f, &knots, tight());
    let scale = sphere_area(n) / (ball_volume(n) * r.powf(nf));
    Quad { value: q.value * scale, abs_err: q.abs_err * scale }
}

/// Mean and variance of a radial test function over a ball.
pub fn ball_mean_var(g: &TestFunction, a: f64, r: f64) -> Result<(f64, f64)> {
    if !g.is_radial() {
        return Err(Error::InvalidParameter("ball averages need a radial function".into()));
    }
    let br = g.radial_breaks();
    let m = ball_average_radial(&|s| g.radial(s), g.n, a, r, &br).value;
    let v = ball_average_radial(&|s| (g.radial(s) - m).powi(2), g.n, a, r, &br).value;
    Ok((m, v.max(0.0)))
}

/// Balls `B(a e₁, r)` (or kernel points `(a e₁, t(r))`) with `a` on a grid
/// and `r` in a list, followed by golden-section refinement in `a` around
/// the best grid value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayProbe {
    pub offsets: Vec<f64>,
    pub radii: Vec<f64>,
    pub refine: usize,
}

impl Default for RayProbe {
    fn default() -> Self {
        RayProbe { offsets: (0..=150).map(|j| j as f64 * 0.02).collect(), radii: vec![1.0], refine: 40 }
    }
}

impl RayProbe {
    /// Centred balls `B(0, 2^j)`, the ball counterpart of the kernel scale ray `(0, 2^j)`.
    pub fn scale_ray() -> Self {
        RayProbe { offsets: vec![0.0], radii: (-10..=10).map(|j| 2f64.powi(j)).collect(), refine: 0 }
    }

    fn sup(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> (f64, f64, f64) {
        let grid: Vec<(f64, f64)> = self.radii.iter().flat_map(|&r| self.offsets.iter().map(move |&a| (a, r))).collect();
        let vals: Vec<f64> = grid.par_iter().map(|&(a, r)| f(a, r)).collect();
        let (mut best, mut at, mut rad) = (f64::NEG_INFINITY, 0.0, 1.0);
        for (&(a, r), v) in grid.iter().zip(&vals) {
            if *v > best {
                (best, at, rad) = (*v, a, r);
            }
        }
        if self.refine > 0 && self.offsets.len() > 1 {
            let h = self.offsets[1] - self.offsets[0];
            let (x, v) = golden_max(|a| f(a, rad), (at - h).max(0.0), at + h, self.refine);
            if v > best {
                best = v;
                at = x;
            }
        }
        (best, at, rad)
    }
}

/// `sup_B (⟨φ²⟩_B − ⟨φ⟩_B²)^{1/2}` over the probe balls; an estimate from
/// below. Returns `(norm, offset, radius)` of the best ball.
pub fn star_norm_radial(g: &TestFunction, probe: &RayProbe) -> Result<(f64, f64, f64)> {
    if !g.is_radial() {
        return Err(Error::InvalidParameter("star norm estimate needs a radial function".into()));
    }
    let (v, a, r) = probe.sup(|a, r| ball_mean_var(g, a, r).map(|x| x.1).unwrap_or(f64::NAN));
    Ok((v.sqrt(), a, r))
}

/// `sup_z` of the kernel variance over `z = (a e₁, r²)` (heat) or
/// `(a e₁, r)` (Poisson).
pub fn k_norm_ray(k: KernelKind, g: &TestFunction, probe: &RayProbe) -> Result<(f64, f64, f64)> {
    let n = g.n;
    let (v, a, r) = probe.sup(|a, r| {
        let t = match k {
            KernelKind::Heat => r * r,
            KernelKind::Poisson => r,
        };
        let mut y = vec![0.0; n];
        y[0] = a;
        k_variance(k, g, &SpaceTimePoint { y, t }).map(|e| if e.divergent { f64::INFINITY } else { e.value }).unwrap_or(f64::NAN)
    });
    Ok((v.sqrt(), a, r))
}

/// `‖φ‖_K / ‖φ‖_*` with both norms estimated by the same ray probe.
pub fn norm_ratio(k: KernelKind, g: &TestFunction, probe: &RayProbe) -> Result<DimReport> {
    let (kn, ka, _) = k_norm_ray(k, g, probe)?;
    let (sn, sa, _) = star_norm_radial(g, probe)?;
    let ratio = kn / sn;
    Ok(DimReport {
        n: g.n,
        lhs: kn,
        rhs: sn,
        ratio,
        pass: ratio.is_finite(),
        notes: format!(
            "{k} norm attained at offset {ka:.4}, ball norm at offset {sa:.4}; ratio/√n = {:.6}",
            ratio / (g.n as f64).sqrt()
        ),
    })
}

/// `max |⟨φ⟩_{B_{r₁}} − ⟨φ⟩_{B_{r₂}}|` over centred balls against
/// `n |log(r₁/r₂)| ‖φ‖_*`; the ratio column is the largest per-pair ratio.
pub fn mean_oscillation_log_bound(g: &TestFunction, pairs: &[(f64, f64)], star_norm: f64) -> Result<DimReport> {
    if !g.is_radial() {
        return Err(Error::InvalidParameter("mean oscillation bound needs a radial function".into()));
    }
    let nf = g.n as f64;
    let br = g.radial_breaks();
    let mean = |r: f64| ball_average_radial(&|s| g.radial(s), g.n, 0.0, r, &br).value;
    let (mut lhs, mut rhs, mut ratio) = (0.0f64, 0.0f64, 0.0f64);
    for &(r1, r2) in pairs {
        if !(r1 > 0.0 && r2 > 0.0) {
            return Err(Error::InvalidParameter(format!("radii ({r1}, {r2})")));
        }
        let l = (mean(r1) - mean(r2)).abs();
        let rr = nf * (r1 / r2).ln().abs() * star_norm;
        lhs = lhs.max(l);
        rhs = rhs.max(rr);
        if rr > 0.0 {
            ratio = ratio.max(l / rr);
        }
    }
    Ok(DimReport {
        n: g.n,
        lhs,
        rhs,
        ratio,
        pass: ratio.is_finite(),
        notes: format!("{} radius pairs, ‖φ‖_* = {star_norm:.6}", pairs.len()),
    })
}

/// Supremum of the envelope over `|x₁| ≤ (log n + 1)μ` in the strip.
pub fn omega_window_bound(envelope: &GridFunction, mu: f64, n: usize) -> Result<f64> {
    let DomainSpec::Bmo { mu: m } = envelope.domain else {
        return Err(Error::InvalidDomain("window bound needs a parabolic strip".into()));
    };
    if n == 0 || !(mu > 0.0) || mu > m * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("μ = {mu} on a strip of width {m}, n = {n}")));
    }
    let w = ((n as f64).ln() + 1.0) * mu;
    if -w < envelope.u_min - 1e-12 || w > envelope.u_max + 1e-12 {
        return Err(Error::WindowOutOfRange(format!(
            "|x1| ≤ {w} against [{}, {}]",
            envelope.u_min, envelope.u_max
        )));
    }
    let vmax = mu * mu;
    let mut us: Vec<f64> = envelope.columns_in(-w, w).map(|i| envelope.u(i)).collect();
    us.push(-w);
    us.push(w);
    let rows = envelope.nv;
    let hv = envelope.hv();
    let mut best = f64::NEG_INFINITY;
    for &u in &us {
        let mut vs: Vec<f64> = (0..rows).map(|j| j as f64 * hv).filter(|v| *v <= vmax * (1.0 + 1e-12)).collect();
        vs.push(vmax);
        for v in vs {
            best = best.max(envelope.eval_intrinsic(u, v.min(vmax)));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JnRecord {
    pub z: SpaceTimePoint,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JnReport {
    pub kernel: KernelKind,
    pub n: usize,
    /// Probe estimate of `‖cφ‖_K`.
    pub norm: f64,
    pub c_k: f64,
    pub eps_k: f64,
    pub records: Vec<JnRecord>,
    /// Largest `lhs / rhs`.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// `χ_{|cφ − (cφ)_K(z)| > λ}` extended to `z` against `C_K e^{−ε_K λ/‖cφ‖_K}`.
pub fn jn_constants(
    k: KernelKind,
    phi: &TestFunction,
    scale: f64,
    pairs: &[(SpaceTimePoint, f64)],
    probe: &ProbeSet,
    c_k: f64,
    eps_k: f64,
) -> Result<JnReport> {
    let norm = k_bmo_norm(k, phi, probe)?.value * scale.abs();
    if !norm.is_finite() {
        return Err(Error::Divergent(format!("‖φ‖_{k} is not finite on the probe set")));
    }
    let lin = Transform::identity().then(crate::semigroup::Op::Affine(scale, 0.0));
    let records: Vec<JnRecord> = pairs
        .par_iter()
        .map(|(z, lambda)| {
            let m = extend(k, phi, &lin, z)?.finite_value()?;
            let lhs = if *lambda < 0.0 {
                1.0
            } else {
                let f = BoundaryProfile::indicator(*lambda)?;
                let e = extend(k, phi, &Transform::profile(f, scale, -m), z)?;
                e.finite_value()? - e.abs_err
            };
            let rhs = if norm > 0.0 { c_k * (-eps_k * lambda / norm).exp() } else { 0.0 };
            Ok(JnRecord { z: z.clone(), lambda: *lambda, lhs, rhs, pass: lhs <= rhs + 1e-10 })
        })
        .collect::<Result<_>>()?;
    let worst_ratio = records.iter().map(|r| if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 }).fold(0.0, f64::max);
    let pass = records.iter().all(|r| r.pass);
    Ok(JnReport { kernel: k, n: phi.n, norm, c_k, eps_k, records, worst_ratio, pass })
}

/// Random `(z, λ)`: `y` uniform in `[-2, 2]^n`, `t` log-uniform in
/// `[2^-4, 2^4]`, `λ` uniform in `[0, λ_max]`.
pub fn random_jn_pairs(n: usize, count: usize, lambda_max: f64, seed: u64) -> Vec<(SpaceTimePoint, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let y = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t = 2f64.powf(rng.random_range(-4.0..4.0));
            (SpaceTimePoint { y, t }, rng.random_range(0.0..lambda_max))
        })
        .collect()
}
