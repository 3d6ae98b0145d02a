//! Suprema over probe points of the semigroup BMO norm and A_p characteristic.

use rayon::prelude::*;
use serde::Serialize;

use super::extend::{extend, Extension};
use super::kernel::{KernelKind, SpaceTimePoint};
use super::testfn::{Shape, TestFunction, Transform};
use crate::error::{Error, Result};

/// Points `z` at which a supremum over the half-space is sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    pub points: Vec<SpaceTimePoint>,
    pub strategy: String,
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base as u64) as f64;
        i /= base as u64;
        f /= b;
    }
    out
}

impl ProbeSet {
    /// `(0, 2^j)` for `j` in the range.
    pub fn ray(n: usize, j: std::ops::RangeInclusive<i32>) -> Self {
        let (a, b) = (*j.start(), *j.end());
        let points = j.map(|j| SpaceTimePoint { y: vec![0.0; n], t: 2f64.powi(j) }).collect();
        ProbeSet { points, strategy: format!("ray (0, 2^j), j = {a}..{b}") }
    }

    /// Halton points: `y` uniform in `[-w, w]^n`, `log t` uniform in `[log t0, log t1]`.
    pub fn halton(n: usize, count: usize, half_width: f64, t_range: (f64, f64)) -> Result<Self> {
        if n + 1 > PRIMES.len() {
            return Err(Error::InvalidParameter(format!("quasi-random probes support n ≤ {}", PRIMES.len() - 1)));
        }
        if !(half_width >= 0.0 && t_range.0 > 0.0 && t_range.1 >= t_range.0) {
            return Err(Error::InvalidParameter("probe box".into()));
        }
        let (l0, l1) = (t_range.0.ln(), t_range.1.ln());
        let points = (1..=count as u64)
            .map(|i| {
                let y = (0..n).map(|d| half_width * (2.0 * radical_inverse(i, PRIMES[d]) - 1.0)).collect();
                let t = (l0 + (l1 - l0) * radical_inverse(i, PRIMES[n])).exp();
                SpaceTimePoint { y, t }
            })
            .collect();
        Ok(ProbeSet {
            points,
            strategy: format!(
                "{count} Halton points, y in [-{half_width}, {half_width}]^{n}, t in [{:e}, {:e}] log-uniform",
                t_range.0, t_range.1
            ),
        })
    }

    /// The scale ray `j = -10..10` plus 1000 Halton points in `[-2, 2]^n × [2^-6, 2^6]`.
    pub fn default_for(n: usize) -> Result<Self> {
        Ok(Self::ray(n, -10..=10).union(Self::halton(n, 1000, 2.0, (2f64.powi(-6), 2f64.powi(6)))?))
    }

    pub fn union(mut self, other: ProbeSet) -> Self {
        self.points.extend(other.points);
        self.strategy = format!("{}; {}", self.strategy, other.strategy);
        self
    }
}

/// Supremum over a probe set; a lower bound for the supremum over the half-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSup {
    /// `+∞` when an evaluation diverged or the scale ray grows without bound.
    pub value: f64,
    pub argmax: Option<SpaceTimePoint>,
    pub evaluated: usize,
    /// Values along the `y = 0` probes grow geometrically with `t`.
    pub unbounded_ray: bool,
    pub diagnostic: Option<String>,
    pub strategy: String,
}

/// `(K*φ², (K*φ)²)` as `K*(φ - K*φ)²`.
pub fn k_variance(k: KernelKind, phi: &TestFunction, z: &SpaceTimePoint) -> Result<Extension> {
    let m = extend(k, phi, &Transform::identity(), z)?;
    if m.divergent {
        return Ok(m);
    }
    let mut v = extend(k, phi, &Transform::centered_square(m.value), z)?;
    v.value = v.value.max(0.0);
    Ok(v)
}

fn sup_over(probe: &ProbeSet, eval: impl Fn(&SpaceTimePoint) -> Result<Extension> + Sync) -> Result<ProbeSup> {
    let values: Vec<Extension> = probe.points.par_iter().map(&eval).collect::<Result<_>>()?;
    let mut out = ProbeSup {
        value: f64::NEG_INFINITY,
        argmax: None,
        evaluated: values.len(),
        unbounded_ray: false,
        diagnostic: None,
        strategy: probe.strategy.clone(),
    };
    for (z, v) in probe.points.iter().zip(&values) {
        if v.divergent {
            out.value = f64::INFINITY;
            out.argmax = Some(z.clone());
            out.diagnostic = v.diagnostic.clone();
            return Ok(out);
        }
        if v.value > out.value {
            out.value = v.value;
            out.argmax = Some(z.clone());
        }
    }
    let mut ray: Vec<(f64, f64)> = probe
        .points
        .iter()
        .zip(&values)
        .filter(|(z, _)| z.y.iter().all(|v| *v == 0.0))
        .map(|(z, v)| (z.t, v.value))
        .collect();
    ray.sort_by(|a, b| a.0.total_cmp(&b.0));
    if ray.len() >= 4 {
        let tail = &ray[ray.len() - 4..];
        let growing = tail.windows(2).all(|w| w[0].1 > 0.0 && w[1].1 >= 1.1 * w[0].1);
        if growing && tail[3].1 >= out.value {
            out.unbounded_ray = true;
            out.value = f64::INFINITY;
            out.diagnostic = Some(format!(
                "values along the scale ray grow geometrically up to t = {:e}",
                tail[3].0
            ));
        }
    }
    Ok(out)
}

/// `sup_z (K*φ² - (K*φ)²)^{1/2}` over the probe set.
pub fn k_bmo_norm(k: KernelKind, phi: &TestFunction, probe: &ProbeSet) -> Result<ProbeSup> {
    check_dims(phi, probe)?;
    sup_over(probe, |z| {
        let mut v = k_variance(k, phi, z)?;
        v.value = v.value.sqrt();
        Ok(v)
    })
}

fn check_dims(g: &TestFunction, probe: &ProbeSet) -> Result<()> {
    if probe.points.is_empty() {
        return Err(Error::InvalidParameter("empty probe set".into()));
    }
    if let Some(z) = probe.points.iter().find(|z| z.dim() != g.n) {
        return Err(Error::InvalidParameter(format!("probe in R^{} for a function on R^{}", z.dim(), g.n)));
    }
    Ok(())
}

fn is_positive(w: &TestFunction) -> bool {
    match &w.shape {
        Shape::Constant { c } => *c > 0.0,
        Shape::RadialStep { a, b, .. } => *a > 0.0 && *b > 0.0,
        Shape::PowerWeight { .. } => true,
        Shape::SampledRadial { values, .. } => values.iter().all(|v| *v > 0.0),
        _ => false,
    }
}

/// `sup_z (K*w)(K*w^{-1/(p-1)})^{p-1}`, or `sup_z (K*w) e^{-K*log w}` for `p = ∞`.
pub fn ap_characteristic_k(k: KernelKind, w: &TestFunction, p: f64, probe: &ProbeSet) -> Result<ProbeSup> {
    check_dims(w, probe)?;
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must exceed 1")));
    }
    if !is_positive(w) {
        return Err(Error::InvalidParameter("weight must be positive".into()));
    }
    sup_over(probe, |z| {
        let a = extend(k, w, &Transform::identity(), z)?;
        if a.divergent {
            return Ok(a);
        }
        let (b, value) = if p.is_infinite() {
            let b = extend(k, w, &Transform::log(), z)?;
            let v = a.value * (-b.value).exp();
            (b, v)
        } else {
            let b = extend(k, w, &Transform::power(-1.0 / (p - 1.0)), z)?;
            let v = a.value * b.value.powf(p - 1.0);
            (b, v)
        };
        if b.divergent {
            return Ok(b);
        }
        Ok(Extension { value, abs_err: a.abs_err + b.abs_err, divergent: false, diagnostic: None })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_zero_norm_and_unit_characteristic() {
        let probe = ProbeSet::ray(2, -3..=3);
        let c = TestFunction::constant(3.0, 2).unwrap();
        assert_eq!(k_bmo_norm(KernelKind::Heat, &c, &probe).unwrap().value, 0.0);
        let one = TestFunction::constant(1.0, 2).unwrap();
        for k in KernelKind::ALL {
            for p in [1.5, 2.0, f64::INFINITY] {
                assert!((ap_characteristic_k(k, &one, p, &probe).unwrap().value - 1.0).abs() < 1e-14);
            }
        }
        assert!(ap_characteristic_k(KernelKind::Heat, &one, 1.0, &probe).is_err());
    }

    #[test]
    fn linear_is_unbounded_under_heat() {
        let lin = TestFunction::linear(vec![1.0]).unwrap();
        let r = k_bmo_norm(KernelKind::Heat, &lin, &ProbeSet::ray(1, -10..=10)).unwrap();
        assert!(r.unbounded_ray && r.value.is_infinite());
    }

    #[test]
    fn log_abs_norm_is_scale_invariant() {
        let g = TestFunction::log_abs(1).unwrap();
        let vals: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&t| k_variance(KernelKind::Heat, &g, &SpaceTimePoint::on_axis(1, t).unwrap()).unwrap().value)
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-6 * vals[0]);
        }
        // ¼ψ₁(1/2) = π²/8
        assert!((vals[0] - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-8);
    }

    #[test]
    fn power_weight_characteristic_constant_along_ray() {
        let w = TestFunction::power_weight(0.5, 1).unwrap();
        let vals: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&t| {
                let probe = ProbeSet { points: vec![SpaceTimePoint::on_axis(1, t).unwrap()], strategy: String::new() };
                ap_characteristic_k(KernelKind::Heat, &w, 2.0, &probe).unwrap().value
            })
            .collect();
        assert!(vals[0].is_finite() && vals[0] > 1.0);
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-6 * vals[0]);
        }
    }

    #[test]
    fn poisson_excludes_steep_power_weight() {
        let w = TestFunction::power_weight(-1.8, 2).unwrap();
        let r = ap_characteristic_k(KernelKind::Poisson, &w, 2.0, &ProbeSet::ray(2, 0..=0)).unwrap();
        assert!(r.value.is_infinite() && r.diagnostic.is_some());
    }

    #[test]
    fn halton_points_fill_the_box() {
        let p = ProbeSet::halton(2, 200, 2.0, (0.5, 8.0)).unwrap();
        assert_eq!(p.points.len(), 200);
        assert!(p.points.iter().all(|z| z.y.iter().all(|v| v.abs() <= 2.0) && z.t >= 0.5 && z.t <= 8.0));
        let d = ProbeSet::default_for(1).unwrap();
        assert_eq!(d.points.len(), 1021);
    }
}
