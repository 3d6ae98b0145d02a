//! Monte-Carlo checks of the stochastic picture behind the semigroup
//! extensions: a heat extension is read off from Brownian motion run for
//! time `2t`, a Poisson extension from Brownian motion in `n+1` dimensions
//! stopped on the boundary of the half-space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BellmanPoint, DomainSpec};
use crate::envelope::GridFunction;
use crate::error::{Error, Result};
use crate::semigroup::{extend, KernelKind, LogAbsTable, Op, Shape, SpaceTimePoint, TestFunction, Transform};

fn default_dt() -> f64 {
    1e-2
}
fn default_cap() -> f64 {
    2e-2
}
fn default_max_steps() -> usize {
    10_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kernel: KernelKind,
    pub n: usize,
    pub z0: SpaceTimePoint,
    pub paths: usize,
    /// Heat: time step. Poisson: relative step, the step at height `h` is `dt·h²`.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    pub seed: u64,
    /// Largest standard error accepted by [`verify_representation`].
    #[serde(default = "default_cap")]
    pub stderr_cap: f64,
    /// Steps after which the stepper finishes a path with the exact exit law.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl SimConfig {
    pub fn new(kernel: KernelKind, z0: SpaceTimePoint, paths: usize, seed: u64) -> Self {
        SimConfig {
            kernel,
            n: z0.dim(),
            z0,
            paths,
            dt: default_dt(),
            checkpoints: Vec::new(),
            seed,
            stderr_cap: default_cap(),
            max_steps: default_max_steps(),
        }
    }

    pub fn with_checkpoints(mut self, c: Vec<f64>) -> Self {
        self.checkpoints = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidParameter("at least one path".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if self.z0.dim() != self.n || self.n == 0 {
            return Err(Error::InvalidParameter(format!("start point in R^{} for n = {}", self.z0.dim(), self.n)));
        }
        if !(self.z0.t > 0.0) {
            return Err(Error::InvalidParameter("start height must be positive".into()));
        }
        if self.checkpoints.iter().any(|c| !(c.is_finite() && *c >= 0.0))
            || self.checkpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter("checkpoints must be strictly increasing and non-negative".into()));
        }
        if !(self.stderr_cap > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidParameter("stderr cap and step budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub paths_used: usize,
}

impl PathEstimate {
    /// Sequential reduction, so the result does not depend on scheduling.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (k, &x) in xs.iter().enumerate() {
            let d = x - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (x - mean);
        }
        let stderr = if n > 1 { (m2.max(0.0) / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
        PathEstimate { mean, stderr, paths_used: n }
    }
}

/// Generator for path `index`: one ChaCha stream per path.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `y + h·C` with `C` a standard Cauchy vector in `R^n`.
fn cauchy_exit(rng: &mut ChaCha8Rng, y: &[f64], h: f64) -> Vec<f64> {
    let g: Vec<f64> = (0..y.len()).map(|_| gauss(rng)).collect();
    let w = gauss(rng).abs();
    y.iter().zip(g).map(|(a, b)| a + h * b / w).collect()
}

fn exact_exit(k: KernelKind, rng: &mut ChaCha8Rng, y: &[f64], t: f64) -> Vec<f64> {
    match k {
        KernelKind::Heat => {
            let s = (2.0 * t).sqrt();
            y.iter().map(|a| a + s * gauss(rng)).collect()
        }
        KernelKind::Poisson => cauchy_exit(rng, y, t),
    }
}

fn per_path<T: Send>(cfg: &SimConfig, f: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..cfg.paths as u64).into_par_iter().map(|i| f(&mut path_rng(cfg.seed, i))).collect()
}

/// Exit positions on the boundary, sampled from the exact exit law.
pub fn sample_exit(cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    per_path(cfg, |rng| Ok(exact_exit(cfg.kernel, rng, &cfg.z0.y, cfg.z0.t)))
}

#[derive(Debug, Clone)]
struct State {
    y: Vec<f64>,
    h: f64,
}

fn bridge_crossing(a: f64, b: f64, dt: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        1.0
    } else {
        (-2.0 * a * b / dt).exp()
    }
}

const HIT: f64 = 1e-9;

/// Exit point of a Brownian bridge from `a` to `b` over time `dt`, given that
/// its height coordinate reaches zero. Halves the bridge, keeping the half
/// that holds the first crossing, until the height is below `HIT`.
fn bridge_exit(rng: &mut ChaCha8Rng, mut a: State, mut b: State, mut dt: f64) -> Vec<f64> {
    loop {
        if a.h < HIT || dt < 1e-30 {
            return a.y;
        }
        if b.h <= 0.0 && b.h > -HIT {
            return b.y;
        }
        let s = (dt / 4.0).sqrt();
        let mid = State {
            y: a.y.iter().zip(&b.y).map(|(p, q)| 0.5 * (p + q) + s * gauss(rng)).collect(),
            h: 0.5 * (a.h + b.h) + s * gauss(rng),
        };
        dt *= 0.5;
        let p1 = bridge_crossing(a.h, mid.h, dt);
        let p2 = bridge_crossing(mid.h, b.h, dt);
        let first = p1 >= 1.0 || rng.random::<f64>() * (p1 + (1.0 - p1) * p2) < p1;
        if first {
            b = mid;
        } else {
            a = mid;
        }
    }
}

/// Advances a Poisson path by `budget` time units or until it exits. Returns
/// whether it exited; the state is then the exit point at height 0.
fn poisson_advance(rng: &mut ChaCha8Rng, st: &mut State, budget: f64, dt: f64, steps: &mut usize, max: usize) -> bool {
    let mut left = budget;
    while left > 0.0 && *steps < max {
        let h = (dt * st.h * st.h).min(left);
        let s = h.sqrt();
        let next = State { y: st.y.iter().map(|v| v + s * gauss(rng)).collect(), h: st.h + s * gauss(rng) };
        *steps += 1;
        let p = bridge_crossing(st.h, next.h, h);
        if p >= 1.0 || (p > 1e-300 && rng.random::<f64>() < p) {
            // crossed inside this step; the conditioned bridge is resampled
            // piece by piece, which is exact for the first passage
            let prev = std::mem::replace(st, State { y: Vec::new(), h: 0.0 });
            st.y = bridge_exit_conditioned(rng, prev, next, h, p);
            st.h = 0.0;
            return true;
        }
        *st = next;
        left -= h;
        if st.h < HIT {
            st.h = 0.0;
            return true;
        }
    }
    false
}

/// As [`bridge_exit`]; when the endpoint is above the boundary the crossing is
/// conditioned on by rejection within the halving.
fn bridge_exit_conditioned(rng: &mut ChaCha8Rng, a: State, b: State, dt: f64, p: f64) -> Vec<f64> {
    if p >= 1.0 {
        return bridge_exit(rng, a, b, dt);
    }
    // endpoint above zero: the first crossing lies strictly inside; halve
    // with the crossing probabilities renormalised
    let (mut a, mut b, mut dt) = (a, b, dt);
    loop {
        if a.h < HIT || dt < 1e-30 {
            return a.y;
        }
        let s = (dt / 4.0).sqrt();
        let mid = State {
            y: a.y.iter().zip(&b.y).map(|(p, q)| 0.5 * (p + q) + s * gauss(rng)).collect(),
            h: 0.5 * (a.h + b.h) + s * gauss(rng),
        };
        dt *= 0.5;
        let p1 = bridge_crossing(a.h, mid.h, dt);
        let p2 = bridge_crossing(mid.h, b.h, dt);
        let total = p1 + (1.0 - p1) * p2;
        if total <= 0.0 {
            return a.y;
        }
        if p1 >= 1.0 || rng.random::<f64>() * total < p1 {
            if mid.h <= 0.0 {
                return bridge_exit(rng, a, mid, dt);
            }
            b = mid;
        } else {
            a = mid;
        }
    }
}

/// Exit positions from simulated paths. Heat: Brownian increments of size
/// `dt` up to time `2t₀`. Poisson: steps of `dt·h²` at height `h` with a
/// bridge test for crossings inside a step; after `max_steps` the path is
/// finished with the exact exit law from where it stands.
pub fn sample_exit_stepped(cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    per_path(cfg, |rng| {
        Ok(match cfg.kernel {
            KernelKind::Heat => {
                let total = 2.0 * cfg.z0.t;
                let steps = (total / cfg.dt).ceil().max(1.0) as usize;
                let h = total / steps as f64;
                let mut y = cfg.z0.y.clone();
                for _ in 0..steps {
                    for v in y.iter_mut() {
                        *v += h.sqrt() * gauss(rng);
                    }
                }
                y
            }
            KernelKind::Poisson => {
                let mut st = State { y: cfg.z0.y.clone(), h: cfg.z0.t };
                let mut steps = 0;
                if poisson_advance(rng, &mut st, f64::INFINITY, cfg.dt, &mut steps, cfg.max_steps) {
                    return Ok(st.y);
                }
                cauchy_exit(rng, &st.y, st.h)
            }
        })
    })
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value at the 1% level: `1.63/√N` for one sample, `1.63·√(2/N)`
/// for two samples of size `N`.
pub fn ks_threshold(n: usize, two_sample: bool) -> f64 {
    let f = if two_sample { 2.0 } else { 1.0 };
    1.63 * (f / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationCheck {
    pub estimate: PathEstimate,
    pub reference: f64,
    pub reference_err: f64,
    pub pass: bool,
}

/// Compares `E g(Z_∞)` over exact exit samples with the quadrature value of
/// the extension at `z₀`.
pub fn verify_representation(cfg: &SimConfig, g: &TestFunction) -> Result<RepresentationCheck> {
    cfg.validate()?;
    if g.n != cfg.n {
        return Err(Error::InvalidParameter(format!("function on R^{} for paths in R^{}", g.n, cfg.n)));
    }
    let r = extend(cfg.kernel, g, &Transform::identity(), &cfg.z0)?;
    if r.divergent {
        return Err(Error::Divergent(r.diagnostic.unwrap_or_else(|| "reference extension".into())));
    }
    let vals = per_path(cfg, |rng| Ok(g.value(&exact_exit(cfg.kernel, rng, &cfg.z0.y, cfg.z0.t))))?;
    let estimate = PathEstimate::from_samples(&vals);
    let slack = 3.0 * estimate.stderr + r.abs_err + 1e-12 * (1.0 + r.value.abs());
    let pass = (estimate.mean - r.value).abs() <= slack && estimate.stderr <= cfg.stderr_cap;
    Ok(RepresentationCheck { estimate, reference: r.value, reference_err: r.abs_err, pass })
}

/// `c·g` and its square, extended to points of the half-space and
/// evaluated on the boundary.
pub struct Observable {
    pub g: TestFunction,
    pub scale: f64,
    table: Option<LogAbsTable>,
    kernel: KernelKind,
}

impl Observable {
    /// For `log|x|` the extensions come from a scale-invariant table.
    pub fn new(kernel: KernelKind, g: TestFunction, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale != 0.0) {
            return Err(Error::InvalidParameter(format!("scale {scale}")));
        }
        let table = match g.shape {
            Shape::LogAbs => Some(LogAbsTable::build(kernel, g.n, 1025)?),
            _ => None,
        };
        Ok(Observable { g, scale, table, kernel })
    }

    /// `Φ(z) = (φ_K(z), (φ²)_K(z))`; on the boundary `(φ(y), φ(y)²)`.
    pub fn phi(&self, y: &[f64], t: f64) -> Result<BellmanPoint> {
        let c = self.scale;
        if t <= 0.0 {
            let v = c * self.g.value(y);
            return Ok(BellmanPoint { x1: v, x2: v * v });
        }
        let z = SpaceTimePoint { y: y.to_vec(), t };
        if let Some(tab) = &self.table {
            let (m1, m2) = tab.moments(&z)?;
            return Ok(BellmanPoint { x1: c * m1, x2: c * c * m2 });
        }
        let lin = Transform::identity().then(Op::Affine(c, 0.0));
        let a = extend(self.kernel, &self.g, &lin, &z)?;
        let b = extend(self.kernel, &self.g, &lin.then(Op::Square), &z)?;
        if a.divergent || b.divergent {
            return Err(Error::Divergent(format!("extension diverges at y = {y:?}, t = {t}")));
        }
        Ok(BellmanPoint { x1: a.value, x2: b.value })
    }
}

/// A candidate `U` on the parabolic strip.
pub enum Candidate<'a> {
    Grid(&'a GridFunction),
    Closed(Box<dyn Fn(&BellmanPoint) -> f64 + Sync + 'a>),
}

impl Candidate<'_> {
    fn eval(&self, x: &BellmanPoint) -> Result<f64> {
        match self {
            Candidate::Closed(f) => Ok(f(x)),
            Candidate::Grid(g) => {
                let DomainSpec::Bmo { mu } = g.domain else {
                    return Err(Error::InvalidDomain("candidate must live on a parabolic strip".into()));
                };
                let v = x.x2 - x.x1 * x.x1;
                let tol = 1e-9 * (1.0 + x.x2.abs());
                if v < -tol || v > mu * mu + tol {
                    return Err(Error::PremiseFailed(format!(
                        "Φ = ({}, {}) leaves the strip of width {mu}",
                        x.x1, x.x2
                    )));
                }
                let u = x.x1;
                if u < g.u_min || u > g.u_max {
                    return Err(Error::WindowOutOfRange(format!("x1 = {u} outside [{}, {}]", g.u_min, g.u_max)));
                }
                Ok(g.eval_intrinsic(u, v.clamp(0.0, mu * mu)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointEstimate {
    pub time: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleCheck {
    pub checkpoints: Vec<CheckpointEstimate>,
    /// `E U(Φ_∞)`.
    pub terminal: PathEstimate,
    /// Largest `mean_{i+1} - mean_i - 2(se_i + se_{i+1})` over adjacent pairs.
    pub worst_excess: f64,
    pub pass: bool,
}

/// Estimates `E U(Φ_t)` at the checkpoints and at exit, and tests that the
/// sequence does not increase beyond Monte-Carlo slack.
pub fn verify_supermartingale(cfg: &SimConfig, u: &Candidate, phi: &Observable) -> Result<SupermartingaleCheck> {
    cfg.validate()?;
    if phi.g.n != cfg.n {
        return Err(Error::InvalidParameter("observable and paths in different dimensions".into()));
    }
    if cfg.checkpoints.is_empty() {
        return Err(Error::InvalidParameter("no checkpoints".into()));
    }
    let (y0, t0) = (&cfg.z0.y, cfg.z0.t);
    let rows: Vec<Vec<f64>> = per_path(cfg, |rng| {
        let mut out = Vec::with_capacity(cfg.checkpoints.len() + 1);
        let mut st = State { y: y0.clone(), h: t0 };
        let mut now = 0.0;
        let mut done = false;
        let mut steps = 0;
        for &c in &cfg.checkpoints {
            if !done {
                match cfg.kernel {
                    KernelKind::Heat => {
                        let c = c.min(2.0 * t0);
                        let s = (c - now).sqrt();
                        for v in st.y.iter_mut() {
                            *v += s * gauss(rng);
                        }
                        st.h = t0 - c / 2.0;
                        done = c >= 2.0 * t0;
                    }
                    KernelKind::Poisson => {
                        done = poisson_advance(rng, &mut st, c - now, cfg.dt, &mut steps, cfg.max_steps);
                        if !done && steps >= cfg.max_steps {
                            return Err(Error::NonConvergence { iterations: steps, max_delta: st.h });
                        }
                    }
                }
                now = c;
            }
            out.push(u.eval(&phi.phi(&st.y, if done { 0.0 } else { st.h })?)?);
        }
        let exit = if done { st.y } else { exact_exit(cfg.kernel, rng, &st.y, st.h) };
        out.push(u.eval(&phi.phi(&exit, 0.0)?)?);
        Ok(out)
    })?;
    let m = cfg.checkpoints.len();
    let column = |k: usize| PathEstimate::from_samples(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let checkpoints: Vec<CheckpointEstimate> = (0..m)
        .map(|k| {
            let e = column(k);
            CheckpointEstimate { time: cfg.checkpoints[k], mean: e.mean, stderr: e.stderr }
        })
        .collect();
    let terminal = column(m);
    let mut seq: Vec<(f64, f64)> = checkpoints.iter().map(|c| (c.mean, c.stderr)).collect();
    seq.push((terminal.mean, terminal.stderr));
    let worst_excess = seq
        .windows(2)
        .map(|w| w[1].0 - w[0].0 - 2.0 * (w[0].1 + w[1].1))
        .fold(f64::NEG_INFINITY, f64::max);
    let overall = seq[0].0 >= terminal.mean - 2.0 * terminal.stderr;
    Ok(SupermartingaleCheck { checkpoints, terminal, worst_excess, pass: worst_excess <= 0.0 && overall })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: KernelKind, paths: usize) -> SimConfig {
        SimConfig::new(k, SpaceTimePoint::on_axis(1, 1.0).unwrap(), paths, 7)
    }

    #[test]
    fn constant_is_exact() {
        let g = TestFunction::constant(2.5, 1).unwrap();
        for k in KernelKind::ALL {
            let r = verify_representation(&cfg(k, 1000), &g).unwrap();
            assert!(r.pass);
            assert_eq!(r.estimate.mean, 2.5);
            assert_eq!(r.estimate.stderr, 0.0);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let g = TestFunction::quadratic(1).unwrap();
        let a = verify_representation(&cfg(KernelKind::Heat, 5000), &g).unwrap();
        let b = verify_representation(&cfg(KernelKind::Heat, 5000), &g).unwrap();
        assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
        assert_eq!(a.estimate.stderr.to_bits(), b.estimate.stderr.to_bits());
        let x = sample_exit_stepped(&cfg(KernelKind::Poisson, 200)).unwrap();
        let y = sample_exit_stepped(&cfg(KernelKind::Poisson, 200)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn exact_sampler_has_the_kernel_law() {
        let xs: Vec<f64> = sample_exit(&cfg(KernelKind::Poisson, 20000)).unwrap().into_iter().map(|v| v[0]).collect();
        let d = ks_one_sample(&xs, |x| 0.5 + x.atan() / std::f64::consts::PI);
        assert!(d <= ks_threshold(xs.len(), false), "{d}");
        let xs: Vec<f64> = sample_exit(&cfg(KernelKind::Heat, 20000)).unwrap().into_iter().map(|v| v[0]).collect();
        let d = ks_one_sample(&xs, |x| 0.5 * (1.0 + statrs::function::erf::erf(x / 2.0)));
        assert!(d <= ks_threshold(xs.len(), false), "{d}");
    }

    #[test]
    fn ks_two_sample_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        assert!((ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heat_height_shrinks_deterministically() {
        // U = x2 is a martingale; a quadratic observable gives x2 = c²((y)² + 2h)
        let g = TestFunction::quadratic(1).unwrap();
        let phi = Observable::new(KernelKind::Heat, g, 1.0).unwrap();
        let c = cfg(KernelKind::Heat, 4000).with_checkpoints(vec![0.0, 0.5, 1.0, 1.5]);
        let u = Candidate::Closed(Box::new(|x: &BellmanPoint| x.x2));
        let r = verify_supermartingale(&c, &u, &phi).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checkpoints[0].stderr, 0.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = cfg(KernelKind::Heat, 10);
        c.checkpoints = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        c.checkpoints.clear();
        c.paths = 0;
        assert!(c.validate().is_err());
    }
}
