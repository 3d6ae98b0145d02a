//! Lower bounds for Bellman functions from explicit step functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{BellmanPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::interval::{ap_characteristic_interval, bmo_norm_interval, functional_average, StepFunction};
use crate::profile::BoundaryProfile;
use crate::quadrature::bisect;

const ADMISSIBLE_SLACK: f64 = 1e-9;
const DETERMINISTIC_CANDIDATES: usize = 33;

#[derive(Debug, Clone)]
pub struct SampledBound {
    pub value: f64,
    pub tried: usize,
    pub admissible: usize,
    /// No admissible sample was found; `value` is `f(x1)`.
    pub fallback: bool,
    pub best: Option<StepFunction>,
}

/// Largest `⟨f∘η⟩` over sampled admissible step functions with averages `x`.
pub fn lower_bound_sampler(
    d: &DomainSpec,
    f: &BoundaryProfile,
    x: &BellmanPoint,
    budget: usize,
    seed: u64,
) -> Result<SampledBound> {
    let (_, v) = d.to_intrinsic(x)?;
    let v = v.max(0.0);
    let mut out = SampledBound { value: f64::NEG_INFINITY, tried: 0, admissible: 0, fallback: false, best: None };
    if v <= 1e-14 * d.v_max() {
        let c = StepFunction::constant(0.0, 1.0, x.x1)?;
        out.value = f.eval(x.x1)?;
        out.tried = 1;
        out.admissible = 1;
        out.best = Some(c);
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let consider = |eta: StepFunction, out: &mut SampledBound| -> Result<()> {
        out.tried += 1;
        let ok = match *d {
            DomainSpec::Bmo { mu } => bmo_norm_interval(&eta) <= mu * (1.0 + ADMISSIBLE_SLACK),
            DomainSpec::Ap { p, delta } => ap_characteristic_interval(&eta, p)? <= delta * (1.0 + ADMISSIBLE_SLACK),
            DomainSpec::AInf { delta } => {
                ap_characteristic_interval(&eta, f64::INFINITY)? <= delta * (1.0 + ADMISSIBLE_SLACK)
            }
        };
        if ok {
            out.admissible += 1;
            let val = functional_average(&eta, f)?;
            if val > out.value {
                out.value = val;
                out.best = Some(eta);
            }
        }
        Ok(())
    };

    match *d {
        DomainSpec::Bmo { mu } => {
            // two values a > b on [0,q), [q,1]: admissible iff q(1−q) ≥ v/(4μ²)
            let disc = (1.0 - v / (mu * mu)).max(0.0);
            let q_min = 0.5 * (1.0 - disc.sqrt());
            for k in 0..DETERMINISTIC_CANDIDATES {
                let t = k as f64 / (DETERMINISTIC_CANDIDATES - 1) as f64;
                let q = (q_min + t * (1.0 - 2.0 * q_min)).clamp(1e-9, 1.0 - 1e-9);
                let dd = (v / (q * (1.0 - q))).sqrt();
                let eta = StepFunction::new(0.0, 1.0, vec![q], vec![x.x1 + (1.0 - q) * dd, x.x1 - q * dd])?;
                consider(eta, &mut out)?;
            }
            for _ in 0..budget {
                let eta0 = random_steps(&mut rng, |r| r.sample::<f64, _>(StandardNormal))?;
                let m = eta0.mean();
                let var: f64 = eta0.pieces().map(|(l, r, y)| (r - l) * (y - m) * (y - m)).sum();
                if var <= 1e-14 {
                    continue;
                }
                let scale = (v / var).sqrt();
                consider(eta0.map(|y| x.x1 + scale * (y - m))?, &mut out)?;
            }
        }
        _ => {
            for k in 1..DETERMINISTIC_CANDIDATES {
                let q = k as f64 / DETERMINISTIC_CANDIDATES as f64;
                let w0 = StepFunction::new(0.0, 1.0, vec![q], vec![std::f64::consts::E, 1.0])?;
                if let Some(w) = fit_weight(d, &w0, x.x1, v) {
                    consider(w, &mut out)?;
                }
            }
            for _ in 0..budget {
                let w0 = random_steps(&mut rng, |r| r.sample::<f64, _>(StandardNormal).exp())?;
                if let Some(w) = fit_weight(d, &w0, x.x1, v) {
                    consider(w, &mut out)?;
                }
            }
        }
    }
    if out.admissible == 0 {
        out.value = f.eval(x.x1)?;
        out.fallback = true;
    }
    Ok(out)
}

fn random_steps(rng: &mut ChaCha8Rng, mut value: impl FnMut(&mut ChaCha8Rng) -> f64) -> Result<StepFunction> {
    let pieces = rng.random_range(2..=8usize);
    let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(0.02..0.98)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let values = (0..=breaks.len()).map(|_| value(rng)).collect();
    StepFunction::new(0.0, 1.0, breaks, values).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// `c·w0^θ` with intrinsic coordinates `(log x1, v)`.
fn fit_weight(d: &DomainSpec, w0: &StepFunction, x1: f64, v: f64) -> Option<StepFunction> {
    let moment = |t: f64| -> f64 { w0.pieces().map(|(l, r, y)| (r - l) * y.powf(t)).sum::<f64>() / w0.length() };
    let level = |theta: f64| -> f64 {
        match *d {
            DomainSpec::Ap { p, .. } => moment(theta).ln() + (p - 1.0) * moment(-theta / (p - 1.0)).ln(),
            _ => {
                let mean_log: f64 = w0.pieces().map(|(l, r, y)| (r - l) * y.ln()).sum::<f64>() / w0.length();
                moment(theta).ln() - theta * mean_log
            }
        }
    };
    let mut hi = 1.0;
    while level(hi) < v {
        hi *= 2.0;
        if hi > 1e3 {
            return None;
        }
    }
    let theta = bisect(|t| level(t) - v, 0.0, hi, 200);
    let c = x1 / moment(theta);
    w0.map(|y| c * y.powf(theta)).ok()
}
