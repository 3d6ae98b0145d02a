//! Sampled checks that semigroup data never beat the interval envelope, and
//! the integral inequalities that follow from it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{ball_average_radial, heat_ball_constant_table, star_norm_radial, RayProbe};
use crate::domain::{BellmanPoint, DomainSpec};
use crate::envelope::GridFunction;
use crate::error::{Error, Result};
use crate::interval::{ap_characteristic_interval, bmo_norm_interval, functional_average, StepFunction};
use crate::profile::BoundaryProfile;
use crate::semigroup::{
    ap_characteristic_k, extend, k_bmo_norm, KernelKind, Op, ProbeSet, SpaceTimePoint, TestFunction, Transform,
};

/// Probe sups are lower bounds for the norm, so admissibility asks for
/// this fraction of the slack parameter.
pub const SAFETY: f64 = 0.9;

/// Base allowance for discretisation error of a solved envelope.
pub const GRID_ALLOWANCE: f64 = 1e-2;

/// One sampled instance: the data `aφ + b` (BMO) or `aφ` (weights) at `z`,
/// checked on the domain `domain` with admissibility measured against
/// `slack`, a strictly smaller domain of the same family.
#[derive(Debug, Clone)]
pub struct TransferCase {
    pub domain: DomainSpec,
    pub slack: DomainSpec,
    pub f: BoundaryProfile,
    pub kernel: KernelKind,
    pub phi: TestFunction,
    pub scale: f64,
    pub shift: f64,
    pub z: SpaceTimePoint,
}

impl TransferCase {
    pub fn validate(&self) -> Result<()> {
        let ok = match (self.domain, self.slack) {
            (DomainSpec::Bmo { mu }, DomainSpec::Bmo { mu: m }) => m < mu,
            (DomainSpec::Ap { p, delta }, DomainSpec::Ap { p: q, delta: d }) => p == q && d < delta,
            (DomainSpec::AInf { delta }, DomainSpec::AInf { delta: d }) => d < delta,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidDomain(format!(
                "slack domain {} must be a strictly smaller member of the family of {}",
                self.slack, self.domain
            )));
        }
        if self.phi.n != self.z.dim() {
            return Err(Error::InvalidParameter("test function and point in different dimensions".into()));
        }
        if !(self.scale.is_finite() && self.shift.is_finite()) {
            return Err(Error::InvalidParameter("non-finite scaling".into()));
        }
        if !matches!(self.domain, DomainSpec::Bmo { .. }) && !(self.scale > 0.0) {
            return Err(Error::InvalidParameter("weights need a positive scale".into()));
        }
        Ok(())
    }

    fn ext(&self, tr: &Transform) -> Result<f64> {
        let e = extend(self.kernel, &self.phi, tr, &self.z)?;
        if e.divergent {
            return Err(Error::Divergent(e.diagnostic.unwrap_or_else(|| "extension".into())));
        }
        Ok(e.value)
    }

    fn lin(&self) -> Transform {
        match self.domain {
            DomainSpec::Bmo { .. } => Transform::identity().then(Op::Affine(self.scale, self.shift)),
            _ => Transform::identity().then(Op::Affine(self.scale, 0.0)),
        }
    }

    /// `(f∘φ)(z)`, the sampled lower bound for the semigroup Bellman function.
    pub fn lhs(&self) -> Result<f64> {
        let b = if matches!(self.domain, DomainSpec::Bmo { .. }) { self.shift } else { 0.0 };
        self.ext(&Transform::profile(self.f.clone(), self.scale, b))
    }
}

/// Bellman variables of the semigroup data at `z`: `(φ(z), φ²(z))`,
/// `(w(z), w^{-1/(p-1)}(z))` or `(w(z), (log w)(z))`.
pub fn semigroup_point(case: &TransferCase) -> Result<BellmanPoint> {
    case.validate()?;
    let lin = case.lin();
    let x1 = case.ext(&lin)?;
    let x2 = match case.domain {
        DomainSpec::Bmo { .. } => case.ext(&lin.then(Op::Square))?,
        DomainSpec::Ap { p, .. } => case.ext(&lin.then(Op::Power(-1.0 / (p - 1.0))))?,
        DomainSpec::AInf { .. } => case.ext(&lin.then(Op::Log))?,
    };
    BellmanPoint::new(x1, x2)
}

/// Probe estimate of the class norm of the unscaled data: `‖φ‖_K` for the
/// strip, the characteristic for weights (invariant under scaling).
pub fn base_norm(case: &TransferCase, probe: &ProbeSet) -> Result<f64> {
    Ok(match case.domain {
        DomainSpec::Bmo { .. } => k_bmo_norm(case.kernel, &case.phi, probe)?.value,
        DomainSpec::Ap { p, .. } => ap_characteristic_k(case.kernel, &case.phi, p, probe)?.value,
        DomainSpec::AInf { .. } => ap_characteristic_k(case.kernel, &case.phi, f64::INFINITY, probe)?.value,
    })
}

fn scaled_norm(case: &TransferCase, base: f64) -> f64 {
    match case.domain {
        DomainSpec::Bmo { .. } => base * case.scale.abs(),
        _ => base,
    }
}

/// Largest admissible norm: `0.9 μ̃`, or `1 + 0.9(δ̃ − 1)` for weights.
pub fn admissible_limit(slack: &DomainSpec) -> f64 {
    match *slack {
        DomainSpec::Bmo { mu } => SAFETY * mu,
        DomainSpec::Ap { delta, .. } | DomainSpec::AInf { delta } => 1.0 + SAFETY * (delta - 1.0),
    }
}

/// Envelope value with points on or within rounding of the lower boundary
/// moved onto it.
fn envelope_at(g: &GridFunction, x: &BellmanPoint) -> Result<f64> {
    let (u, v) = g.domain.to_intrinsic_unchecked(x);
    let vmax = g.domain.v_max();
    if !(u.is_finite() && v.is_finite()) || v < -1e-9 || v > vmax * (1.0 + 1e-9) {
        return Err(Error::OutOfDomain { x1: x.x1, x2: x.x2 });
    }
    if u < g.u_min - 1e-12 || u > g.u_max + 1e-12 {
        return Err(Error::WindowOutOfRange(format!("u = {u} outside [{}, {}]", g.u_min, g.u_max)));
    }
    Ok(g.eval_intrinsic(u, v.clamp(0.0, vmax)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferRecord {
    pub case: String,
    pub point: BellmanPoint,
    pub lhs: f64,
    pub rhs: f64,
    pub allowance: f64,
    /// `rhs + allowance − lhs`.
    pub margin: f64,
    pub norm: f64,
    pub in_slack_domain: bool,
    pub pass: bool,
}

/// `(f∘φ)(z) ≤ envelope(semigroup point) + allowance`. The allowance is
/// `1e-2 + 2|U_N − U_{N/2}|` at the point when a coarser solve is supplied.
pub fn check_transfer(
    case: &TransferCase,
    envelope: &GridFunction,
    coarse: Option<&GridFunction>,
    base: f64,
) -> Result<TransferRecord> {
    case.validate()?;
    if envelope.domain != case.domain {
        return Err(Error::InvalidDomain(format!("envelope solved on {}, case on {}", envelope.domain, case.domain)));
    }
    let norm = scaled_norm(case, base);
    let limit = admissible_limit(&case.slack);
    if !(norm <= limit) {
        return Err(Error::Inadmissible(format!("probe norm {norm} exceeds {limit} for {}", case.slack)));
    }
    let point = semigroup_point(case)?;
    let in_slack_domain = {
        let (_, v) = case.slack.to_intrinsic_unchecked(&point);
        v >= -1e-9 && v <= case.slack.v_max() * (1.0 + 1e-9)
    };
    let lhs = case.lhs()?;
    let rhs = envelope_at(envelope, &point)?;
    let allowance = GRID_ALLOWANCE + coarse.map(|c| envelope_at(c, &point).map(|v| 2.0 * (rhs - v).abs())).transpose()?.unwrap_or(0.0);
    let margin = rhs + allowance - lhs;
    Ok(TransferRecord {
        case: describe(case),
        point,
        lhs,
        rhs,
        allowance,
        margin,
        norm,
        in_slack_domain,
        pass: margin >= 0.0 && in_slack_domain,
    })
}

fn describe(case: &TransferCase) -> String {
    format!(
        "{} on {}, {} kernel, {}·{}+{} at y={:?}, t={}",
        case.f.name(),
        case.domain,
        case.kernel,
        case.scale,
        describe_phi(&case.phi),
        case.shift,
        case.z.y,
        case.z.t
    )
}

fn describe_phi(g: &TestFunction) -> String {
    format!("{:?} (n={})", g.shape, g.n).replace('\n', " ")
}

/// Random step functions on `[0, 1]` with up to `max_pieces` pieces.
/// Values are standard normal, or log-normal when `positive`.
pub fn random_step_functions(count: usize, max_pieces: usize, positive: bool, seed: u64) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=max_pieces.max(1));
            let mut breaks: Vec<f64> = (1..k).map(|_| rng.random_range(0.01..0.99)).collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let values = (0..=breaks.len())
                .map(|_| {
                    let g: f64 = rng.sample(rand_distr::StandardNormal);
                    if positive {
                        g.exp()
                    } else {
                        g
                    }
                })
                .collect();
            StepFunction::new(0.0, 1.0, breaks, values).expect("valid by construction")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryCheck {
    pub premise_cases: usize,
    /// Largest `⟨f(…)⟩_I − C(‖η‖)` over the battery.
    pub premise_excess: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub norm: f64,
    pub pass: bool,
}

/// Deterministic fractions in `[1/4, 1]` for placing battery members inside a class.
fn fill_fraction(k: usize) -> f64 {
    0.25 + 0.75 * ((k as f64 * 0.618_033_988_749_895 + 0.5) % 1.0)
}

/// `η` dilated to `‖η‖_{*,I} = u μ`; zero-norm members are left alone.
fn into_bmo_class(s: &StepFunction, mu: f64, k: usize) -> Result<(StepFunction, f64)> {
    let norm = bmo_norm_interval(s);
    if norm == 0.0 {
        return Ok((s.clone(), 0.0));
    }
    let c = fill_fraction(k) * mu / norm;
    let t = s.map(|v| c * v)?;
    let nt = bmo_norm_interval(&t);
    Ok((t, nt))
}

/// `w^θ` with `[w^θ]_{p,I} ≤ δ`, using `[w^θ] ≤ [w]^θ` as the first guess.
fn into_ap_class(s: &StepFunction, p: f64, delta: f64) -> Result<(StepFunction, f64)> {
    let ch = ap_characteristic_interval(s, p)?;
    if ch <= delta {
        return Ok((s.clone(), ch));
    }
    let mut theta = delta.ln() / ch.ln();
    for _ in 0..60 {
        let t = s.map(|v| v.powf(theta))?;
        let c = ap_characteristic_interval(&t, p)?;
        if c <= delta {
            return Ok((t, c));
        }
        theta *= 0.5;
    }
    Err(Error::InvalidParameter("could not bring a weight inside the class".into()))
}

/// Interval premise `⟨f(η − ⟨η⟩_I)⟩_I ≤ C_f(‖η‖_{*,I})` on the battery,
/// each member dilated to a norm in `[μ/4, μ]`, then `f(φ − φ(z))(z) ≤ C_f(μ)` for the case.
pub fn check_corollary_bmo(
    case: &TransferCase,
    c_f: &(dyn Fn(f64) -> f64 + Sync),
    battery: &[StepFunction],
    base: f64,
) -> Result<CorollaryCheck> {
    case.validate()?;
    let DomainSpec::Bmo { mu } = case.domain else {
        return Err(Error::InvalidDomain("BMO corollary needs a strip".into()));
    };
    let premise_excess = battery
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let (s, norm) = into_bmo_class(s, mu, k)?;
            let m = s.mean();
            let centred = s.map(|v| v - m)?;
            Ok(functional_average(&centred, &case.f)? - c_f(norm))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if premise_excess > 1e-12 {
        return Err(Error::PremiseFailed(format!("interval bound exceeded by {premise_excess:e}")));
    }
    let norm = scaled_norm(case, base);
    if !(norm <= admissible_limit(&case.slack)) {
        return Err(Error::Inadmissible(format!("probe norm {norm} for {}", case.slack)));
    }
    let m = case.ext(&case.lin())?;
    let lhs = case.ext(&Transform::profile(case.f.clone(), case.scale, case.shift - m))?;
    let rhs = c_f(mu);
    Ok(CorollaryCheck { premise_cases: battery.len(), premise_excess, lhs, rhs, norm, pass: lhs <= rhs + 1e-10 })
}

/// Interval premise `⟨f(w/⟨w⟩_I)⟩_I ≤ E_f([w]_{p,I})` on the battery,
/// members outside the class replaced by `w^θ` inside it, then
/// `f(w/w(z))(z) ≤ E_f(δ)` for the case.
pub fn check_corollary_ap(
    case: &TransferCase,
    e_f: &(dyn Fn(f64) -> f64 + Sync),
    battery: &[StepFunction],
    base: f64,
) -> Result<CorollaryCheck> {
    case.validate()?;
    let (p, delta) = match case.domain {
        DomainSpec::Ap { p, delta } => (p, delta),
        DomainSpec::AInf { delta } => (f64::INFINITY, delta),
        DomainSpec::Bmo { .. } => return Err(Error::InvalidDomain("weight corollary needs an A_p domain".into())),
    };
    let premise_excess = battery
        .par_iter()
        .map(|s| {
            let (s, ch) = into_ap_class(s, p, delta)?;
            let m = s.mean();
            let normal = s.map(|v| v / m)?;
            Ok(functional_average(&normal, &case.f)? - e_f(ch))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if premise_excess > 1e-12 {
        return Err(Error::PremiseFailed(format!("interval bound exceeded by {premise_excess:e}")));
    }
    let norm = base;
    if !(norm <= admissible_limit(&case.slack)) {
        return Err(Error::Inadmissible(format!("probe characteristic {norm} for {}", case.slack)));
    }
    let wz = case.ext(&case.lin())?;
    let lhs = case.ext(&Transform::profile(case.f.clone(), case.scale / wz, 0.0))?;
    let rhs = e_f(delta);
    Ok(CorollaryCheck { premise_cases: battery.len(), premise_excess, lhs, rhs, norm, pass: lhs <= rhs + 1e-10 })
}

/// Smallest `E` with `⟨f(w/⟨w⟩)⟩ ≤ E` over the battery members whose
/// characteristic is at most `delta`; an empirical stand-in for `E_f(δ)`.
pub fn calibrate_e_f(f: &BoundaryProfile, p: f64, delta: f64, battery: &[StepFunction]) -> Result<f64> {
    let mut best = f.eval(1.0)?;
    for s in battery {
        if ap_characteristic_interval(s, p)? <= delta {
            let m = s.mean();
            best = best.max(functional_average(&s.map(|v| v / m)?, f)?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallRow {
    pub offset: f64,
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallReport {
    pub n: usize,
    pub scale: f64,
    /// Probe estimate of `‖cφ‖_*` and of `‖cφ‖_H` on the scale ray.
    pub star_norm: f64,
    pub heat_norm: f64,
    /// `min_n √n (n/(2e))^{n/2}/Γ(n/2+1)`, `n ≤ 64`.
    pub kappa: f64,
    pub rows: Vec<BallRow>,
    pub pass: bool,
}

/// `⟨f(cφ − (cφ)(z_B))⟩_B ≤ √n C_f(μ)/κ` on balls `B(a e₁, r)` with
/// `z_B = (a e₁, r²/(2n))`; `c` makes `‖cφ‖_* = c_star · μ/√n`.
pub fn ball_estimate_check(
    phi: &TestFunction,
    f: &BoundaryProfile,
    c_f_mu: f64,
    mu: f64,
    c_star: f64,
    balls: &[(f64, f64)],
) -> Result<BallReport> {
    if !phi.is_radial() {
        return Err(Error::InvalidParameter("ball estimate needs a radial function".into()));
    }
    let n = phi.n;
    let sqn = (n as f64).sqrt();
    let (raw, _, _) = star_norm_radial(phi, &RayProbe::scale_ray())?;
    let scale = if raw > 0.0 { c_star * mu / (sqn * raw) } else { 1.0 };
    let (_, (_, kappa)) = heat_ball_constant_table(64);
    let heat_norm = crate::constants::k_norm_ray(KernelKind::Heat, phi, &RayProbe::scale_ray())?.0 * scale;
    let lin = Transform::identity().then(Op::Affine(scale, 0.0));
    let rows: Vec<BallRow> = balls
        .par_iter()
        .map(|&(a, r)| {
            let mut y = vec![0.0; n];
            y[0] = a;
            let zb = SpaceTimePoint::new(y, r * r / (2.0 * n as f64))?;
            let e = extend(KernelKind::Heat, phi, &lin, &zb)?;
            if e.divergent {
                return Err(Error::Divergent("heat extension at z_B".into()));
            }
            let m = e.value;
            let mut breaks = phi.radial_breaks();
            for bp in f.breakpoints() {
                breaks.extend(phi.radial_level((bp + m) / scale));
            }
            let lhs = ball_average_radial(&|s| f.value(scale * phi.radial(s) - m), n, a, r, &breaks).value;
            let rhs = sqn * c_f_mu / kappa;
            Ok(BallRow { offset: a, radius: r, lhs, rhs, pass: lhs <= rhs })
        })
        .collect::<Result<_>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(BallReport { n, scale, star_norm: raw * scale, heat_norm, kappa, rows, pass })
}

/// Data family for [`random_bmo_cases`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhiFamily {
    LogAbs,
    /// Indicator of the unit ball.
    BallIndicator,
}

impl PhiFamily {
    pub const ALL: [PhiFamily; 2] = [PhiFamily::LogAbs, PhiFamily::BallIndicator];

    pub fn build(self, n: usize) -> Result<TestFunction> {
        match self {
            PhiFamily::LogAbs => TestFunction::log_abs(n),
            PhiFamily::BallIndicator => TestFunction::radial_step(1.0, 1.0, 0.0, n),
        }
    }
}

/// A sampled case together with the base norm it was scaled against.
#[derive(Debug, Clone)]
pub struct SampledCase {
    pub case: TransferCase,
    pub base: f64,
    pub envelope: usize,
}

/// Random admissible strip cases. `profiles[k]` is checked against envelope
/// `k`; `norms(kernel, n, family)` is the base probe norm. The scale puts
/// the norm at a uniform fraction in `[0.3, 1]` of the admissible limit and
/// the shift places `x1` uniformly in `window`.
#[allow(clippy::too_many_arguments)]
pub fn random_bmo_cases(
    count: usize,
    seed: u64,
    mu_tilde: f64,
    mu: f64,
    profiles: &[BoundaryProfile],
    dims: &[usize],
    window: (f64, f64),
    norms: &dyn Fn(KernelKind, usize, PhiFamily) -> f64,
) -> Result<Vec<SampledCase>> {
    let domain = DomainSpec::bmo(mu)?;
    let slack = DomainSpec::bmo(mu_tilde)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let envelope = i % profiles.len();
        let kernel = KernelKind::ALL[(i / profiles.len()) % 2];
        let n = dims[rng.random_range(0..dims.len())];
        let fam = PhiFamily::ALL[rng.random_range(0..2)];
        let phi = fam.build(n)?;
        let base = norms(kernel, n, fam);
        let frac = rng.random_range(0.3..1.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let scale = sign * frac * admissible_limit(&slack) / base;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t = 2f64.powf(rng.random_range(-4.0..4.0));
        let z = SpaceTimePoint::new(y, t)?;
        let m = extend(kernel, &phi, &Transform::identity().then(Op::Affine(scale, 0.0)), &z)?.finite_value()?;
        let target = rng.random_range(window.0..window.1);
        let case = TransferCase {
            domain,
            slack,
            f: profiles[envelope].clone(),
            kernel,
            phi,
            scale,
            shift: target - m,
            z,
        };
        out.push(SampledCase { case, base, envelope });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{solve_envelope, EnvelopeConfig};

    fn case(f: BoundaryProfile, phi: TestFunction, scale: f64, shift: f64) -> TransferCase {
        TransferCase {
            domain: DomainSpec::bmo(0.5).unwrap(),
            slack: DomainSpec::bmo(0.45).unwrap(),
            f,
            kernel: KernelKind::Heat,
            phi,
            scale,
            shift,
            z: SpaceTimePoint::new(vec![0.3], 0.7).unwrap(),
        }
    }

    #[test]
    fn semigroup_point_examples() {
        let c = case(BoundaryProfile::square(), TestFunction::constant(2.0, 1).unwrap(), 1.0, 0.0);
        let p = semigroup_point(&c).unwrap();
        assert!((p.x1 - 2.0).abs() < 1e-14 && (p.x2 - 4.0).abs() < 1e-13);
        let c = case(BoundaryProfile::square(), TestFunction::linear(vec![1.0]).unwrap(), 1.0, 0.0);
        let p = semigroup_point(&c).unwrap();
        assert!((p.x1 - 0.3).abs() < 1e-12 && (p.x2 - (0.09 + 1.4)).abs() < 1e-10);
        let w = TransferCase {
            domain: DomainSpec::ap(2.0, 3.0).unwrap(),
            slack: DomainSpec::ap(2.0, 2.0).unwrap(),
            ..case(BoundaryProfile::identity(), TestFunction::constant(1.0, 1).unwrap(), 1.0, 0.0)
        };
        let p = semigroup_point(&w).unwrap();
        assert!((p.x1 - 1.0).abs() < 1e-14 && (p.x2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn slack_must_be_strict() {
        let mut c = case(BoundaryProfile::square(), TestFunction::constant(2.0, 1).unwrap(), 1.0, 0.0);
        c.slack = c.domain;
        assert!(c.validate().is_err());
    }

    #[test]
    fn square_and_constant_transfer_with_equality() {
        let d = DomainSpec::bmo(0.5).unwrap();
        let sq = solve_envelope(&d, &BoundaryProfile::square(), &EnvelopeConfig::new(81, 21, (-4.0, 4.0)))
            .unwrap()
            .into_converged()
            .unwrap();
        let g = TestFunction::log_abs(1).unwrap();
        let s = 0.4 / (std::f64::consts::PI.powi(2) / 8.0).sqrt();
        let c = case(BoundaryProfile::square(), g, s, 0.2);
        let r = check_transfer(&c, &sq, None, (std::f64::consts::PI.powi(2) / 8.0).sqrt()).unwrap();
        assert!(r.pass && (r.lhs - r.rhs).abs() < 1e-8, "{r:?}");
        let c = case(BoundaryProfile::square(), TestFunction::constant(1.5, 1).unwrap(), 1.0, 0.0);
        let r = check_transfer(&c, &sq, None, 0.0).unwrap();
        assert!(r.pass && (r.lhs - r.rhs).abs() < 1e-12);
        let too_big = case(BoundaryProfile::square(), TestFunction::log_abs(1).unwrap(), 1.0, 0.0);
        assert!(matches!(check_transfer(&too_big, &sq, None, 1.11), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn corollary_examples() {
        let battery = random_step_functions(60, 6, false, 3);
        let g = TestFunction::log_abs(1).unwrap();
        let hn = (std::f64::consts::PI.powi(2) / 8.0).sqrt();
        let s = 0.4 / hn;
        let c = case(BoundaryProfile::exp_abs(), g.clone(), s, 0.0);
        let r = check_corollary_bmo(&c, &|m| 1.0 / (1.0 - m), &battery, hn).unwrap();
        assert!(r.pass && r.rhs == 2.0, "{r:?}");
        let c = case(BoundaryProfile::square(), g.clone(), s, 0.0);
        let r = check_corollary_bmo(&c, &|m| m * m, &battery, hn).unwrap();
        assert!(r.pass && r.lhs <= 0.4f64.powi(2) + 1e-9);
        let c = case(BoundaryProfile::indicator(0.5).unwrap(), g, s, 0.0);
        assert!(check_corollary_bmo(&c, &|m| (1.0 - 0.5 / m).exp(), &battery, hn).unwrap().pass);
        // a constant that is too small for the interval premise is rejected
        let c = case(BoundaryProfile::square(), TestFunction::constant(1.0, 1).unwrap(), 1.0, 0.0);
        assert!(matches!(check_corollary_bmo(&c, &|m| 0.5 * m * m, &battery, 0.0), Err(Error::PremiseFailed(_))));
    }

    #[test]
    fn weight_corollary_trivial_case() {
        let battery = random_step_functions(40, 5, true, 5);
        let c = TransferCase {
            domain: DomainSpec::ap(2.0, 3.0).unwrap(),
            slack: DomainSpec::ap(2.0, 2.5).unwrap(),
            ..case(BoundaryProfile::identity(), TestFunction::constant(2.0, 1).unwrap(), 1.0, 0.0)
        };
        // ⟨w/⟨w⟩⟩ = 1 on every interval
        let r = check_corollary_ap(&c, &|_| 1.0, &battery, 1.0).unwrap();
        assert!(r.pass && (r.lhs - 1.0).abs() < 1e-14);
        let c = TransferCase { f: BoundaryProfile::square(), ..c };
        assert!(matches!(check_corollary_ap(&c, &|_| 1.0, &battery, 1.0), Err(Error::PremiseFailed(_))));
    }

    #[test]
    fn ball_estimates_for_log() {
        let g = TestFunction::log_abs(1).unwrap();
        let f = BoundaryProfile::indicator(1.0).unwrap();
        let mu = 0.5;
        let r = ball_estimate_check(&g, &f, (1.0f64 - 1.0 / mu).exp(), mu, 0.5, &[(0.0, 1.0), (0.8, 1.0), (3.0, 0.5)])
            .unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.star_norm - 0.25).abs() < 1e-6);
        let c = TestFunction::constant(1.0, 2).unwrap();
        assert!(ball_estimate_check(&c, &BoundaryProfile::square(), 0.0, mu, 0.5, &[(0.0, 1.0)]).is_err());
    }
}
