//! Kernel averages `g_K(y, t) = (K_t * g)(y)` by quadrature.
//!
//! The heat kernel at `(y, t)` is the law of `y + √(2t) Z`, the Poisson
//! kernel the law of `y + t C` with `C` standard Cauchy. One-dimensional
//! laws are integrated directly: the Gaussian on the line, the Cauchy
//! after `s = m + γ tan θ`, which makes its density uniform. Radial data in
//! higher dimension are integrated in polar coordinates around `y`: the
//! distance `s = |x - y|` has an explicit law and the angle to `-y` carries
//! the weight `sin^{n-2}`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::kernel::{KernelKind, SpaceTimePoint};
use super::testfn::{Growth, Op, Shape, TestFunction, Transform};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Quad, Tolerance};
use crate::special::ln_gamma;

const OUTER: Tolerance = Tolerance { abs: 1e-13, rel: 1e-10, max_segments: 2000 };
const INNER: Tolerance = Tolerance { abs: 1e-14, rel: 1e-11, max_segments: 1000 };

/// Value of an extension with its quadrature error; divergent integrals are
/// reported as `+∞` with a reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extension {
    pub value: f64,
    pub abs_err: f64,
    pub divergent: bool,
    pub diagnostic: Option<String>,
}

impl Extension {
    fn finite(q: Quad) -> Self {
        Extension { value: q.value, abs_err: q.abs_err, divergent: false, diagnostic: None }
    }

    fn exact(value: f64) -> Self {
        Extension { value, abs_err: 0.0, divergent: false, diagnostic: None }
    }

    fn divergent(why: String) -> Self {
        Extension { value: f64::INFINITY, abs_err: f64::INFINITY, divergent: true, diagnostic: Some(why) }
    }

    /// The value, or [`Error::Divergent`].
    pub fn finite_value(&self) -> Result<f64> {
        if self.divergent {
            Err(Error::Divergent(self.diagnostic.clone().unwrap_or_default()))
        } else {
            Ok(self.value)
        }
    }
}

/// `(K_t * T∘g)(y)`.
pub fn extend(k: KernelKind, g: &TestFunction, tr: &Transform, z: &SpaceTimePoint) -> Result<Extension> {
    if z.dim() != g.n {
        return Err(Error::InvalidParameter(format!("point in R^{} for a function on R^{}", z.dim(), g.n)));
    }
    if let Some(why) = divergence_reason(k, g, tr) {
        return Ok(Extension::divergent(why));
    }
    let out = match &g.shape {
        Shape::Constant { c } => Extension::exact(tr.apply(*c)),
        Shape::Linear { direction } => {
            let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
            let m: f64 = direction.iter().zip(&z.y).map(|(d, y)| d * y).sum();
            if norm == 0.0 {
                Extension::exact(tr.apply(0.0))
            } else if let (KernelKind::Heat, Some(v)) = (k, gaussian_closed_form(tr, m, 2.0 * z.t * norm * norm)) {
                Extension::exact(v)
            } else {
                let scale = match k {
                    KernelKind::Heat => (2.0 * z.t).sqrt() * norm,
                    KernelKind::Poisson => z.t * norm,
                };
                let h = |s: f64| tr.apply(s);
                Extension::finite(expect_line(k, m, scale, &h, &tr.kinks(), f64::INFINITY))
            }
        }
        _ => {
            if let (KernelKind::Heat, Shape::Quadratic, Some(v)) = (k, &g.shape, quadratic_closed_form(tr, z)) {
                Extension::exact(v)
            } else {
                Extension::finite(expect_radial(k, z, &|r| tr.apply(g.radial(r)), &break_radii(g, tr), f64::INFINITY))
            }
        }
    };
    if !out.value.is_finite() {
        return Ok(Extension::divergent(format!("quadrature returned {}", out.value)));
    }
    Ok(out)
}

/// Analytic reasons for `K * T∘g` to diverge, if any.
fn divergence_reason(k: KernelKind, g: &TestFunction, tr: &Transform) -> Option<String> {
    let growth = tr.growth(g.growth());
    match (k, growth) {
        (KernelKind::Poisson, Growth::ExpPower(_)) => {
            return Some("exponential growth against the Poisson tail".into());
        }
        (KernelKind::Poisson, gr) => {
            if let Some(b) = gr.exponent() {
                if b >= 1.0 {
                    return Some(format!("growth |u|^{b} is not integrable against the Poisson tail"));
                }
            }
        }
        (KernelKind::Heat, Growth::ExpPower(b)) if b > 2.0 => {
            return Some(format!("growth exp(|u|^{b}) beats the Gaussian"));
        }
        _ => {}
    }
    if g.is_radial() {
        let e = tr.origin_exponent(g.origin_exponent());
        if e <= -(g.n as f64) {
            return Some(format!("singularity |u|^{e} at the origin is not integrable in R^{}", g.n));
        }
    }
    None
}

/// `E (αX + β)^p` for Gaussian `X` and `p ∈ {1, 2}` when `tr` has that shape.
fn affine_power(tr: &Transform) -> Option<(f64, f64, u8)> {
    let (mut a, mut b, mut p) = (1.0, 0.0, 1u8);
    for op in &tr.ops {
        match (op, p) {
            (Op::Affine(s, c), 1) => {
                a *= s;
                b = s * b + c;
            }
            (Op::Square, 1) => p = 2,
            (Op::Profile(f), 1) if f.kind() == crate::profile::ProfileKind::Identity => {}
            _ => return None,
        }
    }
    Some((a, b, p))
}

fn gaussian_closed_form(tr: &Transform, m: f64, var: f64) -> Option<f64> {
    let (a, b, p) = affine_power(tr)?;
    let mean = a * m + b;
    Some(if p == 1 { mean } else { mean * mean + a * a * var })
}

/// `|X|²` for `X ~ N(y, 2t I)`: mean `|y|² + 2nt`, variance `8nt² + 8t|y|²`.
fn quadratic_closed_form(tr: &Transform, z: &SpaceTimePoint) -> Option<f64> {
    let (a, b, p) = affine_power(tr)?;
    let n = z.dim() as f64;
    let y2: f64 = z.y.iter().map(|v| v * v).sum();
    let m1 = y2 + 2.0 * n * z.t;
    let var = 8.0 * n * z.t * z.t + 8.0 * z.t * y2;
    Some(if p == 1 { a * m1 + b } else { a * a * (var + m1 * m1) + 2.0 * a * b * m1 + b * b })
}

/// Radii where `T∘g` is not smooth.
fn break_radii(g: &TestFunction, tr: &Transform) -> Vec<f64> {
    let mut r = g.radial_breaks();
    for c in tr.kinks() {
        r.extend(g.radial_level(c));
    }
    r.retain(|v| *v > 0.0 && v.is_finite());
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// `E h(m + scale·X)` with `X` standard Gaussian (heat) or Cauchy (Poisson),
/// restricted to `|scale·X| ≤ cutoff`.
pub(crate) fn expect_line(k: KernelKind, m: f64, scale: f64, h: &dyn Fn(f64) -> f64, knots: &[f64], cutoff: f64) -> Quad {
    match k {
        KernelKind::Heat => {
            let norm = 1.0 / (2.0 * PI).sqrt();
            let f = |x: f64| finite_or_zero(h(m + scale * x) * norm * (-0.5 * x * x).exp());
            let lim = cutoff / scale;
            let mut xs: Vec<f64> = knots.iter().map(|s| (s - m) / scale).filter(|x| x.abs() < lim).collect();
            xs.push(0.0);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let mut q = Quad::ZERO;
            for w in xs.windows(2) {
                q = q + integrate(f, w[0], w[1], OUTER);
            }
            let (lo, hi) = (xs[0], xs[xs.len() - 1]);
            if lim.is_finite() {
                q = q + integrate(f, -lim, lo, OUTER) + integrate(f, hi, lim, OUTER);
            } else {
                q = q + integrate_to_infinity(|x| f(-x), -lo, OUTER) + integrate_to_infinity(f, hi, OUTER);
            }
            q
        }
        KernelKind::Poisson => {
            let f = |th: f64| finite_or_zero(h(m + scale * th.tan()) / PI);
            let lim = if cutoff.is_finite() { (cutoff / scale).atan() } else { FRAC_PI_2 };
            let mut ts: Vec<f64> = knots.iter().map(|s| ((s - m) / scale).atan()).filter(|t| t.abs() < lim).collect();
            ts.push(-lim);
            ts.push(lim);
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts.windows(2).map(|w| integrate(f, w[0], w[1], OUTER)).fold(Quad::ZERO, |a, b| a + b)
        }
    }
}

/// Law of `s = |x - y|` in R^n: integrates `h(s)·density(s)` over `[a, b]`.
fn distance_integral(k: KernelKind, n: usize, t: f64, h: &dyn Fn(f64) -> f64, knots: &[f64], cutoff: f64) -> Quad {
    let nf = n as f64;
    match k {
        KernelKind::Heat => {
            // |S^{n-1}| s^{n-1} (4πt)^{-n/2} e^{-s²/4t}
            let log_c = (2.0f64).ln() + 0.5 * nf * PI.ln() - ln_gamma(0.5 * nf) - 0.5 * nf * (4.0 * PI * t).ln();
            let f = |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let d = (log_c + (nf - 1.0) * s.ln() - s * s / (4.0 * t)).exp();
                finite_or_zero(h(s) * d)
            };
            let mode = (2.0 * (nf - 1.0) * t).sqrt();
            let mut pts: Vec<f64> = knots.iter().copied().filter(|s| *s > 0.0 && *s < cutoff).collect();
            pts.push(0.0);
            if mode > 0.0 && mode < cutoff {
                pts.push(mode);
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let mut q = Quad::ZERO;
            for w in pts.windows(2) {
                q = q + integrate(f, w[0], w[1], OUTER);
            }
            let last = pts[pts.len() - 1];
            if cutoff.is_finite() {
                q + integrate(f, last, cutoff, OUTER)
            } else {
                q + integrate_to_infinity(f, last, OUTER)
            }
        }
        KernelKind::Poisson => {
            // s = t tan θ has density sin^{n-1}θ / W_n on [0, π/2)
            let log_w = 0.5 * PI.ln() - 2f64.ln() + ln_gamma(0.5 * nf) - ln_gamma(0.5 * (nf + 1.0));
            let w = log_w.exp();
            let f = |th: f64| finite_or_zero(h(t * th.tan()) * th.sin().powi(n as i32 - 1) / w);
            let lim = if cutoff.is_finite() { (cutoff / t).atan() } else { FRAC_PI_2 };
            let mut ts: Vec<f64> = knots.iter().map(|s| (s / t).atan()).filter(|x| *x > 0.0 && *x < lim).collect();
            ts.push(0.0);
            ts.push(lim);
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts.windows(2).map(|w| integrate(f, w[0], w[1], OUTER)).fold(Quad::ZERO, |a, b| a + b)
        }
    }
}

/// `E h(|X|)` for `X` distributed by the kernel at `z`, restricted to `|X - y| ≤ cutoff`.
pub(crate) fn expect_radial(k: KernelKind, z: &SpaceTimePoint, h: &dyn Fn(f64) -> f64, breaks: &[f64], cutoff: f64) -> Quad {
    let n = z.dim();
    let rho = z.norm_y();
    if n == 1 {
        let mut knots = vec![0.0];
        for r in breaks {
            knots.push(-r);
            knots.push(*r);
        }
        let scale = match k {
            KernelKind::Heat => (2.0 * z.t).sqrt(),
            KernelKind::Poisson => z.t,
        };
        return expect_line(k, z.y[0], scale, &|s| h(s.abs()), &knots, cutoff);
    }
    if rho == 0.0 {
        return distance_integral(k, n, z.t, h, breaks, cutoff);
    }
    // angular average over the sphere |x - y| = s, weight sin^{n-2}α / B_n
    let nf = n as f64;
    let b_n = (0.5 * PI.ln() + ln_gamma(0.5 * (nf - 1.0)) - ln_gamma(0.5 * nf)).exp();
    let shell = |s: f64| -> f64 {
        let mut al: Vec<f64> = vec![0.0, PI];
        for r in breaks {
            let c = (r * r - rho * rho - s * s) / (2.0 * rho * s);
            if c.abs() < 1.0 {
                al.push(c.acos());
            }
        }
        al.sort_by(f64::total_cmp);
        al.dedup();
        let f = |a: f64| {
            let r2 = rho * rho + s * s + 2.0 * rho * s * a.cos();
            let w = if n == 2 { 1.0 } else { a.sin().powi(n as i32 - 2) };
            finite_or_zero(h(r2.max(0.0).sqrt()) * w)
        };
        al.windows(2).map(|w| integrate(f, w[0], w[1], INNER).value).sum::<f64>() / b_n
    };
    let mut knots = vec![rho];
    for r in breaks {
        knots.push((r - rho).abs());
        knots.push(r + rho);
    }
    distance_integral(k, n, z.t, &shell, &knots, cutoff)
}

/// Truncated masses `∫_{|x-y| ≤ R_j} |T∘g| K_t(x - y) dx` over doubling cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTest {
    pub cutoffs: Vec<f64>,
    pub masses: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Every ratio reached `threshold`.
    pub divergent: bool,
    pub threshold: f64,
}

pub fn divergence_test(
    k: KernelKind,
    g: &TestFunction,
    tr: &Transform,
    z: &SpaceTimePoint,
    r0: f64,
    doublings: usize,
    threshold: f64,
) -> Result<DivergenceTest> {
    if z.dim() != g.n {
        return Err(Error::InvalidParameter(format!("point in R^{} for a function on R^{}", z.dim(), g.n)));
    }
    if !(r0 > 0.0 && r0.is_finite()) || doublings == 0 {
        return Err(Error::InvalidParameter(format!("cutoff {r0}, {doublings} doublings")));
    }
    let cutoffs: Vec<f64> = (0..=doublings).map(|j| r0 * 2f64.powi(j as i32)).collect();
    let masses: Vec<f64> = cutoffs
        .iter()
        .map(|&c| match &g.shape {
            Shape::Linear { direction } => {
                let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
                let m: f64 = direction.iter().zip(&z.y).map(|(d, y)| d * y).sum();
                let scale = match k {
                    KernelKind::Heat => (2.0 * z.t).sqrt() * norm,
                    KernelKind::Poisson => z.t * norm,
                };
                // the cutoff applies along the direction; enough for growth rates
                expect_line(k, m, scale, &|s| tr.apply(s).abs(), &tr.kinks(), c * norm).value
            }
            _ => expect_radial(k, z, &|r| tr.apply(g.radial(r)).abs(), &break_radii(g, tr), c).value,
        })
        .collect();
    let ratios: Vec<f64> = masses.windows(2).map(|w| w[1] / w[0]).collect();
    let divergent = ratios.iter().all(|r| *r >= threshold);
    Ok(DivergenceTest { cutoffs, masses, ratios, divergent, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BoundaryProfile;
    use crate::special::trigamma;

    fn z(y: &[f64], t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(y.to_vec(), t).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let c = TestFunction::constant(2.5, 3).unwrap();
        for k in KernelKind::ALL {
            assert_eq!(extend(k, &c, &Transform::identity(), &z(&[1.0, 2.0, 3.0], 0.7)).unwrap().value, 2.5);
        }
        let lin = TestFunction::linear(vec![1.0]).unwrap();
        assert_eq!(extend(KernelKind::Heat, &lin, &Transform::identity(), &z(&[0.3], 2.0)).unwrap().value, 0.3);
        let q = TestFunction::quadratic(1).unwrap();
        let v = extend(KernelKind::Heat, &q, &Transform::identity(), &z(&[0.3], 2.0)).unwrap().value;
        assert!((v - (0.09 + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        // force quadrature through a non-closed-form but equivalent transform
        let id = Transform::identity().then(Op::Abs).then(Op::Square);
        let lin = TestFunction::linear(vec![1.0]).unwrap();
        let v = extend(KernelKind::Heat, &lin, &id, &z(&[0.4], 0.5)).unwrap().value;
        assert!((v - (0.16 + 1.0)).abs() < 1e-10, "{v}");
        for n in [2usize, 3] {
            let q = TestFunction::quadratic(n).unwrap();
            let mut y = vec![0.0; n];
            y[0] = 0.7;
            let pt = z(&y, 0.3);
            let closed = extend(KernelKind::Heat, &q, &Transform::square(), &pt).unwrap().value;
            let quad = expect_radial(KernelKind::Heat, &pt, &|r| r.powi(4), &[], f64::INFINITY).value;
            assert!((closed - quad).abs() < 1e-9 * closed, "n={n}: {closed} vs {quad}");
        }
    }

    #[test]
    fn log_abs_on_axis_matches_digamma_forms() {
        use crate::special::digamma;
        // |X|²/4t ~ Gamma(n/2): E log|X| = ½(log 4t + ψ(n/2)), Var = ¼ψ₁(n/2)
        for k in [1usize, 2, 4] {
            let g = TestFunction::log_abs(k).unwrap();
            let pt = SpaceTimePoint::on_axis(k, 0.8).unwrap();
            let m = extend(KernelKind::Heat, &g, &Transform::identity(), &pt).unwrap().value;
            let want = 0.5 * ((3.2f64).ln() + digamma(0.5 * k as f64));
            assert!((m - want).abs() < 1e-9, "n={k}: {m} vs {want}");
            let v = extend(KernelKind::Heat, &g, &Transform::centered_square(m), &pt).unwrap().value;
            let want = 0.25 * trigamma(0.5 * k as f64);
            assert!((v - want).abs() < 1e-8, "n={k}: {v} vs {want}");
        }
    }

    #[test]
    fn off_axis_radial_matches_one_dimensional_projection() {
        // a linear function of u_1 seen as a radial problem is awkward, so use
        // a step: P(|X| < 1) for X ~ N(y, 2t I) in R^2 against a 2-D grid sum
        let g = TestFunction::radial_step(1.0, 1.0, 0.0, 2).unwrap();
        let pt = z(&[0.8, 0.0], 0.25);
        let v = extend(KernelKind::Heat, &g, &Transform::identity(), &pt).unwrap().value;
        let h = 0.002;
        let mut sum = 0.0;
        let sd = (2.0 * pt.t).sqrt();
        for i in -600..=600 {
            for j in -600..=600 {
                let (a, b) = (i as f64 * h, j as f64 * h);
                if a * a + b * b < 1.0 {
                    let (da, db) = ((a - 0.8) / sd, b / sd);
                    sum += (-0.5 * (da * da + db * db)).exp();
                }
            }
        }
        let grid = sum * h * h / (2.0 * PI * sd * sd);
        assert!((v - grid).abs() < 2e-3, "{v} vs {grid}");
    }

    #[test]
    fn poisson_indicator_tail() {
        // P(|y + tC| > 1) at (0, 1) is 1/2
        let g = TestFunction::radial_step(1.0, 0.0, 1.0, 1).unwrap();
        let v = extend(KernelKind::Poisson, &g, &Transform::identity(), &z(&[0.0], 1.0)).unwrap().value;
        assert!((v - 0.5).abs() < 1e-12);
        // two dimensions on the axis: 1 - ∫_0^{π/4} sin θ dθ = cos(π/4)
        let g = TestFunction::radial_step(1.0, 0.0, 1.0, 2).unwrap();
        let v = extend(KernelKind::Poisson, &g, &Transform::identity(), &z(&[0.0, 0.0], 1.0)).unwrap().value;
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "{v}");
    }

    #[test]
    fn divergence_is_flagged() {
        let w = TestFunction::power_weight(-1.8, 2).unwrap();
        let pt = z(&[0.0, 0.0], 1.0);
        let e = extend(KernelKind::Poisson, &w, &Transform::power(-1.0), &pt).unwrap();
        assert!(e.divergent && e.value == f64::INFINITY);
        let d = divergence_test(KernelKind::Poisson, &w, &Transform::power(-1.0), &pt, 100.0, 3, 1.5).unwrap();
        assert!(d.divergent, "{d:?}");
        let fin = divergence_test(KernelKind::Poisson, &w, &Transform::power(-0.2), &pt, 100.0, 3, 1.5).unwrap();
        assert!(!fin.divergent, "{fin:?}");
        let lin = TestFunction::linear(vec![1.0]).unwrap();
        assert!(extend(KernelKind::Poisson, &lin, &Transform::identity(), &z(&[0.0], 1.0)).unwrap().divergent);
        let e = extend(KernelKind::Heat, &w, &Transform::square(), &pt).unwrap();
        assert!(e.divergent, "|x|^-3.6 is not locally integrable in R^2");
    }

    #[test]
    fn profile_transform_matches_manual() {
        let g = TestFunction::log_abs(1).unwrap();
        let pt = z(&[0.2], 0.25);
        let m = extend(KernelKind::Heat, &g, &Transform::identity(), &pt).unwrap().value;
        let ind = Transform::profile(BoundaryProfile::indicator(1.0).unwrap(), 1.0, -m);
        let v = extend(KernelKind::Heat, &g, &ind, &pt).unwrap().value;
        // |log|x| - m| > 1 ⇔ |x| < e^{m-1} or |x| > e^{m+1}
        let phi = |x: f64| 0.5 * (1.0 + statrs::function::erf::erf(x / 2f64.sqrt()));
        let sd = (2.0 * pt.t).sqrt();
        let band = |r: f64| phi((r - 0.2) / sd) - phi((-r - 0.2) / sd);
        let want = 1.0 - (band((m + 1.0).exp()) - band((m - 1.0).exp()));
        assert!((v - want).abs() < 1e-9, "{v} vs {want}");
    }
}
