//! Mollification and shrinking of candidate Bellman functions.
//!
//! Both act as translations in intrinsic coordinates, so they are applied
//! to the grid by resampling the input at shifted points.

use rayon::prelude::*;

use super::grid::GridFunction;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Discrete normalized radial bump `ψ(t) ∝ exp(-1/(1-|t|²/r²))` on `|t| < r`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub r: f64,
    pub rho: f64,
    /// Quadrature nodes `(t1, t2, weight)`, weights summing to one.
    pub nodes: Vec<(f64, f64, f64)>,
}

impl Mollifier {
    pub fn new(rho: f64, r: f64, order: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("mollifier radius {r}, shift {rho}")));
        }
        // polar tensor grid: Gauss–Legendre in the radius, uniform in the angle
        let (x, w) = gauss_legendre(order);
        let angles = 2 * order;
        let mut nodes = Vec::with_capacity(order * angles);
        for (a, wa) in x.iter().zip(&w) {
            let s = 0.5 * (a + 1.0);
            let radial = 0.5 * wa * s * (-1.0 / (1.0 - s * s)).exp();
            for k in 0..angles {
                let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64;
                nodes.push((r * s * phi.cos(), r * s * phi.sin(), radial));
            }
        }
        let total: f64 = nodes.iter().map(|n| n.2).sum();
        for n in &mut nodes {
            n.2 /= total;
        }
        Ok(Mollifier { r, rho, nodes })
    }

    /// Discrete `E[t1²]` under the bump.
    pub fn second_moment(&self) -> f64 {
        self.nodes.iter().map(|&(t1, _, w)| w * t1 * t1).sum()
    }
}

/// Intrinsic shift `(Δu, Δv)` that mollification applies at offset `t`.
fn mollify_shift(domain: &DomainSpec, rho: f64, t1: f64, t2: f64) -> (f64, f64) {
    match *domain {
        DomainSpec::Bmo { .. } => (-t1, rho - t2),
        DomainSpec::Ap { p, .. } => (rho - t1, rho - t1 - (p - 1.0) * t2),
        DomainSpec::AInf { .. } => (rho - t1, rho - t1 + t2),
    }
}

/// Output strip height and `u` shift bounds `(v_max', du_min, du_max)`.
fn mollify_geometry(domain: &DomainSpec, rho: f64, r: f64) -> Result<(f64, f64, f64)> {
    let v_max = domain.v_max();
    let (spread, u_lo, u_hi) = match *domain {
        DomainSpec::Bmo { .. } => (r, -r, r),
        DomainSpec::Ap { p, .. } => (p * r, rho - r, rho + r),
        DomainSpec::AInf { .. } => (2.0 * r, rho - r, rho + r),
    };
    if !(rho > spread) {
        return Err(Error::InvalidParameter(format!("mollifier shift {rho} must exceed {spread}")));
    }
    let out = v_max - rho - spread;
    if !(out > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mollifier shift {rho} and spread {spread} exhaust the strip height {v_max}"
        )));
    }
    Ok((out, u_lo, u_hi))
}

/// Mollified value at intrinsic `(u, v)` of an arbitrary function of `(u, v)`.
pub fn mollify_value(domain: &DomainSpec, m: &Mollifier, f: impl Fn(f64, f64) -> f64, u: f64, v: f64) -> f64 {
    m.nodes
        .iter()
        .map(|&(t1, t2, w)| {
            let (du, dv) = mollify_shift(domain, m.rho, t1, t2);
            w * f(u + du, v + dv)
        })
        .sum()
}

pub fn mollify(g: &GridFunction, rho: f64, r: f64) -> Result<GridFunction> {
    mollify_with(g, &Mollifier::new(rho, r, 16)?)
}

/// Mollified grid on the shrunken strip, same node counts as the input.
pub fn mollify_with(g: &GridFunction, m: &Mollifier) -> Result<GridFunction> {
    let (v_max, du_lo, du_hi) = mollify_geometry(&g.domain, m.rho, m.r)?;
    let domain = g.domain.with_v_max(v_max)?;
    // need u + Δu inside [u_min, u_max] for every offset
    let u_range = (g.u_min - du_lo, g.u_max - du_hi);
    if !(u_range.1 > u_range.0) {
        return Err(Error::InvalidParameter("mollifier radius exceeds the u range".into()));
    }
    resample(g, domain, u_range, |u, v| mollify_value(&g.domain, m, |a, b| g.interpolate(a, b).0, u, v))
}

fn shrink_shift(domain: &DomainSpec, param: f64) -> Result<(f64, f64)> {
    match domain {
        DomainSpec::Bmo { .. } => {
            if !(param > 0.0 && param < domain.v_max()) {
                return Err(Error::InvalidParameter(format!("shift {param} outside (0, {})", domain.v_max())));
            }
            Ok((0.0, param))
        }
        _ => {
            let l = param.ln();
            if !(param > 1.0 && 2.0 * l < domain.v_max()) {
                return Err(Error::InvalidParameter(format!("dilation {param} outside the admissible range")));
            }
            Ok((l, 2.0 * l))
        }
    }
}

/// Composition with the domain-shrinking map: `U(x1, x2+s)` for BMO,
/// `U(λx1, λ^{1/(p-1)}x2)` for A_p, `U(λx1, x2 - log λ)` for A_∞.
pub fn shrink(g: &GridFunction, param: f64) -> Result<GridFunction> {
    let (du, dv) = shrink_shift(&g.domain, param)?;
    let domain = g.domain.with_v_max(g.v_max() - dv)?;
    resample(g, domain, (g.u_min - du, g.u_max - du), |u, v| g.interpolate(u + du, v + dv).0)
}

/// Map of points under [`shrink`], in intrinsic coordinates.
pub fn shrink_intrinsic(domain: &DomainSpec, param: f64, u: f64, v: f64) -> Result<(f64, f64)> {
    let (du, dv) = shrink_shift(domain, param)?;
    Ok((u + du, v + dv))
}

fn resample(
    g: &GridFunction,
    domain: DomainSpec,
    u_range: (f64, f64),
    f: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<GridFunction> {
    let mut out = GridFunction::new(domain, u_range, g.nu, g.nv, vec![0.0; g.nu * g.nv])?;
    let nodes: Vec<(f64, f64)> = (0..g.nu * g.nv).map(|k| (out.u(k % g.nu), out.v(k / g.nu))).collect();
    out.values = nodes.par_iter().map(|&(u, v)| f(u, v)).collect();
    Ok(out)
}
