//! Bellman domains for BMO and A_p.
//!
//! Every domain is a strip between two curves in the plane. The intrinsic
//! coordinates `(u, v)` straighten it into `R × [0, v_max]` (or a half of it
//! in `u`), with `v = 0` the curve carrying the boundary data and
//! `v = v_max` the free boundary.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{bisect, golden_max};

/// Tolerance on the defining inequalities; membership is tested on the closure.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

const SEARCH_ITERS: usize = 64;
const BISECT_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellmanPoint {
    pub x1: f64,
    pub x2: f64,
}

impl BellmanPoint {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !x1.is_finite() || !x2.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite point ({x1}, {x2})")));
        }
        Ok(BellmanPoint { x1, x2 })
    }

    fn along(&self, d: [f64; 2], s: f64) -> BellmanPoint {
        BellmanPoint { x1: self.x1 + s * d[0], x2: self.x2 + s * d[1] }
    }
}

/// Which curve of the closure an extremal chord endpoint lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `v = 0`, where the boundary data lives.
    Lower,
    /// `v = v_max`.
    Upper,
    /// The truncation of the `u` range.
    Side,
    /// Positivity limit of an A_p coordinate or a search cap.
    Open,
}

/// Maximal extent of a line through a point, clipped to the domain closure
/// and a `u` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineExtent {
    pub s_minus: f64,
    pub s_plus: f64,
    pub minus_end: Boundary,
    pub plus_end: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    /// Parabolic strip `x1² ≤ x2 ≤ x1² + μ²`.
    Bmo { mu: f64 },
    /// `x1, x2 > 0`, `1 ≤ x1 x2^{p-1} ≤ δ`.
    Ap { p: f64, delta: f64 },
    /// `x1 > 0`, `1 ≤ x1 e^{-x2} ≤ δ`.
    #[serde(rename = "ainf")]
    AInf { delta: f64 },
}

impl DomainSpec {
    pub fn bmo(mu: f64) -> Result<Self> {
        DomainSpec::Bmo { mu }.validated()
    }

    pub fn ap(p: f64, delta: f64) -> Result<Self> {
        DomainSpec::Ap { p, delta }.validated()
    }

    pub fn ainf(delta: f64) -> Result<Self> {
        DomainSpec::AInf { delta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            DomainSpec::Bmo { mu } => mu.is_finite() && mu > 0.0,
            DomainSpec::Ap { p, delta } => p.is_finite() && p > 1.0 && delta.is_finite() && delta > 1.0,
            DomainSpec::AInf { delta } => delta.is_finite() && delta > 1.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidDomain(self.to_string()))
        }
    }

    /// Height of the intrinsic strip.
    pub fn v_max(&self) -> f64 {
        match *self {
            DomainSpec::Bmo { mu } => mu * mu,
            DomainSpec::Ap { delta, .. } | DomainSpec::AInf { delta } => delta.ln(),
        }
    }

    /// The same family with the strip height replaced by `v_max`.
    pub fn with_v_max(&self, v_max: f64) -> Result<Self> {
        if !(v_max > 0.0) {
            return Err(Error::InvalidParameter(format!("strip height {v_max} must be positive")));
        }
        match *self {
            DomainSpec::Bmo { .. } => DomainSpec::bmo(v_max.sqrt()),
            DomainSpec::Ap { p, .. } => DomainSpec::ap(p, v_max.exp()),
            DomainSpec::AInf { .. } => DomainSpec::ainf(v_max.exp()),
        }
    }

    fn tol(&self) -> f64 {
        MEMBERSHIP_TOL * self.v_max().max(1.0)
    }

    /// Intrinsic `v` of a point, or `None` when it is not defined (nonpositive coordinates).
    fn level(&self, x: &BellmanPoint) -> Option<f64> {
        match *self {
            DomainSpec::Bmo { .. } => Some(x.x2 - x.x1 * x.x1),
            DomainSpec::Ap { p, .. } => {
                if x.x1 > 0.0 && x.x2 > 0.0 {
                    Some(x.x1.ln() + (p - 1.0) * x.x2.ln())
                } else {
                    None
                }
            }
            DomainSpec::AInf { .. } => {
                if x.x1 > 0.0 {
                    Some(x.x1.ln() - x.x2)
                } else {
                    None
                }
            }
        }
    }

    pub fn contains(&self, x: &BellmanPoint) -> bool {
        if !x.x1.is_finite() || !x.x2.is_finite() {
            return false;
        }
        let tol = self.tol();
        match *self {
            DomainSpec::Bmo { mu } => {
                let e = x.x2 - x.x1 * x.x1;
                e >= -tol * (1.0 + x.x2.abs()) && e <= mu * mu + tol * (1.0 + x.x2.abs())
            }
            DomainSpec::Ap { p, delta } => {
                if !(x.x1 > 0.0 && x.x2 > 0.0) {
                    return false;
                }
                let q = x.x1 * x.x2.powf(p - 1.0);
                q >= 1.0 - tol && q <= delta * (1.0 + tol)
            }
            DomainSpec::AInf { delta } => {
                if !(x.x1 > 0.0) {
                    return false;
                }
                let q = x.x1 * (-x.x2).exp();
                q >= 1.0 - tol && q <= delta * (1.0 + tol)
            }
        }
    }

    /// The point of the data-carrying boundary above `x1`.
    pub fn lower_boundary(&self, x1: f64) -> Result<BellmanPoint> {
        match *self {
            DomainSpec::Bmo { .. } => BellmanPoint::new(x1, x1 * x1),
            DomainSpec::Ap { p, .. } => {
                if !(x1 > 0.0) {
                    return Err(Error::DomainArgument(format!("x1 = {x1} must be positive")));
                }
                BellmanPoint::new(x1, x1.powf(-1.0 / (p - 1.0)))
            }
            DomainSpec::AInf { .. } => {
                if !(x1 > 0.0) {
                    return Err(Error::DomainArgument(format!("x1 = {x1} must be positive")));
                }
                BellmanPoint::new(x1, x1.ln())
            }
        }
    }

    /// Boundary-data abscissa `x1` for the intrinsic coordinate `u`.
    pub fn u_to_x1(&self, u: f64) -> f64 {
        match self {
            DomainSpec::Bmo { .. } => u,
            _ => u.exp(),
        }
    }

    pub fn x1_to_u(&self, x1: f64) -> f64 {
        match self {
            DomainSpec::Bmo { .. } => x1,
            _ => x1.ln(),
        }
    }

    pub fn to_intrinsic(&self, x: &BellmanPoint) -> Result<(f64, f64)> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain { x1: x.x1, x2: x.x2 });
        }
        Ok(self.to_intrinsic_unchecked(x))
    }

    /// Intrinsic coordinates without the membership check; clamps nothing.
    pub fn to_intrinsic_unchecked(&self, x: &BellmanPoint) -> (f64, f64) {
        match *self {
            DomainSpec::Bmo { .. } => (x.x1, x.x2 - x.x1 * x.x1),
            DomainSpec::Ap { p, .. } => (x.x1.ln(), x.x1.ln() + (p - 1.0) * x.x2.ln()),
            DomainSpec::AInf { .. } => (x.x1.ln(), x.x1.ln() - x.x2),
        }
    }

    pub fn from_intrinsic(&self, u: f64, v: f64) -> BellmanPoint {
        match *self {
            DomainSpec::Bmo { .. } => BellmanPoint { x1: u, x2: v + u * u },
            DomainSpec::Ap { p, .. } => BellmanPoint { x1: u.exp(), x2: ((v - u) / (p - 1.0)).exp() },
            DomainSpec::AInf { .. } => BellmanPoint { x1: u.exp(), x2: u - v },
        }
    }

    /// Derivative of `from_intrinsic` in `u` at fixed `v`: tangent of the level curve.
    pub fn level_tangent(&self, u: f64, v: f64) -> [f64; 2] {
        match *self {
            DomainSpec::Bmo { .. } => [1.0, 2.0 * u],
            DomainSpec::Ap { p, .. } => {
                let x = self.from_intrinsic(u, v);
                [x.x1, -x.x2 / (p - 1.0)]
            }
            DomainSpec::AInf { .. } => [u.exp(), 1.0],
        }
    }

    /// Directions of the lines through the intrinsic point `(u, v)` that are
    /// tangent to the free boundary `v = v_max`.
    pub fn free_boundary_tangents(&self, u: f64, v: f64) -> Vec<[f64; 2]> {
        let v_max = self.v_max();
        let gap = v_max - v;
        if gap <= self.tol() {
            return vec![self.level_tangent(u, v_max)];
        }
        if let DomainSpec::Bmo { .. } = self {
            let r = gap.sqrt();
            return vec![[1.0, 2.0 * (u - r)], [1.0, 2.0 * (u + r)]];
        }
        let x = self.from_intrinsic(u, v);
        let h = |w: f64| {
            let f = self.from_intrinsic(w, v_max);
            let t = self.level_tangent(w, v_max);
            t[0] * (x.x2 - f.x2) - t[1] * (x.x1 - f.x1)
        };
        let h0 = h(u);
        let mut out = Vec::new();
        for sign in [-1.0, 1.0] {
            let mut step = 0.05 * gap.sqrt().max(1e-3);
            let mut found = None;
            for _ in 0..60 {
                let w = u + sign * step;
                let hw = h(w);
                if !hw.is_finite() {
                    break;
                }
                if (hw > 0.0) != (h0 > 0.0) {
                    found = Some(w);
                    break;
                }
                step *= 1.6;
            }
            if let Some(w_end) = found {
                let w = bisect(h, u, w_end, BISECT_ITERS);
                out.push(self.level_tangent(w, v_max));
            }
        }
        out
    }

    /// True iff the closed segment `[a, b]` lies in the domain closure.
    pub fn segment_in_domain(&self, a: &BellmanPoint, b: &BellmanPoint) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        let tol = self.tol();
        let d = [b.x1 - a.x1, b.x2 - a.x2];
        match *self {
            DomainSpec::Bmo { mu } => {
                // e(s) = e(0) + β s − d1² s², concave; its minimum over [0,1] is at an endpoint
                let e0 = a.x2 - a.x1 * a.x1;
                let beta = d[1] - 2.0 * a.x1 * d[0];
                let c = d[0] * d[0];
                let s_star = if c > 0.0 { (beta / (2.0 * c)).clamp(0.0, 1.0) } else if beta > 0.0 { 1.0 } else { 0.0 };
                let e_max = e0 + beta * s_star - c * s_star * s_star;
                e_max <= mu * mu + tol * (1.0 + a.x2.abs().max(b.x2.abs()))
            }
            _ => {
                let v_max = self.v_max();
                let level = |s: f64| self.level(&a.along(d, s)).unwrap_or(f64::NEG_INFINITY);
                let (_, peak) = golden_max(level, 0.0, 1.0, SEARCH_ITERS);
                peak <= v_max + tol
            }
        }
    }

    /// Maximal extent of the line `x + s·d` around `s = 0` inside the closure
    /// intersected with `u ∈ [u_lo, u_hi]`. `(u, v)` are the intrinsic
    /// coordinates of `x`, which must lie in the closed strip.
    pub fn line_extent(&self, u: f64, v: f64, d: [f64; 2], u_lo: f64, u_hi: f64) -> LineExtent {
        match *self {
            DomainSpec::Bmo { mu } => bmo_line_extent(u, v, mu * mu, d, u_lo, u_hi, self.tol()),
            _ => self.numeric_line_extent(u, v, d, u_lo, u_hi),
        }
    }

    /// Root-finding version of [`Self::line_extent`]; valid for every family.
    pub fn numeric_line_extent(&self, u: f64, v: f64, d: [f64; 2], u_lo: f64, u_hi: f64) -> LineExtent {
        let (s_plus, plus_end) = self.numeric_half_extent(u, v, d, u_lo, u_hi);
        let (s_m, minus_end) = self.numeric_half_extent(u, v, [-d[0], -d[1]], u_lo, u_hi);
        LineExtent { s_minus: -s_m, s_plus, minus_end, plus_end }
    }

    fn numeric_half_extent(&self, u: f64, v: f64, d: [f64; 2], u_lo: f64, u_hi: f64) -> (f64, Boundary) {
        let tol = self.tol();
        let v_max = self.v_max();
        let x = self.from_intrinsic(u, v);
        let level = |s: f64| -> f64 {
            let y = x.along(d, s);
            match *self {
                DomainSpec::Bmo { .. } => y.x2 - y.x1 * y.x1 - (v - (x.x2 - x.x1 * x.x1)),
                _ => self.level(&y).map(|l| l - (self.level(&x).unwrap_or(v) - v)).unwrap_or(f64::NEG_INFINITY),
            }
        };
        // positivity and u-range limits on s ≥ 0
        let mut limit = f64::INFINITY;
        let mut limit_kind = Boundary::Open;
        let mut consider = |s: f64, kind: Boundary| {
            if s >= 0.0 && s < limit {
                limit = s;
                limit_kind = kind;
            }
        };
        match self {
            DomainSpec::Bmo { .. } => {
                if d[0] > 0.0 {
                    consider((u_hi - x.x1) / d[0], Boundary::Side);
                } else if d[0] < 0.0 {
                    consider((u_lo - x.x1) / d[0], Boundary::Side);
                }
            }
            _ => {
                if d[0] < 0.0 {
                    consider(-x.x1 / d[0] * (1.0 - 1e-12), Boundary::Open);
                    consider((u_lo.exp() - x.x1) / d[0], Boundary::Side);
                } else if d[0] > 0.0 {
                    consider((u_hi.exp() - x.x1) / d[0], Boundary::Side);
                }
                if let DomainSpec::Ap { .. } = self {
                    if d[1] < 0.0 {
                        consider(-x.x2 / d[1] * (1.0 - 1e-12), Boundary::Open);
                    }
                }
            }
        }
        if !limit.is_finite() {
            // the level leaves [0, v_max] eventually along any unbounded admissible ray
            let mut s = 1.0;
            while s < 1e8 {
                let l = level(s);
                if l < -1.0 || l > v_max + 1.0 {
                    break;
                }
                s *= 2.0;
            }
            limit = s;
            limit_kind = Boundary::Open;
        }
        let mut end = limit;
        let mut kind = limit_kind;
        // lower constraint: superlevel set {level ≥ -tol} is an interval containing 0
        if level(end) < -tol {
            end = bisect(|s| level(s) + tol, 0.0, end, BISECT_ITERS);
            kind = Boundary::Lower;
            // step back inside the closure
            while end > 0.0 && level(end) < -tol {
                end = end * (1.0 - 1e-15) - 1e-300;
            }
        }
        // upper constraint: {level > v_max + tol} is an interval
        let (s_star, peak) = golden_max(level, 0.0, end, SEARCH_ITERS);
        if peak > v_max + tol {
            if level(0.0) > v_max + tol {
                return (0.0, Boundary::Upper);
            }
            let mut e = bisect(|s| level(s) - v_max - tol, 0.0, s_star, BISECT_ITERS);
            while e > 0.0 && level(e) > v_max + tol {
                e = e * (1.0 - 1e-15) - 1e-300;
            }
            end = e.max(0.0);
            kind = Boundary::Upper;
        }
        (end, kind)
    }
}

/// Smallest and largest roots of `a s² + b s + c` with `a > 0`, stable formulation.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r1.min(r2), r1.max(r2)))
}

fn bmo_line_extent(u: f64, v: f64, v_max: f64, d: [f64; 2], u_lo: f64, u_hi: f64, tol: f64) -> LineExtent {
    // excess e(s) = v + β s − c s² along x + s d
    let beta = d[1] - 2.0 * u * d[0];
    let c = d[0] * d[0];
    let tol = tol * (1.0 + (v + u * u).abs());
    let mut plus = (f64::INFINITY, Boundary::Open);
    let mut minus = (f64::NEG_INFINITY, Boundary::Open);
    let limit = |s: f64, kind: Boundary, plus: &mut (f64, Boundary), minus: &mut (f64, Boundary)| {
        if s >= 0.0 {
            if s < plus.0 {
                *plus = (s, kind);
            }
        } else if s > minus.0 {
            *minus = (s, kind);
        }
    };
    // u-range
    if d[0] > 0.0 {
        limit((u_hi - u) / d[0], Boundary::Side, &mut plus, &mut minus);
        limit((u_lo - u) / d[0], Boundary::Side, &mut plus, &mut minus);
    } else if d[0] < 0.0 {
        limit((u_lo - u) / d[0], Boundary::Side, &mut plus, &mut minus);
        limit((u_hi - u) / d[0], Boundary::Side, &mut plus, &mut minus);
    }
    // lower: c s² − β s − (v + tol) ≤ 0
    if c > 0.0 {
        if let Some((r1, r2)) = quadratic_roots(c, -beta, -(v.max(0.0) + tol)) {
            limit(r2.max(0.0), Boundary::Lower, &mut plus, &mut minus);
            limit(r1.min(-0.0), Boundary::Lower, &mut plus, &mut minus);
        }
    } else if beta != 0.0 {
        let r = -(v.max(0.0) + tol) / beta;
        limit(r, Boundary::Lower, &mut plus, &mut minus);
    }
    // upper: c s² − β s + (v_max − v + tol) ≥ 0
    let w = (v_max - v).max(0.0) + tol;
    if c > 0.0 {
        if let Some((r1, r2)) = quadratic_roots(c, -beta, w) {
            if r1 >= 0.0 {
                limit(r1, Boundary::Upper, &mut plus, &mut minus);
            } else if r2 <= 0.0 {
                limit(r2.min(-0.0), Boundary::Upper, &mut plus, &mut minus);
            }
        }
    } else if beta != 0.0 {
        let r = w / beta;
        limit(if r == 0.0 { r.copysign(beta) } else { r }, Boundary::Upper, &mut plus, &mut minus);
    }
    let s_minus = if minus.0 == -0.0 { 0.0 } else { minus.0 };
    LineExtent { s_minus, s_plus: plus.0, minus_end: minus.1, plus_end: plus.1 }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Bmo { mu } => write!(f, "bmo:mu={mu:.16e}"),
            DomainSpec::Ap { p, delta } => write!(f, "ap:p={p:.16e},delta={delta:.16e}"),
            DomainSpec::AInf { delta } => write!(f, "ainf:delta={delta:.16e}"),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("domain `{s}`")))?;
        let mut mu = None;
        let mut p = None;
        let mut delta = None;
        for kv in rest.split(',') {
            let (k, val) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("domain field `{kv}`")))?;
            let val: f64 = val.trim().parse().map_err(|_| Error::Parse(format!("number `{val}`")))?;
            match k.trim() {
                "mu" => mu = Some(val),
                "p" => p = Some(val),
                "delta" => delta = Some(val),
                other => return Err(Error::Parse(format!("unknown domain field `{other}`"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("domain `{s}` lacks `{name}`"));
        match kind.trim() {
            "bmo" => DomainSpec::bmo(mu.ok_or_else(|| missing("mu"))?),
            "ap" => DomainSpec::ap(p.ok_or_else(|| missing("p"))?, delta.ok_or_else(|| missing("delta"))?),
            "ainf" => DomainSpec::ainf(delta.ok_or_else(|| missing("delta"))?),
            other => Err(Error::Parse(format!("unknown domain kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x1: f64, x2: f64) -> BellmanPoint {
        BellmanPoint::new(x1, x2).unwrap()
    }

    #[test]
    fn membership_examples() {
        let bmo = DomainSpec::bmo(1.0).unwrap();
        assert!(bmo.contains(&pt(1.0, 1.0)));
        assert!(!bmo.contains(&pt(0.0, 1.01)));
        let ap = DomainSpec::ap(2.0, 4.0).unwrap();
        assert!(ap.contains(&pt(2.0, 1.0)));
        assert!(!ap.contains(&pt(2.0, 3.0)));
        assert!(!ap.contains(&pt(-1.0, 1.0)));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DomainSpec::bmo(0.0).is_err());
        assert!(DomainSpec::ap(1.0, 2.0).is_err());
        assert!(DomainSpec::ap(2.0, 1.0).is_err());
        assert!(DomainSpec::ainf(0.5).is_err());
        assert!(BellmanPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn lower_boundary_examples() {
        let b = DomainSpec::bmo(1.0).unwrap().lower_boundary(2.0).unwrap();
        assert_eq!((b.x1, b.x2), (2.0, 4.0));
        let a = DomainSpec::ap(2.0, 3.0).unwrap().lower_boundary(4.0).unwrap();
        assert!((a.x2 - 0.25).abs() < 1e-15);
        let i = DomainSpec::ainf(3.0).unwrap().lower_boundary(1.0).unwrap();
        assert_eq!((i.x1, i.x2), (1.0, 0.0));
        assert!(DomainSpec::ap(2.0, 3.0).unwrap().lower_boundary(0.0).is_err());
        assert!(DomainSpec::ainf(3.0).unwrap().lower_boundary(-1.0).is_err());
    }

    #[test]
    fn intrinsic_examples() {
        let bmo = DomainSpec::bmo(1.0).unwrap();
        assert_eq!(bmo.to_intrinsic(&pt(3.0, 9.5)).unwrap(), (3.0, 0.5));
        let (u, v) = bmo.to_intrinsic(&pt(0.3, 0.7)).unwrap();
        let back = bmo.from_intrinsic(u, v);
        assert!((back.x1 - 0.3).abs() < 1e-12 && (back.x2 - 0.7).abs() < 1e-12);
        let ap = DomainSpec::ap(2.0, std::f64::consts::E).unwrap();
        assert_eq!(ap.to_intrinsic(&pt(1.0, 1.0)).unwrap(), (0.0, 0.0));
        assert!(bmo.to_intrinsic(&pt(0.0, 2.0)).is_err());
    }

    #[test]
    fn segment_examples() {
        let bmo = DomainSpec::bmo(1.0).unwrap();
        assert!(bmo.segment_in_domain(&pt(-0.5, 0.25), &pt(0.5, 0.25)));
        assert!(!bmo.segment_in_domain(&pt(-2.0, 4.0), &pt(2.0, 4.0)));
        let ap = DomainSpec::ap(2.0, 1.2).unwrap();
        assert!(!ap.segment_in_domain(&pt(1.0, 1.0), &pt(4.0, 0.25)));
    }

    #[test]
    fn ap_segment_matches_dense_sampling() {
        // brute force: x1·x2 along the segment at 10⁴ points
        let a = pt(1.0, 1.0);
        let b = pt(4.0, 0.25);
        for &delta in &[1.2, 1.5, 1.6, 2.0, 3.0] {
            let ap = DomainSpec::ap(2.0, delta).unwrap();
            let dense = (0..=10_000).all(|k| {
                let s = k as f64 / 10_000.0;
                let x1 = a.x1 + s * (b.x1 - a.x1);
                let x2 = a.x2 + s * (b.x2 - a.x2);
                x1 * x2 <= delta * (1.0 + MEMBERSHIP_TOL)
            });
            assert_eq!(ap.segment_in_domain(&a, &b), dense, "delta={delta}");
        }
    }

    #[test]
    fn bmo_extent_matches_numeric() {
        let d = DomainSpec::bmo(1.0).unwrap();
        for &(u, v) in &[(0.0, 0.5), (0.3, 0.1), (-1.2, 0.9), (2.0, 0.0), (0.5, 1.0)] {
            for k in 0..12 {
                let th = std::f64::consts::PI * k as f64 / 12.0 + 0.01;
                let dir = [th.cos(), th.sin()];
                let a = d.line_extent(u, v, dir, -3.0, 3.0);
                let b = d.numeric_line_extent(u, v, dir, -3.0, 3.0);
                assert!((a.s_plus - b.s_plus).abs() < 1e-6, "{u} {v} {k} {a:?} {b:?}");
                assert!((a.s_minus - b.s_minus).abs() < 1e-6, "{u} {v} {k} {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn top_point_keeps_tangent_chord() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let t = d.level_tangent(0.4, 1.0);
        let e = d.line_extent(0.4, 1.0, t, -5.0, 5.0);
        // tangent chord at the top reaches the lower boundary at x1 = 0.4 ± 1
        assert!((e.s_plus * t[0] - 1.0).abs() < 1e-9, "{e:?}");
        assert!((e.s_minus * t[0] + 1.0).abs() < 1e-9, "{e:?}");
        assert_eq!(e.plus_end, Boundary::Lower);
    }

    #[test]
    fn free_tangents_touch_the_upper_curve() {
        let ap = DomainSpec::ap(3.0, 2.5).unwrap();
        let (u, v) = (0.2, 0.3);
        let dirs = ap.free_boundary_tangents(u, v);
        assert_eq!(dirs.len(), 2);
        for dir in dirs {
            let e = ap.line_extent(u, v, dir, -6.0, 6.0);
            // the tangent line stays in the closure until it meets the lower curve
            assert_eq!(e.plus_end, Boundary::Lower, "{e:?}");
            assert_eq!(e.minus_end, Boundary::Lower, "{e:?}");
        }
    }

    #[test]
    fn display_round_trip() {
        for d in [DomainSpec::bmo(0.7).unwrap(), DomainSpec::ap(2.5, 3.0).unwrap(), DomainSpec::ainf(1.5).unwrap()] {
            let back: DomainSpec = d.to_string().parse().unwrap();
            assert_eq!(back, d);
        }
    }
}
