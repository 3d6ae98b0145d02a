//! Interpolation that never overshoots a locally concave function.
//!
//! A point `y` between grid columns `i` and `i+1` is written as a convex
//! combination, in the original `x` coordinates, of points on the straight
//! chords joining the row nodes `(i, j)` and `(i+1, j)`. Every chord and
//! every vertical segment used lies in the domain, so for a locally concave
//! `B` the interpolant of `B`'s nodal values is at most `B(y)`, and it is
//! exact for functions linear in `x`.
//!
//! In intrinsic coordinates the chord of row `j` sits at level `v_j + s`,
//! where the sag `s ≥ 0` depends on the position inside the column but not
//! on `j`. Points below the first chord are interpolated against the exact
//! boundary data; points above the last chord that stays in the domain use
//! the tangent through the point of the free boundary above them.

use crate::domain::{BellmanPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;
use crate::quadrature::bisect;

const SNAP: f64 = 1e-12;

/// Convex weights over grid values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Loc {
    /// Known constant (boundary data).
    Exact(f64),
    /// Rows `j`, `j+1` of columns `i`, `i+1`; `k = j·nu + i`.
    Inner { k: u32, th: f64, om: f64 },
    /// Between the boundary value `c` (NaN: interpolate row 0) and the row-0 chord.
    Lens { k: u32, th: f64, om: f64, c: f64 },
    /// Between the chord of row `nv-2` and the free-boundary point `tops[t]`.
    Top { k: u32, th: f64, om: f64, t: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TopPoint {
    a: (u32, f64, f64),
    b: (u32, f64, f64),
    wa: f64,
}

/// Grid geometry needed to build [`Loc`]s.
pub(crate) struct Locator<'a> {
    domain: DomainSpec,
    u_min: f64,
    u_max: f64,
    nu: usize,
    nv: usize,
    hv: f64,
    v_max: f64,
    x1: Vec<f64>,
    lower_x2: Vec<f64>,
    profile: Option<&'a BoundaryProfile>,
}

impl<'a> Locator<'a> {
    pub fn new(
        domain: DomainSpec,
        u_range: (f64, f64),
        nu: usize,
        nv: usize,
        profile: Option<&'a BoundaryProfile>,
    ) -> Result<Self> {
        if nv < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 rows, got {nv}")));
        }
        let (u_min, u_max) = u_range;
        let v_max = domain.v_max();
        let hv = v_max / (nv - 1) as f64;
        let u_at = |i: usize| if i + 1 == nu { u_max } else { u_min + (u_max - u_min) * (i as f64 / (nu - 1) as f64) };
        let x1: Vec<f64> = (0..nu).map(|i| domain.u_to_x1(u_at(i))).collect();
        let lower_x2: Vec<f64> = (0..nu).map(|i| domain.from_intrinsic(u_at(i), 0.0).x2).collect();
        let loc = Locator { domain, u_min, u_max, nu, nv, hv, v_max, x1, lower_x2, profile };
        // the chord of row nv-2 must stay in the domain
        let worst = (0..nu - 1).map(|i| loc.sag(i, 0.5)).fold(0.0, f64::max);
        if worst > hv {
            return Err(Error::InvalidParameter(format!(
                "grid too coarse in u: chord sag {worst:.3e} exceeds the row spacing {hv:.3e}"
            )));
        }
        Ok(loc)
    }

    /// Level of the row-0 chord of column `i` above the curve, at x1-fraction `th`.
    fn sag(&self, i: usize, th: f64) -> f64 {
        if th == 0.0 || th == 1.0 {
            return 0.0;
        }
        let x1 = (1.0 - th) * self.x1[i] + th * self.x1[i + 1];
        let x2 = (1.0 - th) * self.lower_x2[i] + th * self.lower_x2[i + 1];
        self.domain.to_intrinsic_unchecked(&BellmanPoint { x1, x2 }).1.max(0.0)
    }

    fn column(&self, u: f64) -> usize {
        let f = (u - self.u_min) / (self.u_max - self.u_min) * (self.nu - 1) as f64;
        (f.floor().max(0.0) as usize).min(self.nu - 2)
    }

    fn x1_fraction(&self, i: usize, x1: f64) -> f64 {
        let th = ((x1 - self.x1[i]) / (self.x1[i + 1] - self.x1[i])).clamp(0.0, 1.0);
        if th < SNAP {
            0.0
        } else if th > 1.0 - SNAP {
            1.0
        } else {
            th
        }
    }

    /// `x2` of the point at intrinsic level `v` above x1 (via `u`).
    fn x2_at(&self, u: f64, v: f64) -> f64 {
        self.domain.from_intrinsic(u, v).x2
    }

    fn weight(&self, u: f64, x2: f64, v_lo: f64, v_hi: f64) -> f64 {
        let lo = self.x2_at(u, v_lo);
        let hi = self.x2_at(u, v_hi);
        if hi == lo {
            0.0
        } else {
            ((x2 - lo) / (hi - lo)).clamp(0.0, 1.0)
        }
    }

    /// Weights for the two-row interpolant strictly inside the chord band.
    fn inner(&self, i: usize, th: f64, s: f64, u: f64, v: f64, x2: f64) -> (u32, f64, f64) {
        let j_max = if th == 0.0 || th == 1.0 { self.nv - 2 } else { self.nv - 3 };
        let j = (((v - s) / self.hv).floor().max(0.0) as usize).min(j_max);
        let v_lo = j as f64 * self.hv + s;
        let om = self.weight(u, x2, v_lo, v_lo + self.hv);
        ((j * self.nu + i) as u32, th, om)
    }

    /// Locator for a point given in `x` coordinates; `true` if it was clamped
    /// into the grid.
    pub fn locate(&self, y: &BellmanPoint, tops: &mut Vec<TopPoint>) -> (Loc, bool) {
        let (u_raw, v_raw) = self.domain.to_intrinsic_unchecked(y);
        let slack = 1e-9 * (self.u_max - self.u_min);
        let mut clamped = !(u_raw >= self.u_min - slack && u_raw <= self.u_max + slack);
        clamped |= !(v_raw >= -1e-9 * self.v_max && v_raw <= self.v_max * (1.0 + 1e-9));
        let u = u_raw.clamp(self.u_min, self.u_max);
        let v = v_raw.clamp(0.0, self.v_max);
        let x1 = self.domain.u_to_x1(u);
        let x2 = if clamped || u != u_raw { self.x2_at(u, v) } else { y.x2 };
        let i = self.column(u);
        let th = self.x1_fraction(i, x1);
        let s = self.sag(i, th);
        let at_column = th == 0.0 || th == 1.0;
        if v < s {
            let om = self.weight(u, x2, 0.0, s);
            let c = self.profile.map(|p| p.value(x1)).unwrap_or(f64::NAN);
            return (Loc::Lens { k: i as u32, th, om, c }, clamped);
        }
        let top_band = (self.nv - 2) as f64 * self.hv + s;
        if at_column || v <= top_band {
            let (k, th, om) = self.inner(i, th, s, u, v, x2);
            return (Loc::Inner { k, th, om }, clamped);
        }
        // above the last in-domain chord: mix with the free-boundary point above y
        let k = ((self.nv - 2) * self.nu + i) as u32;
        match self.top_point(u) {
            Some(top) => {
                tops.push(top);
                let om = self.weight(u, x2, top_band, self.v_max);
                (Loc::Top { k, th, om, t: (tops.len() - 1) as u32 }, clamped)
            }
            None => {
                // tangent leaves the grid: use the top-row chord, which is exact for
                // linear data but may overshoot by the sag
                let om = self.weight(u, x2, top_band, self.v_max + s);
                (Loc::Inner { k, th, om }, true)
            }
        }
    }

    /// Lower estimate at `(u, v_max)` from the tangent chord down to level `v_max - hv`.
    fn top_point(&self, u: f64) -> Option<TopPoint> {
        let t = self.domain.level_tangent(u, self.v_max);
        let n = t[0].hypot(t[1]);
        let d = [t[0] / n, t[1] / n];
        let x = self.domain.from_intrinsic(u, self.v_max);
        let target = self.v_max - self.hv;
        let level = |s: f64| {
            let y = BellmanPoint { x1: x.x1 + s * d[0], x2: x.x2 + s * d[1] };
            match self.domain {
                DomainSpec::Bmo { .. } => y.x2 - y.x1 * y.x1,
                _ if y.x1 > 0.0 && (y.x2 > 0.0 || matches!(self.domain, DomainSpec::AInf { .. })) => {
                    self.domain.to_intrinsic_unchecked(&y).1
                }
                _ => f64::NEG_INFINITY,
            }
        };
        let mut ends = [0.0; 2];
        for (slot, sign) in ends.iter_mut().zip([-1.0, 1.0]) {
            let mut hi = (self.hv).sqrt() / n.max(1e-300) * 0.5 + 1e-12;
            let mut iter = 0;
            while level(sign * hi) > target && iter < 200 {
                hi *= 2.0;
                iter += 1;
            }
            *slot = sign * bisect(|s| level(sign * s) - target, 0.0, hi, 100);
            if level(*slot) > target {
                // stay on the lower side of the band edge
                *slot *= 1.0 + 1e-12;
            }
        }
        let sub = |s: f64| {
            let y = BellmanPoint { x1: x.x1 + s * d[0], x2: x.x2 + s * d[1] };
            let (uy, vy) = self.domain.to_intrinsic_unchecked(&y);
            if !(uy >= self.u_min && uy <= self.u_max) {
                return None;
            }
            let vy = vy.clamp(0.0, self.v_max - self.hv);
            let i = self.column(uy);
            let th = self.x1_fraction(i, self.domain.u_to_x1(uy));
            let s = self.sag(i, th);
            Some(self.inner(i, th, s, uy, vy.max(s), self.x2_at(uy, vy.max(s))))
        };
        let a = sub(ends[0])?;
        let b = sub(ends[1])?;
        let (sa, sb) = (ends[0], ends[1]);
        Some(TopPoint { a, b, wa: sb / (sb - sa) })
    }
}

#[inline]
fn two_rows(values: &[f64], nu: usize, k: u32, th: f64, om: f64) -> f64 {
    let k = k as usize;
    let row = |k: usize| if th == 0.0 { values[k] } else if th == 1.0 { values[k + 1] } else { values[k] + th * (values[k + 1] - values[k]) };
    let lo = row(k);
    if om == 0.0 {
        lo
    } else {
        let hi = row(k + nu);
        if om == 1.0 {
            hi
        } else {
            lo + om * (hi - lo)
        }
    }
}

#[inline]
fn row_value(values: &[f64], k: usize, th: f64) -> f64 {
    if th == 0.0 {
        values[k]
    } else if th == 1.0 {
        values[k + 1]
    } else {
        values[k] + th * (values[k + 1] - values[k])
    }
}

#[inline]
pub(crate) fn eval(loc: &Loc, values: &[f64], nu: usize, tops: &[TopPoint]) -> f64 {
    match *loc {
        Loc::Exact(c) => c,
        Loc::Inner { k, th, om } => two_rows(values, nu, k, th, om),
        Loc::Lens { k, th, om, c } => {
            let chord = row_value(values, k as usize, th);
            let c = if c.is_nan() { chord } else { c };
            if om == 1.0 {
                chord
            } else {
                c + om * (chord - c)
            }
        }
        Loc::Top { k, th, om, t } => {
            let chord = row_value(values, k as usize, th);
            let tp = &tops[t as usize];
            let top = tp.wa * two_rows(values, nu, tp.a.0, tp.a.1, tp.a.2)
                + (1.0 - tp.wa) * two_rows(values, nu, tp.b.0, tp.b.1, tp.b.2);
            chord + om * (top - chord)
        }
    }
}

/// One-off evaluation of the interpolant at an intrinsic point.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lower_interpolate(
    domain: DomainSpec,
    u_range: (f64, f64),
    nu: usize,
    nv: usize,
    profile: Option<&BoundaryProfile>,
    values: &[f64],
    u: f64,
    v: f64,
) -> Result<f64> {
    let loc = Locator::new(domain, u_range, nu, nv, profile)?;
    let mut tops = Vec::new();
    let (l, _) = loc.locate(&domain.from_intrinsic(u, v), &mut tops);
    Ok(eval(&l, values, nu, &tops))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_exact(domain: DomainSpec, u_range: (f64, f64), nu: usize, nv: usize, f: fn(&BellmanPoint) -> f64) {
        let boundary = BoundaryProfile::custom("f", move |s| f(&domain.lower_boundary(s).unwrap()));
        let loc = Locator::new(domain, u_range, nu, nv, Some(&boundary)).unwrap();
        let mut values = vec![0.0; nu * nv];
        for j in 0..nv {
            for i in 0..nu {
                let u = u_range.0 + (u_range.1 - u_range.0) * i as f64 / (nu - 1) as f64;
                let v = domain.v_max() * j as f64 / (nv - 1) as f64;
                values[j * nu + i] = f(&domain.from_intrinsic(u, v));
            }
        }
        let mut tops = Vec::new();
        for a in 0..=37 {
            for b in 0..=23 {
                let u = u_range.0 + 0.2 + (u_range.1 - u_range.0 - 0.4) * a as f64 / 37.0;
                let v = domain.v_max() * b as f64 / 23.0;
                let y = domain.from_intrinsic(u, v);
                let (l, _) = loc.locate(&y, &mut tops);
                let got = eval(&l, &values, nu, &tops);
                let want = f(&y);
                assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{domain} ({u}, {v}) {l:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn exact_for_linear_functions() {
        let lin = |x: &BellmanPoint| 0.3 + 1.7 * x.x1 - 0.4 * x.x2;
        check_exact(DomainSpec::bmo(1.0).unwrap(), (-2.0, 2.0), 41, 21, lin);
        check_exact(DomainSpec::ap(2.5, 3.0).unwrap(), (-1.0, 1.0), 41, 21, lin);
        check_exact(DomainSpec::ainf(2.0).unwrap(), (-1.0, 1.0), 41, 21, lin);
    }

    #[test]
    fn never_above_a_concave_function() {
        // x1 ↦ -x1² - (x2 - 1)² is concave on the whole plane
        let d = DomainSpec::bmo(1.0).unwrap();
        let f = |x: &BellmanPoint| -x.x1 * x.x1 - (x.x2 - 1.0).powi(2);
        let boundary = BoundaryProfile::custom("f", move |s| f(&BellmanPoint { x1: s, x2: s * s }));
        let (nu, nv) = (31, 11);
        let loc = Locator::new(d, (-1.5, 1.5), nu, nv, Some(&boundary)).unwrap();
        let mut values = vec![0.0; nu * nv];
        for j in 0..nv {
            for i in 0..nu {
                values[j * nu + i] = f(&d.from_intrinsic(-1.5 + 0.1 * i as f64, 0.1 * j as f64));
            }
        }
        let mut tops = Vec::new();
        for a in 0..200 {
            for b in 0..=20 {
                let y = d.from_intrinsic(-1.3 + 2.6 * a as f64 / 199.0, b as f64 / 20.0);
                let (l, _) = loc.locate(&y, &mut tops);
                assert!(eval(&l, &values, nu, &tops) <= f(&y) + 1e-12);
            }
        }
    }

    #[test]
    fn coarse_columns_rejected() {
        assert!(Locator::new(DomainSpec::bmo(0.1).unwrap(), (-5.0, 5.0), 11, 11, None).is_err());
    }
}
