use std::fmt::Write as _;

use crate::domain::{BellmanPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;

/// Candidate Bellman function sampled on a rectangular grid in intrinsic
/// coordinates. Row `j` is the level `v_j = v_max·j/(nv-1)`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub domain: DomainSpec,
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
    pub nv: usize,
    /// Row-major, `values[j * nu + i]` at `(u_i, v_j)`.
    pub values: Vec<f64>,
    /// Boundary data for exact evaluation on `v = 0`; absent for derived grids.
    pub profile: Option<BoundaryProfile>,
}

impl GridFunction {
    pub fn new(domain: DomainSpec, u_range: (f64, f64), nu: usize, nv: usize, values: Vec<f64>) -> Result<Self> {
        let (u_min, u_max) = u_range;
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidParameter(format!("grid {nu}x{nv} needs at least 2 nodes per axis")));
        }
        if !(u_min.is_finite() && u_max.is_finite() && u_max > u_min) {
            return Err(Error::InvalidParameter(format!("u range [{u_min}, {u_max}]")));
        }
        if values.len() != nu * nv {
            return Err(Error::InvalidParameter(format!("{} values for a {nu}x{nv} grid", values.len())));
        }
        Ok(GridFunction { domain, u_min, u_max, nu, nv, values, profile: None })
    }

    /// Grid filled from a function of the intrinsic coordinates.
    pub fn from_fn(
        domain: DomainSpec,
        u_range: (f64, f64),
        nu: usize,
        nv: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut g = GridFunction::new(domain, u_range, nu, nv, vec![0.0; nu * nv])?;
        for j in 0..nv {
            for i in 0..nu {
                g.values[j * nu + i] = f(g.u(i), g.v(j));
            }
        }
        Ok(g)
    }

    pub fn v_max(&self) -> f64 {
        self.domain.v_max()
    }

    pub fn hu(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        self.v_max() / (self.nv - 1) as f64
    }

    #[inline]
    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.nu {
            self.u_max
        } else {
            self.u_min + (self.u_max - self.u_min) * (i as f64 / (self.nu - 1) as f64)
        }
    }

    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v_max() * (j as f64 / (self.nv - 1) as f64)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nu + i]
    }

    pub fn point(&self, i: usize, j: usize) -> BellmanPoint {
        self.domain.from_intrinsic(self.u(i), self.v(j))
    }

    /// Bilinear interpolation; arguments outside the grid are clamped and
    /// the second component reports whether that happened.
    pub fn interpolate(&self, u: f64, v: f64) -> (f64, bool) {
        bilinear(&self.values, self.nu, self.nv, self.u_min, self.u_max, self.v_max(), u, v)
    }

    /// Value at intrinsic `(u, v)` from the interpolant that stays below
    /// every locally concave function with these nodal values (boundary data
    /// used where known). Falls back to bilinear on grids too coarse for it.
    pub fn eval_intrinsic(&self, u: f64, v: f64) -> f64 {
        if let Some(p) = &self.profile {
            if v <= 0.0 && u >= self.u_min && u <= self.u_max {
                return p.value(self.domain.u_to_x1(u));
            }
        }
        let range = (self.u_min, self.u_max);
        super::interp::lower_interpolate(self.domain, range, self.nu, self.nv, self.profile.as_ref(), &self.values, u, v)
            .unwrap_or_else(|_| self.interpolate(u, v).0)
    }

    pub fn eval(&self, x: &BellmanPoint) -> Result<f64> {
        let (u, v) = self.domain.to_intrinsic(x)?;
        if u < self.u_min - 1e-12 || u > self.u_max + 1e-12 {
            return Err(Error::WindowOutOfRange(format!("u = {u} outside [{}, {}]", self.u_min, self.u_max)));
        }
        Ok(self.eval_intrinsic(u, v))
    }

    /// Column index range of nodes with `u` in `[a, b]`.
    pub fn columns_in(&self, a: f64, b: f64) -> std::ops::RangeInclusive<usize> {
        let h = self.hu();
        let lo = (((a - self.u_min) / h) - 1e-9).ceil().max(0.0) as usize;
        let hi = (((b - self.u_min) / h) + 1e-9).floor().min((self.nu - 1) as f64).max(0.0) as usize;
        lo..=hi
    }

    /// CSV dump: a header line, then `nv` rows of `nu` values, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 25 + 128);
        let _ = writeln!(
            out,
            "# domain={} {:.16e} {:.16e} {} {}",
            self.domain, self.u_min, self.u_max, self.nu, self.nv
        );
        for j in 0..self.nv {
            for i in 0..self.nu {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.16e}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let rest = header
            .strip_prefix("# domain=")
            .ok_or_else(|| Error::Parse(format!("bad grid header `{header}`")))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse(format!("bad grid header `{header}`")));
        }
        let domain: DomainSpec = fields[0].parse()?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("integer `{s}`")));
        let (u_min, u_max, nu, nv) = (num(fields[1])?, num(fields[2])?, int(fields[3])?, int(fields[4])?);
        let mut values = Vec::with_capacity(nu * nv);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let row: Vec<f64> = line.split(',').map(|s| num(s.trim())).collect::<Result<_>>()?;
            if row.len() != nu {
                return Err(Error::Parse(format!("row with {} values, expected {nu}", row.len())));
            }
            values.extend(row);
        }
        GridFunction::new(domain, (u_min, u_max), nu, nv, values)
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn bilinear(
    values: &[f64],
    nu: usize,
    nv: usize,
    u_min: f64,
    u_max: f64,
    v_max: f64,
    u: f64,
    v: f64,
) -> (f64, bool) {
    let fu = (u - u_min) / (u_max - u_min) * (nu - 1) as f64;
    let fv = v / v_max * (nv - 1) as f64;
    let slack = 1e-9;
    let clamped = fu < -slack || fu > (nu - 1) as f64 + slack || fv < -slack || fv > (nv - 1) as f64 + slack;
    let fu = fu.clamp(0.0, (nu - 1) as f64);
    let fv = fv.clamp(0.0, (nv - 1) as f64);
    let i = (fu.floor() as usize).min(nu - 2);
    let j = (fv.floor() as usize).min(nv - 2);
    let a = fu - i as f64;
    let b = fv - j as f64;
    let k = j * nu + i;
    let (v00, v10, v01, v11) = (values[k], values[k + 1], values[k + nu], values[k + nu + 1]);
    // skip zero-weight corners so infinities elsewhere in the stencil do not leak
    let lo = if a == 0.0 { v00 } else if a == 1.0 { v10 } else { v00 + a * (v10 - v00) };
    let value = if b == 0.0 {
        lo
    } else {
        let hi = if a == 0.0 { v01 } else if a == 1.0 { v11 } else { v01 + a * (v11 - v01) };
        if b == 1.0 {
            hi
        } else {
            lo + b * (hi - lo)
        }
    };
    (value, clamped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let d = DomainSpec::bmo(0.7).unwrap();
        let g = GridFunction::from_fn(d, (-1.3, 2.1), 7, 5, |u, v| (u * 3.1).sin() + v.exp() / 3.0).unwrap();
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.domain, g.domain);
        assert_eq!((back.u_min, back.u_max, back.nu, back.nv), (g.u_min, g.u_max, g.nu, g.nv));
        for (a, b) in back.values.iter().zip(&g.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let d = DomainSpec::bmo(1.0).unwrap();
        let g = GridFunction::from_fn(d, (-1.0, 1.0), 11, 9, |u, v| 1.0 + 2.0 * u - v + 0.5 * u * v).unwrap();
        for &(u, v) in &[(0.13, 0.77), (-0.99, 0.01), (1.0, 1.0), (0.0, 0.5)] {
            let (val, clamped) = g.interpolate(u, v);
            assert!(!clamped);
            assert!((val - (1.0 + 2.0 * u - v + 0.5 * u * v)).abs() < 1e-13);
        }
        assert!(g.interpolate(1.5, 0.5).1);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(GridFunction::from_csv("").is_err());
        assert!(GridFunction::from_csv("# domain=bmo:mu=1 0 1 2 2\n1,2\n3\n").is_err());
        assert!(GridFunction::from_csv("garbage").is_err());
    }
}
