//! Tabulated first two moments of `log|X|` under either kernel.
//!
//! By scale invariance `E log|X| = log ℓ + F1(|y|/ℓ)` and
//! `E log²|X| = log²ℓ + 2 log ℓ F1 + F2`, where `ℓ` is the kernel length scale,
//! so a single table in `a = |y|/ℓ` covers the whole half-space.

use super::extend::extend;
use super::kernel::{KernelKind, SpaceTimePoint};
use super::testfn::{TestFunction, Transform};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LogAbsTable {
    pub kernel: KernelKind,
    pub n: usize,
    h: f64,
    f1: Vec<f64>,
    f2: Vec<f64>,
    g: TestFunction,
}

// grid in s = a/(1+a)
const S_MAX: f64 = 0.98;

fn direct(k: KernelKind, g: &TestFunction, a: f64) -> Result<(f64, f64)> {
    let mut y = vec![0.0; g.n];
    y[0] = a;
    let z = SpaceTimePoint { y, t: 1.0 };
    let m1 = extend(k, g, &Transform::identity(), &z)?.finite_value()?;
    let m2 = extend(k, g, &Transform::square(), &z)?.finite_value()?;
    Ok((m1, m2))
}

impl LogAbsTable {
    pub fn build(kernel: KernelKind, n: usize, nodes: usize) -> Result<Self> {
        if nodes < 8 {
            return Err(Error::InvalidParameter("table needs at least 8 nodes".into()));
        }
        let g = TestFunction::log_abs(n)?;
        let h = S_MAX / (nodes - 1) as f64;
        let mut f1 = Vec::with_capacity(nodes);
        let mut f2 = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let s = i as f64 * h;
            let (m1, m2) = direct(kernel, &g, s / (1.0 - s))?;
            f1.push(m1);
            f2.push(m2);
        }
        Ok(LogAbsTable { kernel, n, h, f1, f2, g })
    }

    fn scaled(&self, a: f64) -> Result<(f64, f64)> {
        let s = a / (1.0 + a);
        if s > S_MAX {
            return direct(self.kernel, &self.g, a);
        }
        // four-point Lagrange
        let len = self.f1.len();
        let x = s / self.h;
        let i0 = (x.floor() as usize).saturating_sub(1).min(len - 4);
        let mut out = (0.0, 0.0);
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (x - (i0 + k) as f64) / (j as f64 - k as f64);
                }
            }
            out.0 += w * self.f1[i0 + j];
            out.1 += w * self.f2[i0 + j];
        }
        Ok(out)
    }

    /// `(E log|X|, E log²|X|)` for `X` distributed by the kernel at `z`.
    pub fn moments(&self, z: &SpaceTimePoint) -> Result<(f64, f64)> {
        if z.dim() != self.n {
            return Err(Error::InvalidParameter(format!("point in R^{} for a table on R^{}", z.dim(), self.n)));
        }
        let l = self.kernel.length_scale(z.t);
        let (f1, f2) = self.scaled(z.norm_y() / l)?;
        let ll = l.ln();
        Ok((ll + f1, ll * ll + 2.0 * ll * f1 + f2))
    }

    /// Mean and variance of `c log|X|`.
    pub fn mean_var(&self, c: f64, z: &SpaceTimePoint) -> Result<(f64, f64)> {
        let (m1, m2) = self.moments(z)?;
        Ok((c * m1, (c * c * (m2 - m1 * m1)).max(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_evaluation() {
        for k in KernelKind::ALL {
            for n in [1, 2] {
                let tab = LogAbsTable::build(k, n, 257).unwrap();
                let g = TestFunction::log_abs(n).unwrap();
                for (y0, t) in [(0.0, 1.0), (0.37, 0.2), (-2.5, 3.0), (40.0, 0.5), (0.01, 7.0)] {
                    let mut y = vec![0.0; n];
                    y[n - 1] = y0;
                    let z = SpaceTimePoint::new(y, t).unwrap();
                    let (m1, m2) = tab.moments(&z).unwrap();
                    let e1 = extend(k, &g, &Transform::identity(), &z).unwrap().value;
                    let e2 = extend(k, &g, &Transform::square(), &z).unwrap().value;
                    assert!((m1 - e1).abs() < 1e-6, "{k} n={n} ({y0},{t}) {m1} {e1}");
                    assert!((m2 - e2).abs() < 1e-5, "{k} n={n} ({y0},{t}) {m2} {e2}");
                }
            }
        }
    }
}
