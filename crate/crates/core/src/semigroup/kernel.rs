use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Heat,
    Poisson,
}

impl KernelKind {
    pub const ALL: [KernelKind; 2] = [KernelKind::Heat, KernelKind::Poisson];

    /// Natural spatial scale of the kernel at time `t`: the kernel at `(y, t)`
    /// is `ℓ^{-n} K_1(y/ℓ)` for the heat kernel with `ℓ = √t`, and for the
    /// Poisson kernel with `ℓ = t`.
    pub fn length_scale(self, t: f64) -> f64 {
        match self {
            KernelKind::Heat => t.sqrt(),
            KernelKind::Poisson => t,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Heat => "heat",
            KernelKind::Poisson => "poisson",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heat" | "h" => Ok(KernelKind::Heat),
            "poisson" | "p" => Ok(KernelKind::Poisson),
            _ => Err(Error::Parse(format!("unknown kernel `{s}`"))),
        }
    }
}

/// A point `z = (y, t)` of the upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub y: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(y: Vec<f64>, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time {t} must be positive")));
        }
        if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("spatial point {y:?}")));
        }
        Ok(SpaceTimePoint { y, t })
    }

    /// `(0, …, 0, t)`.
    pub fn on_axis(n: usize, t: f64) -> Result<Self> {
        Self::new(vec![0.0; n.max(1)], t)
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn norm_y(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time {t} must be positive")))
    }
}

/// Kernel value at `|y| = r`.
pub fn kernel_radial(k: KernelKind, n: usize, t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let nf = n as f64;
    let log = match k {
        KernelKind::Heat => -0.5 * nf * (4.0 * PI * t).ln() - r * r / (4.0 * t),
        KernelKind::Poisson => {
            let h = 0.5 * (nf + 1.0);
            ln_gamma(h) - h * PI.ln() + t.ln() - h * (t * t + r * r).ln()
        }
    };
    Ok(log.exp())
}

/// `H_t(y) = (4πt)^{-n/2} e^{-|y|²/4t}` or `P_t(y) = c_n t (t²+|y|²)^{-(n+1)/2}`.
pub fn kernel_eval(k: KernelKind, n: usize, t: f64, y: &[f64]) -> Result<f64> {
    if y.len() != n {
        return Err(Error::InvalidParameter(format!("point of dimension {} in R^{n}", y.len())));
    }
    kernel_radial(k, n, t, y.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Whether `∫ |u|^β K_t(y-u) du` converges at infinity.
pub fn integrability_check(k: KernelKind, n: usize, growth_exponent: f64) -> bool {
    let _ = n;
    match k {
        KernelKind::Heat => true,
        // tail ~ ∫ r^{β + n - 1 - (n + 1)} dr
        KernelKind::Poisson => growth_exponent < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_to_infinity, Tolerance};
    use crate::special::sphere_area;

    #[test]
    fn kernel_examples() {
        let h = kernel_eval(KernelKind::Heat, 1, 1.0, &[0.0]).unwrap();
        assert!((h - 0.282_094_791_773_878_14).abs() < 1e-15);
        let p = kernel_eval(KernelKind::Poisson, 1, 1.0, &[0.0]).unwrap();
        assert!((p - 1.0 / PI).abs() < 1e-15);
        assert!(kernel_eval(KernelKind::Heat, 1, 0.0, &[0.0]).is_err());
        assert!(kernel_eval(KernelKind::Poisson, 2, -1.0, &[0.0, 0.0]).is_err());
        assert!(kernel_eval(KernelKind::Heat, 2, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn kernels_integrate_to_one() {
        for k in KernelKind::ALL {
            for n in [1usize, 2, 3, 5, 8] {
                for t in [0.3, 1.0, 4.0] {
                    let f = |r: f64| sphere_area(n) * r.powi(n as i32 - 1) * kernel_radial(k, n, t, r).unwrap();
                    let tol = Tolerance { abs: 1e-14, rel: 1e-12, max_segments: 4000 };
                    let total = integrate_to_infinity(f, 0.0, tol).value;
                    assert!((total - 1.0).abs() < 1e-8, "{k} n={n} t={t}: {total}");
                }
            }
        }
    }

    #[test]
    fn integrability_examples() {
        assert!(!integrability_check(KernelKind::Poisson, 2, 1.8));
        assert!(integrability_check(KernelKind::Poisson, 2, 0.5));
        assert!(integrability_check(KernelKind::Heat, 7, 100.0));
    }
}
