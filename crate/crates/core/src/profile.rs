//! Boundary data on the lower curve of a Bellman domain.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Symbolic description of a boundary profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `f(s) = s`.
    Identity,
    /// `f(s) = |s|^q`.
    Power { q: f64 },
    /// `f(s) = e^s`.
    Exp,
    /// `f(s) = e^{|s|}`.
    ExpAbs,
    /// `f(s) = χ_{|s| > λ}`.
    Indicator { lambda: f64 },
    Constant { c: f64 },
    /// A user-supplied closure; only usable from library code.
    Custom,
}

#[derive(Clone)]
pub struct BoundaryProfile {
    kind: ProfileKind,
    name: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for BoundaryProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryProfile").field("kind", &self.kind).field("name", &self.name).finish()
    }
}

impl BoundaryProfile {
    pub fn from_kind(kind: ProfileKind) -> Result<Self> {
        let func: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match kind {
            ProfileKind::Identity => Arc::new(|s| s),
            ProfileKind::Power { q } => {
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::InvalidParameter(format!("power exponent {q}")));
                }
                if q == 2.0 {
                    Arc::new(|s: f64| s * s)
                } else {
                    Arc::new(move |s: f64| s.abs().powf(q))
                }
            }
            ProfileKind::Exp => Arc::new(f64::exp),
            ProfileKind::ExpAbs => Arc::new(|s: f64| s.abs().exp()),
            ProfileKind::Indicator { lambda } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::InvalidParameter(format!("indicator level {lambda}")));
                }
                Arc::new(move |s: f64| if s.abs() > lambda { 1.0 } else { 0.0 })
            }
            ProfileKind::Constant { c } => {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::InvalidParameter(format!("constant {c}")));
                }
                Arc::new(move |_| c)
            }
            ProfileKind::Custom => {
                return Err(Error::InvalidParameter("custom profiles need a closure".into()));
            }
        };
        Ok(BoundaryProfile { kind, name: describe(&kind), func })
    }

    pub fn identity() -> Self {
        Self::from_kind(ProfileKind::Identity).unwrap()
    }

    pub fn square() -> Self {
        Self::from_kind(ProfileKind::Power { q: 2.0 }).unwrap()
    }

    pub fn power(q: f64) -> Result<Self> {
        Self::from_kind(ProfileKind::Power { q })
    }

    pub fn exp() -> Self {
        Self::from_kind(ProfileKind::Exp).unwrap()
    }

    pub fn exp_abs() -> Self {
        Self::from_kind(ProfileKind::ExpAbs).unwrap()
    }

    pub fn indicator(lambda: f64) -> Result<Self> {
        Self::from_kind(ProfileKind::Indicator { lambda })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::from_kind(ProfileKind::Constant { c })
    }

    /// Wraps an arbitrary nonnegative function.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        BoundaryProfile { kind: ProfileKind::Custom, name: name.into(), func: Arc::new(f) }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Raw evaluation; may return NaN or infinity for custom profiles.
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        (self.func)(s)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let y = self.value(s);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteProfile(s))
        }
    }

    /// A convex function below `f` on the whole line, evaluated at `s`.
    ///
    /// By Jensen this is below the Bellman function at any point with first
    /// coordinate `s`, so it is a safe interior seed for the induction.
    pub fn convex_minorant(&self, s: f64) -> f64 {
        match self.kind {
            ProfileKind::Identity | ProfileKind::Exp | ProfileKind::ExpAbs | ProfileKind::Constant { .. } => {
                self.value(s)
            }
            ProfileKind::Power { q } if q >= 1.0 => self.value(s),
            _ => 0.0,
        }
    }

    /// Grows without bound as `|s| → ∞`.
    pub fn is_unbounded(&self) -> bool {
        matches!(
            self.kind,
            ProfileKind::Identity | ProfileKind::Power { .. } | ProfileKind::Exp | ProfileKind::ExpAbs
        )
    }

    /// Points where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Indicator { lambda } if lambda > 0.0 => vec![-lambda, lambda],
            ProfileKind::Indicator { .. } | ProfileKind::ExpAbs => vec![0.0],
            ProfileKind::Power { q } if q != 2.0 => vec![0.0],
            _ => Vec::new(),
        }
    }
}

fn describe(kind: &ProfileKind) -> String {
    match kind {
        ProfileKind::Identity => "s".into(),
        ProfileKind::Power { q } => format!("|s|^{q}"),
        ProfileKind::Exp => "exp(s)".into(),
        ProfileKind::ExpAbs => "exp(|s|)".into(),
        ProfileKind::Indicator { lambda } => format!("1{{|s|>{lambda}}}"),
        ProfileKind::Constant { c } => format!("{c}"),
        ProfileKind::Custom => "custom".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        assert_eq!(BoundaryProfile::square().eval(2.0).unwrap(), 4.0);
        assert_eq!(BoundaryProfile::identity().eval(3.0).unwrap(), 3.0);
        let ind = BoundaryProfile::indicator(1.0).unwrap();
        assert_eq!(ind.eval(0.5).unwrap(), 0.0);
        assert_eq!(ind.eval(-1.5).unwrap(), 1.0);
        assert!((BoundaryProfile::exp_abs().eval(-1.0).unwrap() - 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn nan_is_rejected() {
        let p = BoundaryProfile::custom("bad", |_| f64::NAN);
        assert_eq!(p.eval(0.3), Err(Error::NonFiniteProfile(0.3)));
    }

    #[test]
    fn minorant_is_below_profile() {
        for p in [
            BoundaryProfile::square(),
            BoundaryProfile::exp_abs(),
            BoundaryProfile::indicator(2.0).unwrap(),
            BoundaryProfile::power(0.5).unwrap(),
        ] {
            for k in -40..=40 {
                let s = 0.1 * k as f64;
                assert!(p.convex_minorant(s) <= p.value(s), "{p:?} at {s}");
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(BoundaryProfile::indicator(f64::NAN).is_err());
        assert!(BoundaryProfile::power(-1.0).is_err());
        assert!(BoundaryProfile::constant(-1.0).is_err());
        assert!(BoundaryProfile::from_kind(ProfileKind::Custom).is_err());
    }
}
