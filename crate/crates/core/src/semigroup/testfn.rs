use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;

/// Functions on R^n with known structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Constant { c: f64 },
    /// `u ↦ d·u`.
    Linear { direction: Vec<f64> },
    /// `u ↦ |u|²`.
    Quadratic,
    /// `u ↦ log|u|`.
    LogAbs,
    /// `a` on `|u| < r0`, `b` outside.
    RadialStep { r0: f64, a: f64, b: f64 },
    /// `u ↦ |u|^α`.
    PowerWeight { alpha: f64 },
    /// Piecewise linear in `|u|` through the table, constant beyond its ends.
    SampledRadial { radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub shape: Shape,
    pub n: usize,
}

impl TestFunction {
    pub fn new(shape: Shape, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match &shape {
            Shape::Constant { c } if !c.is_finite() => {
                return Err(Error::InvalidParameter(format!("constant {c}")));
            }
            Shape::Linear { direction } if direction.len() != n || direction.iter().any(|v| !v.is_finite()) => {
                return Err(Error::InvalidParameter(format!("direction {direction:?} in R^{n}")));
            }
            Shape::RadialStep { r0, a, b } if !(*r0 > 0.0 && r0.is_finite() && a.is_finite() && b.is_finite()) => {
                return Err(Error::InvalidParameter(format!("radial step r0={r0}, a={a}, b={b}")));
            }
            Shape::PowerWeight { alpha } if !(alpha.is_finite() && *alpha > -(n as f64)) => {
                return Err(Error::InvalidParameter(format!(
                    "power weight |x|^{alpha} is not locally integrable in R^{n}"
                )));
            }
            Shape::SampledRadial { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::InvalidParameter("sampled radial table needs matching radii and values".into()));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] < 0.0 {
                    return Err(Error::InvalidParameter("sampled radii must be nonnegative and strictly increasing".into()));
                }
                if values.iter().chain(radii.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("sampled radial table has non-finite entries".into()));
                }
            }
            _ => {}
        }
        Ok(TestFunction { shape, n })
    }

    pub fn constant(c: f64, n: usize) -> Result<Self> {
        Self::new(Shape::Constant { c }, n)
    }

    pub fn log_abs(n: usize) -> Result<Self> {
        Self::new(Shape::LogAbs, n)
    }

    pub fn quadratic(n: usize) -> Result<Self> {
        Self::new(Shape::Quadratic, n)
    }

    pub fn power_weight(alpha: f64, n: usize) -> Result<Self> {
        Self::new(Shape::PowerWeight { alpha }, n)
    }

    pub fn radial_step(r0: f64, a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(Shape::RadialStep { r0, a, b }, n)
    }

    /// `u ↦ u_1` (or `d·u` for a general direction).
    pub fn linear(direction: Vec<f64>) -> Result<Self> {
        let n = direction.len();
        Self::new(Shape::Linear { direction }, n)
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.shape, Shape::Linear { .. } | Shape::Constant { .. })
    }

    /// Radial profile `g(r)` for radial shapes.
    pub fn radial(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Constant { c } => *c,
            Shape::Quadratic => r * r,
            Shape::LogAbs => r.ln(),
            Shape::RadialStep { r0, a, b } => {
                if r < *r0 {
                    *a
                } else {
                    *b
                }
            }
            Shape::PowerWeight { alpha } => r.powf(*alpha),
            Shape::SampledRadial { radii, values } => {
                let k = radii.partition_point(|&x| x <= r);
                if k == 0 {
                    values[0]
                } else if k == radii.len() {
                    values[k - 1]
                } else {
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }
            Shape::Linear { .. } => f64::NAN,
        }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Linear { direction } => direction.iter().zip(u).map(|(d, x)| d * x).sum(),
            _ => self.radial(u.iter().map(|x| x * x).sum::<f64>().sqrt()),
        }
    }

    /// Radii where the radial profile is not smooth.
    pub fn radial_breaks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::RadialStep { r0, .. } => vec![*r0],
            Shape::SampledRadial { radii, .. } => radii.clone(),
            _ => Vec::new(),
        }
    }

    /// All radii `r` with `g(r) = c`.
    pub fn radial_level(&self, c: f64) -> Vec<f64> {
        match &self.shape {
            Shape::Quadratic if c > 0.0 => vec![c.sqrt()],
            Shape::LogAbs => {
                let r = c.exp();
                if r > 0.0 && r.is_finite() {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            Shape::PowerWeight { alpha } if c > 0.0 && *alpha != 0.0 => {
                let r = c.powf(1.0 / alpha);
                if r.is_finite() {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            Shape::SampledRadial { radii, values } => radii
                .windows(2)
                .zip(values.windows(2))
                .filter_map(|(r, v)| {
                    let (lo, hi) = (v[0].min(v[1]), v[0].max(v[1]));
                    (v[0] != v[1] && c >= lo && c <= hi).then(|| r[0] + (c - v[0]) / (v[1] - v[0]) * (r[1] - r[0]))
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Behaviour of `|g|` at infinity.
    pub fn growth(&self) -> Growth {
        match &self.shape {
            Shape::Constant { .. } | Shape::RadialStep { .. } | Shape::SampledRadial { .. } => Growth::Bounded,
            Shape::Linear { direction } if direction.iter().all(|d| *d == 0.0) => Growth::Bounded,
            Shape::Linear { .. } => Growth::Power(1.0),
            Shape::Quadratic => Growth::Power(2.0),
            Shape::LogAbs => Growth::Log { coeff: 1.0, k: 1.0 },
            Shape::PowerWeight { alpha } => Growth::Power(*alpha),
        }
    }

    /// Exponent `γ` with `|g(u)| ~ |u|^γ` at the origin (0 when of order one
    /// or logarithmic there).
    pub fn origin_exponent(&self) -> f64 {
        match self.shape {
            Shape::PowerWeight { alpha } => alpha,
            _ => 0.0,
        }
    }
}

/// Growth of a function at infinity, coarse enough to decide integrability
/// against the kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    Bounded,
    /// `~ coeff·log^k r`.
    Log { coeff: f64, k: f64 },
    /// `~ r^β`; `β < 0` decays.
    Power(f64),
    /// `~ exp(c r^β)` with `c > 0`.
    ExpPower(f64),
    Unknown,
}

impl Growth {
    /// Power-law exponent, `None` if super-polynomial or unknown.
    pub fn exponent(self) -> Option<f64> {
        match self {
            Growth::Bounded => Some(0.0),
            // any positive power dominates a logarithm
            Growth::Log { .. } => Some(0.0),
            Growth::Power(b) => Some(b.max(0.0)),
            Growth::ExpPower(_) | Growth::Unknown => None,
        }
    }

    fn square(self) -> Growth {
        match self {
            Growth::Log { coeff, k } => Growth::Log { coeff: coeff * coeff, k: 2.0 * k },
            Growth::Power(b) => Growth::Power(2.0 * b),
            g => g,
        }
    }

    fn power(self, q: f64) -> Growth {
        match self {
            Growth::Log { coeff, k } if q > 0.0 => Growth::Log { coeff: coeff.abs().powf(q), k: q * k },
            Growth::Power(b) => Growth::Power(q * b),
            Growth::ExpPower(b) if q > 0.0 => Growth::ExpPower(b),
            Growth::ExpPower(_) => Growth::Bounded,
            g => g,
        }
    }

    fn exp(self) -> Growth {
        match self {
            Growth::Bounded => Growth::Bounded,
            Growth::Log { coeff, k: 1.0 } => Growth::Power(coeff.abs()),
            Growth::Log { k, .. } if k < 1.0 => Growth::Power(0.0),
            Growth::Log { .. } => Growth::ExpPower(0.0),
            Growth::Power(b) if b <= 0.0 => Growth::Bounded,
            Growth::Power(b) => Growth::ExpPower(b),
            _ => Growth::Unknown,
        }
    }

    fn log(self) -> Growth {
        match self {
            Growth::Bounded => Growth::Bounded,
            Growth::Power(0.0) => Growth::Bounded,
            Growth::Power(b) => Growth::Log { coeff: b.abs(), k: 1.0 },
            Growth::ExpPower(b) => Growth::Power(b),
            Growth::Log { .. } => Growth::Log { coeff: 1.0, k: 0.5 },
            Growth::Unknown => Growth::Unknown,
        }
    }
}

/// One pointwise operation applied to the value of a test function.
#[derive(Debug, Clone)]
pub enum Op {
    /// `s ↦ a s + b`.
    Affine(f64, f64),
    Square,
    /// `s ↦ s^q` for `s > 0`.
    Power(f64),
    Log,
    Exp,
    Abs,
    Profile(BoundaryProfile),
}

impl Op {
    #[inline]
    fn apply(&self, s: f64) -> f64 {
        match self {
            Op::Affine(a, b) => a * s + b,
            Op::Square => s * s,
            Op::Power(q) => s.powf(*q),
            Op::Log => s.ln(),
            Op::Exp => s.exp(),
            Op::Abs => s.abs(),
            Op::Profile(f) => f.value(s),
        }
    }

    /// All `s` with `op(s) = y`.
    fn preimage(&self, y: f64) -> Vec<f64> {
        match self {
            Op::Affine(a, b) if *a != 0.0 => vec![(y - b) / a],
            Op::Square | Op::Abs if y > 0.0 => {
                let r = if matches!(self, Op::Square) { y.sqrt() } else { y };
                vec![-r, r]
            }
            Op::Square | Op::Abs if y == 0.0 => vec![0.0],
            Op::Power(q) if y > 0.0 && *q != 0.0 => vec![y.powf(1.0 / q)],
            Op::Log => vec![y.exp()],
            Op::Exp if y > 0.0 => vec![y.ln()],
            Op::Profile(f) => match f.kind() {
                crate::profile::ProfileKind::Identity => vec![y],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Op::Abs => vec![0.0],
            Op::Profile(f) => f.breakpoints(),
            _ => Vec::new(),
        }
    }
}

/// A composition of pointwise operations, applied left to right.
#[derive(Debug, Clone, Default)]
pub struct Transform {
    pub ops: Vec<Op>,
}

impl Transform {
    pub fn identity() -> Self {
        Transform { ops: Vec::new() }
    }

    pub fn then(mut self, op: Op) -> Self {
        self.ops.push(op);
        self
    }

    pub fn square() -> Self {
        Self::identity().then(Op::Square)
    }

    /// `s ↦ (s - c)²`.
    pub fn centered_square(c: f64) -> Self {
        Self::identity().then(Op::Affine(1.0, -c)).then(Op::Square)
    }

    pub fn power(q: f64) -> Self {
        Self::identity().then(Op::Power(q))
    }

    pub fn log() -> Self {
        Self::identity().then(Op::Log)
    }

    /// `s ↦ f(a s + b)`.
    pub fn profile(f: BoundaryProfile, a: f64, b: f64) -> Self {
        Self::identity().then(Op::Affine(a, b)).then(Op::Profile(f))
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|o| matches!(o, Op::Affine(a, b) if *a == 1.0 && *b == 0.0))
    }

    #[inline]
    pub fn apply(&self, s: f64) -> f64 {
        self.ops.iter().fold(s, |v, op| op.apply(v))
    }

    /// Values of the input where the composition is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            let mut pts = op.kinks();
            for prev in self.ops[..i].iter().rev() {
                pts = pts.iter().flat_map(|&y| prev.preimage(y)).collect();
            }
            out.extend(pts);
        }
        out.retain(|v| v.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn growth(&self, g: Growth) -> Growth {
        self.ops.iter().fold(g, |acc, op| match op {
            Op::Affine(a, b) => match acc {
                _ if *a == 0.0 => Growth::Bounded,
                Growth::Log { coeff, k } => Growth::Log { coeff: coeff * a.abs(), k },
                Growth::Power(p) if p < 0.0 && *b != 0.0 => Growth::Bounded,
                g => g,
            },
            Op::Square => acc.square(),
            Op::Power(q) => acc.power(*q),
            Op::Log => acc.log(),
            Op::Exp => acc.exp(),
            Op::Abs => acc,
            Op::Profile(f) => {
                use crate::profile::ProfileKind::*;
                match f.kind() {
                    Identity => acc,
                    Power { q } => acc.power(q),
                    Exp | ExpAbs => acc.exp(),
                    Indicator { .. } | Constant { .. } => Growth::Bounded,
                    Custom => Growth::Unknown,
                }
            }
        })
    }

    /// Exponent at the origin of the transformed function given the input's;
    /// negative values blow up, `-∞` faster than any power.
    pub fn origin_exponent(&self, gamma: f64) -> f64 {
        let out = self.ops.iter().fold(gamma, |acc, op| match op {
            Op::Affine(a, _) if *a == 0.0 => 0.0,
            Op::Affine(_, b) if acc > 0.0 && *b != 0.0 => 0.0,
            Op::Affine(..) | Op::Abs => acc,
            Op::Square => 2.0 * acc,
            Op::Power(q) => q * acc,
            Op::Log => 0.0,
            Op::Exp if acc < 0.0 => f64::NEG_INFINITY,
            Op::Exp => 0.0,
            Op::Profile(f) => {
                use crate::profile::ProfileKind::*;
                match f.kind() {
                    Identity | Custom => acc,
                    Power { q } => q * acc,
                    Exp | ExpAbs if acc < 0.0 => f64::NEG_INFINITY,
                    Exp | ExpAbs | Indicator { .. } | Constant { .. } => 0.0,
                }
            }
        });
        out.min(0.0)
    }
}
