//! BMO and A_p on an interval, for piecewise-constant functions.
//!
//! All averages come from prefix sums over the pieces. Suprema over
//! subintervals are found by visiting every pair of cells that could hold
//! the two endpoints, then refining each endpoint inside its cell by golden
//! section. In each cell the objective is a unimodal function of the
//! endpoint: moving one endpoint changes the mixing weight of a single value,
//! and the variance (or the logarithm of the A_p product) is concave in that
//! weight.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::BoundaryProfile;
use crate::quadrature::golden_max;

const REFINE_ITERS: usize = 32;
const REFINE_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub a: f64,
    pub b: f64,
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(a: f64, b: f64, breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidParameter(format!("interval [{a}, {b}]")));
        }
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} breakpoints",
                values.len(),
                breaks.len()
            )));
        }
        let mut prev = a;
        for &x in &breaks {
            if !(x > prev && x < b) {
                return Err(Error::InvalidParameter(format!("breakpoint {x} out of order in ({a}, {b})")));
            }
            prev = x;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite step value".into()));
        }
        Ok(StepFunction { a, b, breaks, values })
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(a, b, Vec::new(), vec![c])
    }

    /// `left` on the first half of `[0, 1]`, `right` on the second.
    pub fn halves(left: f64, right: f64) -> Self {
        Self::new(0.0, 1.0, vec![0.5], vec![left, right]).unwrap()
    }

    /// `a, breaks…, b`.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = Vec::with_capacity(self.breaks.len() + 2);
        k.push(self.a);
        k.extend_from_slice(&self.breaks);
        k.push(self.b);
        k
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `(start, end, value)` per piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let k = self.knots();
        (0..self.values.len()).map(move |i| (k[i], k[i + 1], self.values[i]))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.a, self.b, self.breaks.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&t| t <= x);
        self.values[i]
    }

    pub fn mean(&self) -> f64 {
        self.pieces().map(|(l, r, v)| (r - l) * v).sum::<f64>() / self.length()
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "{} {} | {} | {}", self.a, self.b, join(&self.breaks), join(&self.values))
    }
}

impl FromStr for StepFunction {
    type Err = Error;

    /// `a b | b1 b2 ... | v1 v2 ...`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("step function `{s}` needs three `|`-separated fields")));
        }
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|_| Error::Parse(format!("number `{x}`"))))
                .collect()
        };
        let ends = nums(parts[0])?;
        if ends.len() != 2 {
            return Err(Error::Parse(format!("interval `{}`", parts[0].trim())));
        }
        StepFunction::new(ends[0], ends[1], nums(parts[1])?, nums(parts[2])?)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Second quantity averaged alongside the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Square,
    /// `s ↦ s^{-1/(p-1)}`.
    Dual(f64),
    Log,
}

impl Moment {
    fn apply(self, s: f64) -> f64 {
        match self {
            Moment::Square => s * s,
            Moment::Dual(p) => s.powf(-1.0 / (p - 1.0)),
            Moment::Log => s.ln(),
        }
    }
}

/// Running integrals of `g(η)` at the knots.
#[derive(Debug, Clone)]
struct Prefix {
    knots: Vec<f64>,
    vals: Vec<f64>,
    cum: Vec<f64>,
}

impl Prefix {
    fn new(s: &StepFunction, g: impl Fn(f64) -> f64) -> Self {
        let knots = s.knots();
        let vals: Vec<f64> = s.values.iter().map(|&v| g(v)).collect();
        let mut cum = vec![0.0; knots.len()];
        for i in 0..vals.len() {
            cum[i + 1] = cum[i] + (knots[i + 1] - knots[i]) * vals[i];
        }
        Prefix { knots, vals, cum }
    }

    #[inline]
    fn at(&self, x: f64) -> f64 {
        let n = self.vals.len();
        let i = self.knots[1..n].partition_point(|&t| t <= x).min(n - 1);
        self.cum[i] + (x - self.knots[i]) * self.vals[i]
    }

    #[inline]
    fn average(&self, c: f64, d: f64) -> f64 {
        (self.at(d) - self.at(c)) / (d - c)
    }
}

pub fn averages(s: &StepFunction, sub: (f64, f64), m: Moment) -> Result<(f64, f64)> {
    let (c, d) = sub;
    if !(d > c && c >= s.a && d <= s.b) {
        return Err(Error::InvalidParameter(format!("subinterval [{c}, {d}] of [{}, {}]", s.a, s.b)));
    }
    if !matches!(m, Moment::Square) && !s.is_positive() {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let mean = Prefix::new(s, |v| v).average(c, d);
    let second = Prefix::new(s, |v| m.apply(v)).average(c, d);
    Ok((mean, second))
}

/// Sup over `[c, d] ⊆ [a, b]` of `objective(c, d)`, anchored at the knots.
fn subinterval_sup(knots: &[f64], baseline: f64, objective: impl Fn(f64, f64) -> f64) -> f64 {
    let cells = knots.len() - 1;
    let mut best = baseline;
    for ci in 0..cells {
        let (c_lo, c_hi) = (knots[ci], knots[ci + 1]);
        for cj in ci + 1..cells {
            let (d_lo, d_hi) = (knots[cj], knots[cj + 1]);
            let eval = |c: f64, d: f64| if d > c { objective(c, d) } else { baseline };
            let mut c = c_lo;
            let mut d = d_hi;
            let mut cur = f64::NEG_INFINITY;
            for &(cc, dd) in &[(c_lo, d_lo), (c_lo, d_hi), (c_hi, d_lo), (c_hi, d_hi)] {
                let val = eval(cc, dd);
                if val > cur {
                    cur = val;
                    c = cc;
                    d = dd;
                }
            }
            for _ in 0..REFINE_ROUNDS {
                let before = cur;
                let (cn, vc) = golden_max(|x| eval(x, d), c_lo, c_hi, REFINE_ITERS);
                if vc > cur {
                    cur = vc;
                    c = cn;
                }
                let (dn, vd) = golden_max(|y| eval(c, y), d_lo, d_hi, REFINE_ITERS);
                if vd > cur {
                    cur = vd;
                    d = dn;
                }
                if cur <= before * (1.0 + 1e-15) + 1e-300 {
                    break;
                }
            }
            best = best.max(cur);
        }
    }
    best
}

/// `sup_J (⟨η²⟩_J − ⟨η⟩_J²)^{1/2}` over subintervals `J`.
pub fn bmo_norm_interval(s: &StepFunction) -> f64 {
    if s.values.len() == 1 {
        return 0.0;
    }
    // centre the values to keep the variance free of cancellation
    let shift = s.mean();
    let c1 = Prefix::new(s, |v| v - shift);
    let c2 = Prefix::new(s, |v| (v - shift) * (v - shift));
    let var = |c: f64, d: f64| {
        let a = c1.average(c, d);
        (c2.average(c, d) - a * a).max(0.0)
    };
    subinterval_sup(&s.knots(), 0.0, var).sqrt()
}

/// `[w]_{p,I}`; `p = ∞` gives `sup_J ⟨w⟩_J e^{−⟨log w⟩_J}`.
pub fn ap_characteristic_interval(s: &StepFunction, p: f64) -> Result<f64> {
    if !s.is_positive() {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must exceed 1")));
    }
    if s.values.len() == 1 {
        return Ok(1.0);
    }
    // scale invariance: normalize to unit mean first
    let scale = s.mean();
    let w = s.map(|v| v / scale)?;
    let m1 = Prefix::new(&w, |v| v);
    let logc = if p.is_infinite() {
        let m2 = Prefix::new(&w, f64::ln);
        subinterval_sup(&w.knots(), 0.0, |c, d| m1.average(c, d).ln() - m2.average(c, d))
    } else {
        let m2 = Prefix::new(&w, |v| v.powf(-1.0 / (p - 1.0)));
        subinterval_sup(&w.knots(), 0.0, |c, d| m1.average(c, d).ln() + (p - 1.0) * m2.average(c, d).ln())
    };
    Ok(logc.exp())
}

/// `⟨f∘η⟩_I`.
pub fn functional_average(s: &StepFunction, f: &BoundaryProfile) -> Result<f64> {
    let mut acc = 0.0;
    for (l, r, v) in s.pieces() {
        acc += (r - l) * f.eval(v)?;
    }
    Ok(acc / s.length())
}

/// `|{x ∈ I : |η(x) − ⟨η⟩_I| > λ}| / |I|`.
pub fn distribution(s: &StepFunction, lambda: f64) -> f64 {
    let m = s.mean();
    s.pieces().filter(|&(_, _, v)| (v - m).abs() > lambda).map(|(l, r, _)| r - l).sum::<f64>() / s.length()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JnCheck {
    pub norm: f64,
    /// `(λ, left side, right side)` per level.
    pub rows: Vec<(f64, f64, f64)>,
    pub pass: bool,
}

/// The interval John–Nirenberg bound `|{|η−⟨η⟩| > λ}|/|I| ≤ e^{1−λ/‖η‖}`.
pub fn classical_jn_check(s: &StepFunction, lambdas: &[f64]) -> JnCheck {
    let norm = bmo_norm_interval(s);
    let rows: Vec<_> = lambdas
        .iter()
        .map(|&l| {
            let lhs = distribution(s, l);
            let rhs = if norm > 0.0 { (1.0 - l / norm).exp() } else if l >= 0.0 { 0.0 } else { f64::INFINITY };
            (l, lhs, rhs)
        })
        .collect();
    let pass = rows.iter().all(|&(_, lhs, rhs)| lhs <= rhs * (1.0 + 1e-12));
    JnCheck { norm, rows, pass }
}

/// `⟨|x|^β⟩_{[c,d]}` for `β > −1`, in closed form.
pub fn power_average(beta: f64, c: f64, d: f64) -> f64 {
    assert!(d > c && beta > -1.0);
    let g = |x: f64| x.signum() * x.abs().powf(beta + 1.0) / (beta + 1.0);
    (g(d) - g(c)) / (d - c)
}

/// `⟨w⟩⟨w^{−1/(p−1)}⟩^{p−1}` on `[c, d]` for `w = |x|^{−α}`.
pub fn power_weight_ap_interval(alpha: f64, p: f64, c: f64, d: f64) -> f64 {
    let dual = alpha / (p - 1.0);
    if alpha >= 1.0 || dual <= -1.0 {
        return f64::INFINITY;
    }
    power_average(-alpha, c, d) * power_average(dual, c, d).powf(p - 1.0)
}
