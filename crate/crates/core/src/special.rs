//! Gamma-family special functions.
//!
//! `ln_gamma` uses a Lanczos approximation. The trigamma function has two
//! independent evaluation routes so that identities involving it can be
//! checked against quadrature without sharing a code path.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        ln_gamma(x).exp()
    }
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Volume of the unit ball in R^n.
pub fn ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Trigamma Ψ₁(x) = d²/dx² log Γ(x) for x > 0.
///
/// Shifts the argument above 10 with Ψ₁(x) = Ψ₁(x+1) + 1/x², then applies
/// the asymptotic expansion in Bernoulli numbers.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma requires x > 0");
    let mut acc = 0.0;
    let mut z = x;
    while z < 10.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    acc + trigamma_asymptotic(z)
}

fn trigamma_asymptotic(z: f64) -> f64 {
    // B_{2k} / z^{2k+1}
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 6.0
            + inv2
                * (-1.0 / 30.0
                    + inv2
                        * (1.0 / 42.0
                            + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0 + inv2 * (-691.0 / 2730.0))))));
    inv + 0.5 * inv2 + series * inv
}

/// Trigamma via the Hurwitz series Σ_k 1/(x+k)² with an Euler–Maclaurin tail.
///
/// Deliberately shares nothing with [`trigamma`] beyond the definition.
pub fn trigamma_series(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma requires x > 0");
    const TERMS: usize = 64;
    let mut sum = 0.0;
    for k in 0..TERMS {
        let d = x + k as f64;
        sum += 1.0 / (d * d);
    }
    let m = x + TERMS as f64;
    // Σ_{k≥0} g(m+k) ≈ ∫_m^∞ g + g(m)/2 − g'(m)/12 + g'''(m)/720 − g^(5)(m)/30240
    let tail = 1.0 / m + 0.5 / (m * m) + 1.0 / (6.0 * m.powi(3)) - 1.0 / (30.0 * m.powi(5))
        + 1.0 / (42.0 * m.powi(7));
    sum + tail
}

/// Digamma ψ(x) for x > 0.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires x > 0");
    let mut acc = 0.0;
    let mut z = x;
    while z < 20.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    acc + z.ln() - 0.5 / z
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0))))
}
