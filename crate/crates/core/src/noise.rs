//! Laplace and Tulap privacy noise.
//!
//! `Tulap(b, 0)` is sampled as `U + G1 - G2` with `U ~ Uniform(-1/2, 1/2)`
//! and `G1, G2` independent geometric counts, `P(G = k) = (1 - b) b^k`.
//! `G1 - G2` is then discrete Laplace with ratio `b`, which for
//! `b = exp(-eps)` gives the staircase mechanism for eps-DP.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::rng::RngStream;

/// A positive, finite privacy budget `ε`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(PrivacyBudget(epsilon))
        } else {
            param(format!("epsilon must be positive and finite, got {epsilon}"))
        }
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Tulap,
    Laplace,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Tulap => "tulap",
            NoiseKind::Laplace => "laplace",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tulap" => Ok(NoiseKind::Tulap),
            "laplace" => Ok(NoiseKind::Laplace),
            _ => param(format!("unknown noise '{s}' (expected tulap or laplace)")),
        }
    }
}

/// Laplace(0, 1) by inverting its cdf at `u` in (0, 1).
fn standard_laplace_from_uniform(u: f64) -> f64 {
    let c = u - 0.5;
    // |c| < 1/2 strictly, so the log argument stays in (0, 1].
    -c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

/// One draw from Laplace with the given scale (density `exp(-|x|/b) / 2b`).
pub fn sample_laplace(scale: f64, rng: &mut RngStream) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return param(format!("laplace scale must be positive, got {scale}"));
    }
    Ok(scale * standard_laplace_from_uniform(rng.uniform()))
}

/// `floor(ln U / ln b)`: geometric with `P(G >= k) = b^k`. `b = 0` yields 0.
fn geometric(b: f64, rng: &mut RngStream) -> f64 {
    (rng.uniform().ln() / b.ln()).floor()
}

fn tulap_unchecked(b: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform() - 0.5;
    let g1 = geometric(b, rng);
    let g2 = geometric(b, rng);
    u + (g1 - g2)
}

/// One draw from `Tulap(b, 0)` for `0 < b < 1`.
pub fn sample_tulap(b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return param(format!("tulap parameter b must lie in (0, 1), got {b}"));
    }
    Ok(tulap_unchecked(b, rng))
}

/// Standardized noise `Z` for budget `epsilon`: `Tulap(e^{-ε}, 0)` or `Laplace(1/ε)`.
pub fn standard_noise(epsilon: PrivacyBudget, kind: NoiseKind, rng: &mut RngStream) -> f64 {
    let eps = epsilon.epsilon();
    match kind {
        // exp(-eps) may underflow to 0 for huge budgets; the geometric draws
        // then degenerate to 0 as they should.
        NoiseKind::Tulap => tulap_unchecked((-eps).exp(), rng),
        NoiseKind::Laplace => standard_laplace_from_uniform(rng.uniform()) / eps,
    }
}

/// `statistic + sensitivity * Z`.
pub fn privatize(
    statistic: f64,
    sensitivity: f64,
    epsilon: PrivacyBudget,
    kind: NoiseKind,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return param(format!("sensitivity must be positive, got {sensitivity}"));
    }
    Ok(statistic + sensitivity * standard_noise(epsilon, kind, rng))
}
