//! Exact pseudo-metrics between an ecdf and a continuous cdf, and between two ecdfs.
//!
//! All ecdf-versus-cdf distances are evaluated from the order statistics:
//! the ecdf is a step function with jumps of `1/n`, so suprema are attained
//! at the jumps and integrals against `dF` split into `n + 1` closed-form
//! segments in `u = F(t)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::Cdf;
use crate::sample::SortedSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Ks,
    Kuiper,
    /// Cramér–von Mises with the null cdf as base measure.
    Cvm,
    /// L1 distance weighted by the null cdf as base measure.
    Wasserstein,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Ks,
        MetricKind::Kuiper,
        MetricKind::Cvm,
        MetricKind::Wasserstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Ks => "ks",
            MetricKind::Kuiper => "kuiper",
            MetricKind::Cvm => "cvm",
            MetricKind::Wasserstein => "wasserstein",
        }
    }

    /// CvM and Wasserstein are defined here only relative to a fixed base
    /// measure, so they are not available between two ecdfs.
    pub fn needs_base_measure(self) -> bool {
        matches!(self, MetricKind::Cvm | MetricKind::Wasserstein)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown metric '{s}'")))
    }
}

/// `F(x_(i))` clamped to [0, 1], in ascending order.
fn cdf_values<'a, F: Cdf>(x: &'a SortedSample, f: &'a F) -> impl Iterator<Item = f64> + 'a {
    x.values().iter().map(move |&v| f.cdf(v).clamp(0.0, 1.0))
}

/// One-sided deviations `(D+, D-)` of the ecdf from `f`, both nonnegative.
pub fn deviations_to_cdf<F: Cdf>(x: &SortedSample, f: &F) -> (f64, f64) {
    let n = x.len() as f64;
    let mut d_plus = 0.0f64;
    let mut d_minus = 0.0f64;
    for (i, u) in cdf_values(x, f).enumerate() {
        let i = i as f64;
        d_plus = d_plus.max((i + 1.0) / n - u);
        d_minus = d_minus.max(u - i / n);
    }
    (d_plus, d_minus)
}

/// `sup_t |F̂_x(t) - F(t)|`.
pub fn ks_to_cdf<F: Cdf>(x: &SortedSample, f: &F) -> f64 {
    let (p, m) = deviations_to_cdf(x, f);
    p.max(m)
}

/// Kuiper distance `D+ + D-` between the ecdf and `f`.
pub fn kuiper_to_cdf<F: Cdf>(x: &SortedSample, f: &F) -> f64 {
    let (p, m) = deviations_to_cdf(x, f);
    p + m
}

/// `(∫ (F̂_x - F)^2 dF)^{1/2}`, via `ω² = 1/(12n) + Σ ((2i-1)/(2n) - F(x_(i)))²`.
pub fn cvm_to_cdf<F: Cdf>(x: &SortedSample, f: &F) -> f64 {
    let n = x.len() as f64;
    let omega2 = 1.0 / (12.0 * n)
        + cdf_values(x, f)
            .enumerate()
            .map(|(i, u)| {
                let d = (2.0 * i as f64 + 1.0) / (2.0 * n) - u;
                d * d
            })
            .sum::<f64>();
    (omega2 / n).sqrt()
}

/// `∫_a^b |c - u| du` in closed form, for `a <= b`.
fn abs_segment(a: f64, b: f64, c: f64) -> f64 {
    if c <= a {
        ((b - c) * (b - c) - (a - c) * (a - c)) / 2.0
    } else if c >= b {
        ((c - a) * (c - a) - (c - b) * (c - b)) / 2.0
    } else {
        ((c - a) * (c - a) + (b - c) * (b - c)) / 2.0
    }
}

/// `∫ |F̂_x - F| dF`, summed over the `n + 1` segments between consecutive `F(x_(i))`.
pub fn wasserstein_to_cdf<F: Cdf>(x: &SortedSample, f: &F) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, u) in cdf_values(x, f).enumerate() {
        // Clamping keeps the sequence monotone even if the cdf leaks slightly.
        let u = u.max(prev);
        total += abs_segment(prev, u, i as f64 / n);
        prev = u;
    }
    total + abs_segment(prev, 1.0, 1.0)
}

/// One-sided suprema `(sup F̂_x - F̂_y, sup F̂_y - F̂_x)` by a merge pass.
pub fn deviations_two_sample(x: &SortedSample, y: &SortedSample) -> (f64, f64) {
    let (xs, ys) = (x.values(), y.values());
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d_plus = 0.0f64;
    let mut d_minus = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        // Right-continuity: absorb every value equal to the breakpoint.
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        let diff = i as f64 / nx - j as f64 / ny;
        d_plus = d_plus.max(diff);
        d_minus = d_minus.max(-diff);
    }
    (d_plus, d_minus)
}

/// `sup_t |F̂_x(t) - F̂_y(t)|`.
pub fn ks_two_sample(x: &SortedSample, y: &SortedSample) -> f64 {
    let (p, m) = deviations_two_sample(x, y);
    p.max(m)
}

pub fn kuiper_two_sample(x: &SortedSample, y: &SortedSample) -> f64 {
    let (p, m) = deviations_two_sample(x, y);
    p + m
}

/// Distance between two ecdfs; only KS and Kuiper are defined without a base measure.
pub fn two_sample_distance(metric: MetricKind, x: &SortedSample, y: &SortedSample) -> Result<f64> {
    match metric {
        MetricKind::Ks => Ok(ks_two_sample(x, y)),
        MetricKind::Kuiper => Ok(kuiper_two_sample(x, y)),
        other => Err(Error::Parameter(format!(
            "{other} between two ecdfs needs a data-independent base measure; only ks and kuiper are supported"
        ))),
    }
}

/// Distance between the ecdf of `x` and `f`, using `f` as base measure where needed.
pub fn distance_to_cdf<F: Cdf>(metric: MetricKind, x: &SortedSample, f: &F) -> f64 {
    match metric {
        MetricKind::Ks => ks_to_cdf(x, f),
        MetricKind::Kuiper => kuiper_to_cdf(x, f),
        MetricKind::Cvm => cvm_to_cdf(x, f),
        MetricKind::Wasserstein => wasserstein_to_cdf(x, f),
    }
}

/// Largest distance between the ecdfs of two datasets differing in one entry.
///
/// `1/n` for every supported metric.
pub fn base_sensitivity(_metric: MetricKind, n: usize) -> f64 {
    assert!(n >= 1, "sample size must be positive");
    1.0 / n as f64
}
