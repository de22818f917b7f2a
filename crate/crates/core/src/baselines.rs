//! Private rank and sign tests used as comparators.
//!
//! Each `private_*` function returns the privatized statistic; the
//! [`Baseline`] procedure wraps the same computations for calibration.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::inference::{normal_null_dataset, Dataset, Evaluation, Procedure};
use crate::metrics::cvm_to_cdf;
use crate::models::ContinuousCdf;
use crate::noise::{privatize, NoiseKind, PrivacyBudget};
use crate::rng::RngStream;
use crate::sample::SortedSample;
use crate::table::Fingerprint;

/// Midranks of a sample: tied values share the average of their positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    ranks: Vec<f64>,
}

impl RankVector {
    pub fn new(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0.0; values.len()];
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && values[order[end]] == values[order[start]] {
                end += 1;
            }
            // Positions start+1 ..= end share their mean.
            let mid = (start + 1 + end) as f64 / 2.0;
            for &k in &order[start..end] {
                ranks[k] = mid;
            }
            start = end;
        }
        RankVector { ranks }
    }

    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }
}

fn combined_ranks(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let r = RankVector::new(&all).ranks;
    let (rx, ry) = r.split_at(x.len());
    (rx.to_vec(), ry.to_vec())
}

fn check_equal_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return param(format!("samples must have equal length ({} vs {})", x.len(), y.len()));
    }
    if x.is_empty() {
        return param("samples must be non-empty");
    }
    Ok(())
}

/// Rank-sum form of the Kruskal–Wallis statistic for two groups.
pub fn kruskal_wallis_statistic(x: &[f64], y: &[f64]) -> f64 {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let big_n = n + m;
    let (rx, ry) = combined_ranks(x, y);
    let sx: f64 = rx.iter().sum();
    let sy: f64 = ry.iter().sum();
    let spread = n * (sx - (n + 1.0) / 2.0).abs() + m * (sy - (m + 1.0) / 2.0).abs();
    if (x.len() + y.len()) % 2 == 0 {
        4.0 * (big_n - 1.0) / (big_n * big_n) * spread
    } else {
        4.0 / (big_n + 1.0) * spread
    }
}

/// `(U1, U2)`: the rank sums of `x` and `y` in the combined sample.
pub fn rank_sums(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (rx, ry) = combined_ranks(x, y);
    (rx.iter().sum(), ry.iter().sum())
}

/// `min(U1, U2)`.
pub fn mann_whitney_statistic(x: &[f64], y: &[f64]) -> f64 {
    let (u1, u2) = rank_sums(x, y);
    u1.min(u2)
}

/// Number of `x` values ranked above `n` in the combined `2n` sample.
pub fn median_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    check_equal_lengths(x, y)?;
    let n = x.len() as f64;
    let (rx, _) = combined_ranks(x, y);
    Ok(rx.iter().filter(|&&r| r > n).count() as f64)
}

/// `#{i : x_i > y_i}`; ties count as not greater.
pub fn sign_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    check_equal_lengths(x, y)?;
    Ok(x.iter().zip(y).filter(|(a, b)| a > b).count() as f64)
}

/// Signed-rank sum of `d = y - x`; zero differences are ranked but carry sign 0.
pub fn wilcoxon_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    check_equal_lengths(x, y)?;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = RankVector::new(&abs);
    Ok(ranks
        .ranks()
        .iter()
        .zip(&d)
        .map(|(r, v)| if *v > 0.0 { *r } else if *v < 0.0 { -*r } else { 0.0 })
        .sum())
}

/// CvM distance plus `(1/n)·Laplace(1/ε)`.
pub fn private_cvm(x: &SortedSample, f: &ContinuousCdf, epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    privatize(cvm_to_cdf(x, f), 1.0 / x.len() as f64, epsilon, NoiseKind::Laplace, rng)
}

/// Kruskal–Wallis plus `8·Laplace(1/ε)`. Larger is more evidence.
pub fn private_kruskal_wallis(x: &[f64], y: &[f64], epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    privatize(kruskal_wallis_statistic(x, y), 8.0, epsilon, NoiseKind::Laplace, rng)
}

/// `min(U1, U2) + max(n, m)·Laplace(1/ε)`. Smaller is more evidence.
pub fn private_mann_whitney(x: &[f64], y: &[f64], epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    let scale = x.len().max(y.len()) as f64;
    privatize(mann_whitney_statistic(x, y), scale, epsilon, NoiseKind::Laplace, rng)
}

/// `|S + Tulap(e^{-ε}, 0) - n/2|`.
pub fn private_median_test(x: &[f64], y: &[f64], epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    let s = privatize(median_statistic(x, y)?, 1.0, epsilon, NoiseKind::Tulap, rng)?;
    Ok((s - x.len() as f64 / 2.0).abs())
}

/// `|T + Tulap(e^{-ε}, 0) - n/2|`.
pub fn private_sign_test(x: &[f64], y: &[f64], epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    let t = privatize(sign_statistic(x, y)?, 1.0, epsilon, NoiseKind::Tulap, rng)?;
    Ok((t - x.len() as f64 / 2.0).abs())
}

/// `|W + 2n·Laplace(1/ε)|`.
pub fn private_wilcoxon(x: &[f64], y: &[f64], epsilon: PrivacyBudget, rng: &mut RngStream) -> Result<f64> {
    let w = privatize(wilcoxon_statistic(x, y)?, 2.0 * x.len() as f64, epsilon, NoiseKind::Laplace, rng)?;
    Ok(w.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Cvm,
    KruskalWallis,
    MannWhitney,
    Median,
    Sign,
    Wilcoxon,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Cvm,
        BaselineKind::KruskalWallis,
        BaselineKind::MannWhitney,
        BaselineKind::Median,
        BaselineKind::Sign,
        BaselineKind::Wilcoxon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Cvm => "cvm",
            BaselineKind::KruskalWallis => "kruskal-wallis",
            BaselineKind::MannWhitney => "mann-whitney",
            BaselineKind::Median => "median",
            BaselineKind::Sign => "sign",
            BaselineKind::Wilcoxon => "wilcoxon",
        }
    }

    pub fn noise(self) -> NoiseKind {
        match self {
            BaselineKind::Median | BaselineKind::Sign => NoiseKind::Tulap,
            _ => NoiseKind::Laplace,
        }
    }

    /// Data layout the test expects: `"gof"`, `"two-sample"` or `"paired"`.
    pub fn design(self) -> &'static str {
        match self {
            BaselineKind::Cvm => "gof",
            BaselineKind::KruskalWallis | BaselineKind::MannWhitney | BaselineKind::Median => "two-sample",
            BaselineKind::Sign | BaselineKind::Wilcoxon => "paired",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown baseline test '{s}'")))
    }
}

/// A baseline test bound to its privacy budget (and null cdf, for CvM).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    kind: BaselineKind,
    epsilon: PrivacyBudget,
    null: Option<ContinuousCdf>,
}

impl Baseline {
    /// `null` is required for CvM and rejected otherwise.
    pub fn new(kind: BaselineKind, epsilon: PrivacyBudget, null: Option<ContinuousCdf>) -> Result<Self> {
        match (kind, null) {
            (BaselineKind::Cvm, None) => param("the cvm test needs a null cdf"),
            (BaselineKind::Cvm, _) | (_, None) => Ok(Baseline { kind, epsilon, null }),
            (_, Some(_)) => param(format!("{kind} does not take a null cdf")),
        }
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    fn scale(&self, n: usize, m: Option<usize>) -> f64 {
        match self.kind {
            BaselineKind::Cvm => 1.0 / n as f64,
            BaselineKind::KruskalWallis => 8.0,
            BaselineKind::MannWhitney => n.max(m.unwrap_or(n)) as f64,
            BaselineKind::Median | BaselineKind::Sign => 1.0,
            BaselineKind::Wilcoxon => 2.0 * n as f64,
        }
    }

    fn check_sizes(&self, n: usize, m: Option<usize>) -> Result<()> {
        if n == 0 || m == Some(0) {
            return param("sample sizes must be positive");
        }
        match (self.kind.design(), m) {
            ("two-sample", None) => param(format!("{} needs two samples", self.kind)),
            ("two-sample", Some(m)) if self.kind == BaselineKind::Median && m != n => {
                param(format!("the median test needs equal group sizes, got {n} and {m}"))
            }
            ("two-sample", Some(_)) => Ok(()),
            (_, Some(_)) => param(format!("{} takes a single sample size", self.kind)),
            _ => Ok(()),
        }
    }
}

impl Procedure for Baseline {
    fn method(&self) -> String {
        self.kind.name().to_string()
    }

    fn fingerprint(&self, n: usize, m: Option<usize>) -> Result<Fingerprint> {
        self.check_sizes(n, m)?;
        let kind = match self.kind.design() {
            "gof" => "gof-known",
            other => other,
        };
        Ok(Fingerprint {
            kind: kind.to_string(),
            method: self.method(),
            noise: self.kind.noise(),
            epsilon: self.epsilon.epsilon(),
            n,
            m,
        })
    }

    fn evaluate(&self, data: &Dataset, rng: &mut RngStream) -> Result<Evaluation> {
        let (n, m) = data.sizes();
        self.check_sizes(n, m)?;
        let raw = match (self.kind, data) {
            (BaselineKind::Cvm, Dataset::One(x)) => cvm_to_cdf(x, self.null.as_ref().expect("checked in new")),
            (BaselineKind::KruskalWallis, Dataset::Two(x, y)) => kruskal_wallis_statistic(x.values(), y.values()),
            (BaselineKind::MannWhitney, Dataset::Two(x, y)) => mann_whitney_statistic(x.values(), y.values()),
            (BaselineKind::Median, Dataset::Two(x, y)) => median_statistic(x.values(), y.values())?,
            (BaselineKind::Sign, Dataset::Paired { x, y }) => sign_statistic(x, y)?,
            (BaselineKind::Wilcoxon, Dataset::Paired { x, y }) => wilcoxon_statistic(x, y)?,
            _ => return param(format!("{} received the wrong data layout", self.kind)),
        };
        let sensitivity = self.scale(n, m);
        let privatized = privatize(raw, sensitivity, self.epsilon, self.kind.noise(), rng)?;
        let half = n as f64 / 2.0;
        let evidence = match self.kind {
            BaselineKind::MannWhitney => -privatized,
            BaselineKind::Median | BaselineKind::Sign => (privatized - half).abs(),
            BaselineKind::Wilcoxon => privatized.abs(),
            BaselineKind::Cvm | BaselineKind::KruskalWallis => privatized,
        };
        Ok(Evaluation {
            raw,
            privatized,
            evidence,
            sensitivity,
        })
    }

    fn null_dataset(&self, n: usize, m: Option<usize>, rng: &mut RngStream) -> Dataset {
        match self.kind.design() {
            "gof" => {
                let f = self.null.expect("checked in new");
                Dataset::One(SortedSample::from_finite(f.sample_n(n, rng)))
            }
            "two-sample" => normal_null_dataset(true, n, m, rng),
            _ => normal_null_dataset(false, n, m, rng),
        }
    }
}
