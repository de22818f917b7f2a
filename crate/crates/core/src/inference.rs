//! Goodness-of-fit, two-sample and paired tests: statistics, sensitivities,
//! privatization and Monte Carlo calibration.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::fit::fit_min_distance;
use crate::metrics::{distance_to_cdf, two_sample_distance, MetricKind};
use crate::models::{BaseFamily, ContinuousCdf, LocationScaleFamily};
use crate::noise::{privatize, NoiseKind, PrivacyBudget};
use crate::rng::{derive_seed, RngStream};
use crate::sample::SortedSample;
use crate::table::{Fingerprint, NullDistributionTable};

/// Substream tags. Calibration and observation noise never share a stream.
const CALIBRATION: u64 = 0x6361_6c69;
const OBSERVATION: u64 = 0x6f62_7376;

/// Which entries may change between adjacent two-sample databases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adjacency {
    /// Group sizes are public; one entry changes within its group.
    FixedGroups,
    /// An entry may additionally move between groups.
    SwapGroups,
}

impl Adjacency {
    pub fn name(self) -> &'static str {
        match self {
            Adjacency::FixedGroups => "fixed-groups",
            Adjacency::SwapGroups => "swap-groups",
        }
    }
}

impl fmt::Display for Adjacency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Adjacency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-groups" => Ok(Adjacency::FixedGroups),
            "swap-groups" => Ok(Adjacency::SwapGroups),
            _ => param(format!("unknown adjacency '{s}' (expected fixed-groups or swap-groups)")),
        }
    }
}

/// The null hypothesis being tested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    GofKnown(ContinuousCdf),
    GofFamily(LocationScaleFamily),
    TwoSample(Adjacency),
    Paired,
}

impl TestKind {
    /// Label used in table fingerprints. A known null cdf is not part of the
    /// label: the statistic's null law does not depend on it.
    pub fn label(&self) -> String {
        match self {
            TestKind::GofKnown(_) => "gof-known".into(),
            TestKind::GofFamily(f) => format!("gof-family:{}", f.name()),
            TestKind::TwoSample(a) => format!("two-sample:{a}"),
            TestKind::Paired => "paired".into(),
        }
    }
}

/// Observed data for one test.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    One(SortedSample),
    Two(SortedSample, SortedSample),
    Paired { x: Vec<f64>, y: Vec<f64> },
}

impl Dataset {
    pub fn one(x: Vec<f64>) -> Result<Self> {
        Ok(Dataset::One(SortedSample::new(x)?))
    }

    pub fn two(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Ok(Dataset::Two(SortedSample::new(x)?, SortedSample::new(y)?))
    }

    pub fn paired(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Data(format!(
                "paired columns differ in length ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::Data("paired data must contain at least one row".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Data("paired data contain a non-finite value".into()));
        }
        Ok(Dataset::Paired { x, y })
    }

    /// `(n, m)`, with `m` only for two-sample data.
    pub fn sizes(&self) -> (usize, Option<usize>) {
        match self {
            Dataset::One(x) => (x.len(), None),
            Dataset::Two(x, y) => (x.len(), Some(y.len())),
            Dataset::Paired { x, .. } => (x.len(), None),
        }
    }
}

/// A fully specified private test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSpec {
    kind: TestKind,
    metric: MetricKind,
    epsilon: PrivacyBudget,
    noise: NoiseKind,
}

impl TestSpec {
    pub fn new(kind: TestKind, metric: MetricKind, epsilon: PrivacyBudget, noise: NoiseKind) -> Result<Self> {
        if !matches!(kind, TestKind::GofKnown(_)) && metric.needs_base_measure() {
            let what = match kind {
                TestKind::GofFamily(_) => "goodness of fit to a family",
                TestKind::TwoSample(_) => "two-sample",
                _ => "paired",
            };
            return param(format!(
                "{metric} is only available for goodness of fit to a fully specified cdf; {what} tests support ks and kuiper"
            ));
        }
        Ok(TestSpec {
            kind,
            metric,
            epsilon,
            noise,
        })
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    pub fn noise(&self) -> NoiseKind {
        self.noise
    }

    /// The raw statistic `T` on `data`.
    pub fn statistic(&self, data: &Dataset) -> Result<f64> {
        match (&self.kind, data) {
            (TestKind::GofKnown(f), Dataset::One(x)) => Ok(gof_statistic_known(x, f, self.metric)),
            (TestKind::GofFamily(fam), Dataset::One(x)) => gof_statistic_family(x, fam, self.metric),
            (TestKind::TwoSample(_), Dataset::Two(x, y)) => two_sample_statistic(x, y, self.metric),
            (TestKind::Paired, Dataset::Paired { x, y }) => paired_statistic(x, y, self.metric),
            _ => param(format!("{} test received the wrong data layout", self.kind.label())),
        }
    }
}

/// Raw and privatized outputs of one run of a procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub raw: f64,
    pub privatized: f64,
    /// Larger means more evidence against the null; compared with the table.
    pub evidence: f64,
    /// Scale multiplying the standardized noise.
    pub sensitivity: f64,
}

/// A private test that can be calibrated by simulation.
pub trait Procedure: Sync {
    fn method(&self) -> String;

    fn fingerprint(&self, n: usize, m: Option<usize>) -> Result<Fingerprint>;

    /// Computes the statistic on `data` and privatizes it with noise from `rng`.
    fn evaluate(&self, data: &Dataset, rng: &mut RngStream) -> Result<Evaluation>;

    /// Draws a dataset of the given sizes from the canonical null model.
    fn null_dataset(&self, n: usize, m: Option<usize>, rng: &mut RngStream) -> Dataset;
}

pub(crate) fn standard_normal_sample(n: usize, rng: &mut RngStream) -> Vec<f64> {
    ContinuousCdf::standard(BaseFamily::Normal).sample_n(n, rng)
}

/// Null datasets shared by two-sample and paired procedures.
pub(crate) fn normal_null_dataset(two_sample: bool, n: usize, m: Option<usize>, rng: &mut RngStream) -> Dataset {
    if two_sample {
        let x = standard_normal_sample(n, rng);
        let y = standard_normal_sample(m.unwrap_or(n), rng);
        Dataset::Two(SortedSample::from_finite(x), SortedSample::from_finite(y))
    } else {
        Dataset::Paired {
            x: vec![0.0; n],
            y: standard_normal_sample(n, rng),
        }
    }
}

impl Procedure for TestSpec {
    fn method(&self) -> String {
        self.metric.name().to_string()
    }

    fn fingerprint(&self, n: usize, m: Option<usize>) -> Result<Fingerprint> {
        sensitivity_for(self, n, m)?;
        Ok(Fingerprint {
            kind: self.kind.label(),
            method: self.method(),
            noise: self.noise,
            epsilon: self.epsilon.epsilon(),
            n,
            m,
        })
    }

    fn evaluate(&self, data: &Dataset, rng: &mut RngStream) -> Result<Evaluation> {
        let (n, m) = data.sizes();
        let sensitivity = sensitivity_for(self, n, m)?;
        let raw = self.statistic(data)?;
        let privatized = privatize(raw, sensitivity, self.epsilon, self.noise, rng)?;
        Ok(Evaluation {
            raw,
            privatized,
            evidence: privatized,
            sensitivity,
        })
    }

    fn null_dataset(&self, n: usize, m: Option<usize>, rng: &mut RngStream) -> Dataset {
        match self.kind {
            TestKind::GofKnown(f) => Dataset::One(SortedSample::from_finite(f.sample_n(n, rng))),
            TestKind::GofFamily(fam) => Dataset::One(SortedSample::from_finite(fam.base().sample_n(n, rng))),
            TestKind::TwoSample(_) => normal_null_dataset(true, n, m, rng),
            TestKind::Paired => normal_null_dataset(false, n, m, rng),
        }
    }
}

/// `d(F̂_x, F)`, with `F` as the base measure for CvM and Wasserstein.
pub fn gof_statistic_known(x: &SortedSample, f: &ContinuousCdf, metric: MetricKind) -> f64 {
    distance_to_cdf(metric, x, f)
}

/// `inf_{m,s} d(F̂_x, F_{m,s})` over the family.
pub fn gof_statistic_family(x: &SortedSample, family: &LocationScaleFamily, metric: MetricKind) -> Result<f64> {
    Ok(fit_min_distance(family, x, metric)?.achieved_distance)
}

pub fn two_sample_statistic(x: &SortedSample, y: &SortedSample, metric: MetricKind) -> Result<f64> {
    two_sample_distance(metric, x, y)
}

/// `d(F̂_z, F̂_{-z})` for the differences `z = y - x`. Zero differences are kept.
pub fn paired_statistic(x: &[f64], y: &[f64], metric: MetricKind) -> Result<f64> {
    if x.len() != y.len() {
        return param(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        ));
    }
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let neg: Vec<f64> = z.iter().map(|v| -v).collect();
    two_sample_distance(metric, &SortedSample::new(z)?, &SortedSample::new(neg)?)
}

/// Sensitivity of the test statistic under the test's adjacency.
pub fn sensitivity_for(spec: &TestSpec, n: usize, m: Option<usize>) -> Result<f64> {
    if n == 0 || m == Some(0) {
        return param("sample sizes must be positive");
    }
    let inv = |k: usize| 1.0 / k as f64;
    match (spec.kind, m) {
        (TestKind::TwoSample(adj), Some(m)) => Ok(match adj {
            Adjacency::FixedGroups => inv(n).max(inv(m)),
            Adjacency::SwapGroups => inv(n) + inv(m),
        }),
        (TestKind::TwoSample(_), None) => param("two-sample sensitivity needs the second sample size"),
        (_, Some(_)) => param("only two-sample tests take a second sample size"),
        (TestKind::Paired, None) => Ok(2.0 * inv(n)),
        (_, None) => Ok(inv(n)),
    }
}

/// Outcome of one private test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: String,
    pub raw_statistic: f64,
    pub privatized_statistic: f64,
    pub evidence: f64,
    pub sensitivity: f64,
    pub p_value: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Simulates `mc_samples` privatized null statistics.
///
/// Replicate `i` uses its own substream of `seed`, so the table is identical
/// for any thread count.
pub fn calibrate_null<P: Procedure + ?Sized>(
    procedure: &P,
    n: usize,
    m: Option<usize>,
    mc_samples: usize,
    seed: u64,
) -> Result<NullDistributionTable> {
    if mc_samples == 0 {
        return param("mc_samples must be at least 1");
    }
    let values = null_replicates(procedure, n, m, 0..mc_samples as u64, seed)?;
    NullDistributionTable::from_values(procedure.fingerprint(n, m)?, values, seed)
}

/// Evidence values of the null replicates with the given indices.
pub fn null_replicates<P: Procedure + ?Sized>(
    procedure: &P,
    n: usize,
    m: Option<usize>,
    indices: std::ops::Range<u64>,
    seed: u64,
) -> Result<Vec<f64>> {
    procedure.fingerprint(n, m)?;
    indices
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::derive(seed, &[CALIBRATION, i]);
            let data = procedure.null_dataset(n, m, &mut rng);
            procedure.evaluate(&data, &mut rng).map(|e| e.evidence)
        })
        .collect()
}

/// Runs `procedure` on `data` with observation noise from `seed` and
/// computes the Monte Carlo p-value against `table`.
pub fn run_private_test<P: Procedure + ?Sized>(
    procedure: &P,
    data: &Dataset,
    table: &NullDistributionTable,
    seed: u64,
) -> Result<TestResult> {
    let (n, m) = data.sizes();
    table.check(&procedure.fingerprint(n, m)?)?;
    let mut rng = RngStream::new(derive_seed(seed, &[OBSERVATION]));
    let e = procedure.evaluate(data, &mut rng)?;
    Ok(TestResult {
        method: procedure.method(),
        raw_statistic: e.raw,
        privatized_statistic: e.privatized,
        evidence: e.evidence,
        sensitivity: e.sensitivity,
        p_value: table.p_value(e.evidence),
        mc_samples: table.mc_samples(),
        seed,
    })
}
