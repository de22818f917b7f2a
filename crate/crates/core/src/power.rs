//! Monte Carlo power studies over grids of scenarios, tests, budgets and
//! sample sizes.
//!
//! Every grid cell gets one null table, seeded from `(master_seed, cell id)`,
//! and trial `t` of the cell draws its data and noise from `(master_seed,
//! cell id, t)`. Results therefore do not depend on the number of threads.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::baselines::{Baseline, BaselineKind};
use crate::error::{Error, Result};
use crate::inference::{calibrate_null, run_private_test, Adjacency, Dataset, Procedure, TestKind, TestSpec};
use crate::metrics::MetricKind;
use crate::models::{parse_model, BaseFamily, ContinuousCdf, LocationScaleFamily};
use crate::noise::{NoiseKind, PrivacyBudget};
use crate::rng::{derive_seed, RngStream};
use crate::sample::SortedSample;

const TABLE: u64 = 0x7461_626c;
const TRIAL: u64 = 0x7472_6961;
const DATA: u64 = 0x6461_7461;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Gof,
    TwoSample,
    Paired,
}

impl Design {
    pub fn name(self) -> &'static str {
        match self {
            Design::Gof => "gof",
            Design::TwoSample => "two-sample",
            Design::Paired => "paired",
        }
    }

    /// Test names accepted for this design.
    pub fn tests(self) -> &'static [&'static str] {
        match self {
            Design::Gof => &["ks", "kuiper", "cvm", "wasserstein", "ks-family", "kuiper-family"],
            Design::TwoSample => &["ks", "kuiper", "mann-whitney", "kruskal-wallis", "median"],
            Design::Paired => &["ks", "kuiper", "sign", "wilcoxon"],
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gof" => Ok(Design::Gof),
            "two-sample" => Ok(Design::TwoSample),
            "paired" => Ok(Design::Paired),
            _ => Err(Error::Config(format!(
                "unknown design '{s}' (expected gof, two-sample or paired)"
            ))),
        }
    }
}

/// A data-generating setup and the tests run on it.
///
/// * gof: data from `alternative`, tested against `null`.
/// * two-sample: `x` from `null`, `y` from `alternative`.
/// * paired: `x` from `null`, `y = x + z` with `z` from `alternative`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub caption: String,
    pub design: Design,
    pub null: ContinuousCdf,
    pub alternative: ContinuousCdf,
    pub tests: Vec<String>,
    /// Family used by `ks-family` / `kuiper-family`.
    pub family: BaseFamily,
    pub adjacency: Adjacency,
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(Error::Config(format!("scenario '{}': test list is empty", self.name)));
        }
        for t in &self.tests {
            if !self.design.tests().contains(&t.as_str()) {
                return Err(Error::Config(format!(
                    "scenario '{}': unknown test '{t}' for a {} design (available: {})",
                    self.name,
                    self.design,
                    self.design.tests().join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Builds the procedure for test `test` at budget `epsilon`.
    pub fn procedure(&self, test: &str, epsilon: PrivacyBudget) -> Result<Box<dyn Procedure>> {
        let core = |kind: TestKind, metric: MetricKind| -> Result<Box<dyn Procedure>> {
            Ok(Box::new(TestSpec::new(kind, metric, epsilon, default_noise(metric))?))
        };
        let family = LocationScaleFamily::new(self.family);
        match (self.design, test) {
            (Design::Gof, "ks-family") => core(TestKind::GofFamily(family), MetricKind::Ks),
            (Design::Gof, "kuiper-family") => core(TestKind::GofFamily(family), MetricKind::Kuiper),
            (Design::Gof, _) if test.parse::<MetricKind>().is_ok() => {
                core(TestKind::GofKnown(self.null), test.parse()?)
            }
            (Design::TwoSample, "ks" | "kuiper") => core(TestKind::TwoSample(self.adjacency), test.parse()?),
            (Design::Paired, "ks" | "kuiper") => core(TestKind::Paired, test.parse()?),
            (d, _) => match test.parse::<BaselineKind>() {
                Ok(b) if b.design() == d.name() => Ok(Box::new(Baseline::new(b, epsilon, None)?)),
                _ => Err(Error::Config(format!("test '{test}' is not available for {d} scenarios"))),
            },
        }
    }

    /// Draws one dataset of size `n` (per group) from the scenario.
    pub fn generate(&self, n: usize, rng: &mut RngStream) -> Dataset {
        match self.design {
            Design::Gof => Dataset::One(SortedSample::from_finite(self.alternative.sample_n(n, rng))),
            Design::TwoSample => {
                let x = self.null.sample_n(n, rng);
                let y = self.alternative.sample_n(n, rng);
                Dataset::Two(SortedSample::from_finite(x), SortedSample::from_finite(y))
            }
            Design::Paired => {
                let x = self.null.sample_n(n, rng);
                let y = x.iter().map(|v| v + self.alternative.sample(rng)).collect();
                Dataset::Paired { x, y }
            }
        }
    }

    fn sizes(&self, n: usize) -> Option<usize> {
        (self.design == Design::TwoSample).then_some(n)
    }
}

/// Tulap for KS and Kuiper, Laplace for the base-measure metrics.
pub fn default_noise(metric: MetricKind) -> NoiseKind {
    if metric.needs_base_measure() {
        NoiseKind::Laplace
    } else {
        NoiseKind::Tulap
    }
}

/// Metric column of the output for a test name.
pub fn metric_label(test: &str) -> &str {
    test.strip_suffix("-family").unwrap_or(test)
}

fn scenario(
    name: &str,
    caption: &str,
    design: Design,
    null: &str,
    alternative: &str,
    tests: &[&str],
) -> Scenario {
    Scenario {
        name: name.into(),
        caption: caption.into(),
        design,
        null: parse_model(null).expect("builtin model"),
        alternative: parse_model(alternative).expect("builtin model"),
        tests: tests.iter().map(|t| t.to_string()).collect(),
        family: BaseFamily::Normal,
        adjacency: Adjacency::FixedGroups,
    }
}

/// The nine reference scenarios: three goodness-of-fit, three two-sample
/// and three paired.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let gof_all = ["ks", "kuiper", "cvm", "ks-family", "kuiper-family"];
    let two = ["ks", "kuiper", "mann-whitney", "kruskal-wallis", "median"];
    let paired = ["ks", "kuiper", "sign", "wilcoxon"];
    // Exp(1) shifted by -ln 2 has median exactly zero.
    let exp_centered = format!("exponential:{},1", -std::f64::consts::LN_2);
    vec![
        scenario(
            "gof-normal-shift",
            "null N(0,1), data N(0.1,1)",
            Design::Gof,
            "normal:0,1",
            "normal:0.1,1",
            &["ks", "kuiper", "cvm"],
        ),
        scenario("gof-cauchy", "null N(0,1), data Cauchy(0,1)", Design::Gof, "normal:0,1", "cauchy:0,1", &gof_all),
        scenario("gof-laplace", "null N(0,1), data Laplace(0,1)", Design::Gof, "normal:0,1", "laplace:0,1", &gof_all),
        scenario(
            "ts-location",
            "x ~ N(0,1) versus y ~ N(1,1)",
            Design::TwoSample,
            "normal:0,1",
            "normal:1,1",
            &two,
        ),
        scenario(
            "ts-cauchy-location",
            "x ~ Cauchy(0,1) versus y ~ Cauchy(1,1)",
            Design::TwoSample,
            "cauchy:0,1",
            "cauchy:1,1",
            &two,
        ),
        scenario(
            "ts-shape",
            "x ~ N(0,1) versus y ~ Cauchy(0,1)",
            Design::TwoSample,
            "normal:0,1",
            "cauchy:0,1",
            &two,
        ),
        scenario(
            "paired-normal",
            "x ~ N(0,1), y - x ~ N(0.2,1)",
            Design::Paired,
            "normal:0,1",
            "normal:0.2,1",
            &paired,
        ),
        scenario(
            "paired-cauchy",
            "x ~ N(0,1), y - x ~ Cauchy(0.2,1)",
            Design::Paired,
            "normal:0,1",
            "cauchy:0.2,1",
            &paired,
        ),
        scenario(
            "paired-exp",
            "x ~ N(0,1), y - x + log(2) ~ Exp(1)",
            Design::Paired,
            "normal:0,1",
            &exp_centered,
            &paired,
        ),
    ]
}

/// A complete power study.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenarios: Vec<Scenario>,
    pub n_grid: Vec<usize>,
    pub epsilon_grid: Vec<f64>,
    pub alpha: f64,
    pub trials: usize,
    pub mc_samples: usize,
    pub master_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_alpha")]
    alpha: f64,
    trials: usize,
    mc_samples: usize,
    master_seed: u64,
    n_grid: Vec<usize>,
    epsilon_grid: Vec<f64>,
    #[serde(default)]
    builtin: Vec<String>,
    #[serde(default, rename = "scenario")]
    scenarios: Vec<RawScenario>,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    caption: String,
    design: String,
    null: String,
    alternative: String,
    tests: Vec<String>,
    family: Option<String>,
    adjacency: Option<String>,
}

impl RawScenario {
    fn build(self) -> Result<Scenario> {
        let ctx = |field: &str, e: Error| Error::Config(format!("scenario '{}', field '{field}': {e}", self.name));
        let design: Design = self.design.parse().map_err(|e| ctx("design", e))?;
        let null = parse_model(&self.null).map_err(|e| ctx("null", e))?;
        let alternative = parse_model(&self.alternative).map_err(|e| ctx("alternative", e))?;
        let family = match &self.family {
            Some(f) => f.parse().map_err(|e| ctx("family", e))?,
            None => BaseFamily::Normal,
        };
        let adjacency = match &self.adjacency {
            Some(a) => a.parse().map_err(|e| ctx("adjacency", e))?,
            None => Adjacency::FixedGroups,
        };
        Ok(Scenario {
            caption: self.caption.clone(),
            name: self.name,
            design,
            null,
            alternative,
            tests: self.tests,
            family,
            adjacency,
        })
    }
}

impl ExperimentConfig {
    /// All builtin scenarios with trials = 500, M = 1000, n in {50, 100,
    /// 200, 400} and ε in {0.1, 1}.
    pub fn desk_scale(master_seed: u64) -> Self {
        ExperimentConfig {
            scenarios: builtin_scenarios(),
            n_grid: vec![50, 100, 200, 400],
            epsilon_grid: vec![0.1, 1.0],
            alpha: 0.05,
            trials: 500,
            mc_samples: 1000,
            master_seed,
        }
    }

    /// Parses the TOML config format; see `configs/desk.toml` for an
    /// annotated example.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let builtins = builtin_scenarios();
        let mut scenarios = Vec::new();
        for name in &raw.builtin {
            let s = builtins
                .iter()
                .find(|s| &s.name == name)
                .ok_or_else(|| Error::Config(format!("unknown builtin scenario '{name}'")))?;
            scenarios.push(s.clone());
        }
        for s in raw.scenarios {
            scenarios.push(s.build()?);
        }
        let config = ExperimentConfig {
            scenarios,
            n_grid: raw.n_grid,
            epsilon_grid: raw.epsilon_grid,
            alpha: raw.alpha,
            trials: raw.trials,
            mc_samples: raw.mc_samples,
            master_seed: raw.master_seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n_grid.is_empty() || self.epsilon_grid.is_empty() {
            return bad("n_grid and epsilon_grid must be nonempty".into());
        }
        if self.scenarios.is_empty() {
            return bad("no scenarios: add `builtin = [...]` or [[scenario]] blocks".into());
        }
        if self.trials == 0 || self.mc_samples == 0 {
            return bad("trials and mc_samples must be positive".into());
        }
        for &e in &self.epsilon_grid {
            PrivacyBudget::new(e).map_err(|err| Error::Config(format!("epsilon_grid: {err}")))?;
        }
        let mut names = std::collections::HashSet::new();
        for s in &self.scenarios {
            if !names.insert(&s.name) {
                return bad(format!("duplicate scenario name '{}'", s.name));
            }
            s.validate()?;
            let min_n = if s.tests.iter().any(|t| t.ends_with("-family")) { 3 } else { 1 };
            if let Some(n) = self.n_grid.iter().find(|&&n| n < min_n) {
                return bad(format!("scenario '{}': n = {n} is too small", s.name));
            }
        }
        Ok(())
    }
}

/// One line of a power study.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub scenario: String,
    pub test: String,
    pub metric: String,
    pub epsilon: f64,
    pub n: usize,
    pub power: f64,
    pub trials: usize,
    pub se: f64,
}

/// FNV-1a over the cell coordinates.
pub fn cell_id(scenario: &str, test: &str, epsilon: f64, n: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(scenario.as_bytes());
    feed(&[0]);
    feed(test.as_bytes());
    feed(&[0]);
    feed(&epsilon.to_bits().to_le_bytes());
    feed(&(n as u64).to_le_bytes());
    h
}

/// Estimates the rejection rate for one grid cell.
pub fn estimate_power(
    scenario: &Scenario,
    test: &str,
    epsilon: f64,
    n: usize,
    config: &ExperimentConfig,
) -> Result<PowerRow> {
    let budget = PrivacyBudget::new(epsilon)?;
    let procedure = scenario.procedure(test, budget)?;
    let cell = cell_id(&scenario.name, test, epsilon, n);
    let m = scenario.sizes(n);
    let table = calibrate_null(
        procedure.as_ref(),
        n,
        m,
        config.mc_samples,
        derive_seed(config.master_seed, &[TABLE, cell]),
    )?;
    let rejections = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(config.master_seed, &[TRIAL, cell, t]);
            let data = scenario.generate(n, &mut RngStream::derive(seed, &[DATA]));
            run_private_test(procedure.as_ref(), &data, &table, seed).map(|r| r.rejects(config.alpha) as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let power = rejections as f64 / config.trials as f64;
    Ok(PowerRow {
        scenario: scenario.name.clone(),
        test: test.to_string(),
        metric: metric_label(test).to_string(),
        epsilon,
        n,
        power,
        trials: config.trials,
        se: (power * (1.0 - power) / config.trials as f64).sqrt(),
    })
}

/// Runs every (scenario, test, ε, n) cell; rows are sorted by those keys.
pub fn run_power_study(config: &ExperimentConfig) -> Result<Vec<PowerRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for s in &config.scenarios {
        for test in &s.tests {
            for &eps in &config.epsilon_grid {
                for &n in &config.n_grid {
                    rows.push(estimate_power(s, test, eps, n, config)?);
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.scenario, &a.test)
            .cmp(&(&b.scenario, &b.test))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.n.cmp(&b.n))
    });
    rows.dedup();
    Ok(rows)
}

/// [`run_power_study`] on a dedicated pool of `threads` workers.
pub fn run_power_study_with_threads(config: &ExperimentConfig, threads: usize) -> Result<Vec<PowerRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| run_power_study(config))
}

pub const CSV_HEADER: [&str; 8] = ["scenario", "test", "metric", "epsilon", "n", "power", "trials", "se"];

pub fn write_power_csv<W: io::Write>(rows: &[PowerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io(io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.test.clone(),
            r.metric.clone(),
            r.epsilon.to_string(),
            r.n.to_string(),
            r.power.to_string(),
            r.trials.to_string(),
            r.se.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn power_csv_string(rows: &[PowerRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_power_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
