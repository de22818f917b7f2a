//! Differentially private goodness-of-fit, two-sample and paired tests built
//! on distances between empirical cdfs.

pub mod baselines;
pub mod error;
pub mod fit;
pub mod inference;
pub mod metrics;
pub mod models;
pub mod noise;
pub mod power;
pub mod rng;
pub mod sample;
pub mod special;
pub mod table;

pub use error::{Error, Result};
pub use baselines::{Baseline, BaselineKind};
pub use fit::{fit_min_distance, FittedParams};
pub use inference::{
    calibrate_null, run_private_test, sensitivity_for, Adjacency, Dataset, Procedure, TestKind, TestResult, TestSpec,
};
pub use metrics::MetricKind;
pub use models::{parse_model, BaseFamily, Cdf, ContinuousCdf, LocationScaleFamily};
pub use noise::{privatize, NoiseKind, PrivacyBudget};
pub use power::{builtin_scenarios, run_power_study, ExperimentConfig, PowerRow, Scenario};
pub use rng::RngStream;
pub use sample::SortedSample;
pub use table::{Fingerprint, NullDistributionTable};
