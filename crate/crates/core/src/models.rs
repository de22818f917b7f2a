//! Continuous cdf models and location-scale families.
//!
//! Every model is a member `F_{m,s}(t) = F_{0,1}((t - m) / s)` of one of five
//! base families, which makes the location-scale structure explicit and lets
//! the same type serve as a fixed null, a base measure, and a fitted member.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::rng::RngStream;
use crate::special::{cauchy_cdf, cauchy_quantile, normal_cdf, normal_quantile};

/// Anything that can be evaluated as a cdf on the real line.
pub trait Cdf {
    fn cdf(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Base member `F_{0,1}` of a location-scale family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseFamily {
    Normal,
    Cauchy,
    Laplace,
    /// Shifted exponential with base cdf `1 - exp(-t)` on `t >= 0`.
    Exponential,
    /// Uniform with base member U(0, 1).
    Uniform,
}

impl BaseFamily {
    pub const ALL: [BaseFamily; 5] = [
        BaseFamily::Normal,
        BaseFamily::Cauchy,
        BaseFamily::Laplace,
        BaseFamily::Exponential,
        BaseFamily::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFamily::Normal => "normal",
            BaseFamily::Cauchy => "cauchy",
            BaseFamily::Laplace => "laplace",
            BaseFamily::Exponential => "exponential",
            BaseFamily::Uniform => "uniform",
        }
    }

    fn base_cdf(self, z: f64) -> f64 {
        match self {
            BaseFamily::Normal => normal_cdf(z),
            BaseFamily::Cauchy => cauchy_cdf(z),
            BaseFamily::Laplace => {
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            BaseFamily::Exponential => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            BaseFamily::Uniform => z.clamp(0.0, 1.0),
        }
    }

    fn base_quantile(self, u: f64) -> f64 {
        match self {
            BaseFamily::Normal => normal_quantile(u),
            BaseFamily::Cauchy => cauchy_quantile(u),
            BaseFamily::Laplace => {
                if u < 0.5 {
                    (2.0 * u).ln()
                } else {
                    -(2.0 * (1.0 - u)).ln()
                }
            }
            BaseFamily::Exponential => -(-u).ln_1p(),
            BaseFamily::Uniform => u,
        }
    }
}

impl fmt::Display for BaseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseFamily::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown model '{s}' (expected one of normal, cauchy, laplace, exponential, uniform)"
                ))
            })
    }
}

/// An evaluable continuous cdf with quantile function and inverse-transform sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousCdf {
    family: BaseFamily,
    location: f64,
    scale: f64,
}

impl ContinuousCdf {
    /// The member with location `m` and scale `s` of `family`.
    pub fn member(family: BaseFamily, m: f64, s: f64) -> Result<Self> {
        if !m.is_finite() {
            return param(format!("location must be finite, got {m}"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return param(format!("scale must be positive and finite, got {s}"));
        }
        Ok(ContinuousCdf {
            family,
            location: m,
            scale: s,
        })
    }

    pub fn standard(family: BaseFamily) -> Self {
        ContinuousCdf {
            family,
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn family(&self) -> BaseFamily {
        self.family
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.family.base_cdf((t - self.location) / self.scale)
    }

    /// Generalized inverse on (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        self.location + self.scale * self.family.base_quantile(u)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.uniform())
    }

    pub fn sample_n(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Identifier in `name:params` form, accepted back by [`parse_model`].
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl Cdf for ContinuousCdf {
    fn cdf(&self, t: f64) -> f64 {
        ContinuousCdf::cdf(self, t)
    }
}

impl fmt::Display for ContinuousCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, s) = (self.location, self.scale);
        match self.family {
            BaseFamily::Uniform => write!(f, "uniform:{},{}", m, m + s),
            BaseFamily::Exponential if m == 0.0 => write!(f, "exponential:{}", 1.0 / s),
            fam => write!(f, "{}:{},{}", fam.name(), m, s),
        }
    }
}

/// Builds a model from a family name and its natural parameters.
///
/// * `normal`: `[mean, sd]`
/// * `cauchy`, `laplace`: `[location, scale]`
/// * `exponential`: `[rate]`, or `[location, scale]` for the shifted form
/// * `uniform`: `[a, b]` with `a < b`
pub fn make_model(name: &str, params: &[f64]) -> Result<ContinuousCdf> {
    let family: BaseFamily = name.parse()?;
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return param(format!("{name}: parameter {bad} is not finite"));
    }
    match (family, params) {
        (BaseFamily::Exponential, [rate]) => {
            if *rate <= 0.0 {
                return param(format!("exponential: rate must be positive, got {rate}"));
            }
            ContinuousCdf::member(family, 0.0, 1.0 / rate)
        }
        (BaseFamily::Uniform, [a, b]) => {
            if a >= b {
                return param(format!("uniform: need a < b, got a={a}, b={b}"));
            }
            ContinuousCdf::member(family, *a, b - a)
        }
        (_, [m, s]) => {
            if *s <= 0.0 {
                return param(format!("{name}: scale must be positive, got {s}"));
            }
            ContinuousCdf::member(family, *m, *s)
        }
        _ => param(format!(
            "{name}: wrong number of parameters ({} given)",
            params.len()
        )),
    }
}

/// Parses `name:p1,p2` (e.g. `normal:0,1`, `exponential:1`).
pub fn parse_model(spec: &str) -> Result<ContinuousCdf> {
    let (name, rest) = spec.split_once(':').ok_or_else(|| {
        Error::Parameter(format!("model '{spec}' must have the form name:params"))
    })?;
    let params = rest
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("model '{spec}': bad number '{p}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    make_model(name, &params)
}

/// `{ F_{0,1}((. - m) / s) : m real, s > 0 }` for a fixed base family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocationScaleFamily {
    base: BaseFamily,
}

impl LocationScaleFamily {
    pub fn new(base: BaseFamily) -> Self {
        LocationScaleFamily { base }
    }

    pub fn base_family(&self) -> BaseFamily {
        self.base
    }

    /// The `F_{0,1}` member.
    pub fn base(&self) -> ContinuousCdf {
        ContinuousCdf::standard(self.base)
    }

    pub fn supports_location(&self) -> bool {
        true
    }

    pub fn member(&self, m: f64, s: f64) -> Result<ContinuousCdf> {
        ContinuousCdf::member(self.base, m, s)
    }

    pub fn name(&self) -> &'static str {
        self.base.name()
    }
}

impl FromStr for LocationScaleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(LocationScaleFamily::new(s.parse()?))
    }
}
