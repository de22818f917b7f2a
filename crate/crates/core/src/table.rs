//! Monte Carlo null tables and their text serialization.
//!
//! ```text
//! # kind=gof-known metric=ks noise=tulap eps=1 n=100 m=- M=3 seed=7
//! 1.2345678901234567e-2
//! ...
//! ```

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::noise::NoiseKind;

/// What a table was calibrated for. Two tables are interchangeable only if
/// their fingerprints are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub kind: String,
    pub method: String,
    pub noise: NoiseKind,
    pub epsilon: f64,
    pub n: usize,
    pub m: Option<usize>,
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} metric={} noise={} eps={} n={} m={}",
            self.kind,
            self.method,
            self.noise,
            self.epsilon,
            self.n,
            self.m.map_or("-".to_string(), |m| m.to_string())
        )
    }
}

/// Sorted privatized null statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistributionTable {
    fingerprint: Fingerprint,
    values: Vec<f64>,
    seed: u64,
}

impl NullDistributionTable {
    /// Sorts `values`; fails if empty or if any value is NaN.
    pub fn from_values(fingerprint: Fingerprint, mut values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Calibration("a null table needs at least one value".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Calibration("null table contains NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(NullDistributionTable {
            fingerprint,
            values,
            seed,
        })
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mc_samples(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of table values `>= t`.
    pub fn count_at_least(&self, t: f64) -> usize {
        self.values.len() - self.values.partition_point(|&v| v < t)
    }

    /// `(1 + #{values >= t}) / (M + 1)`.
    pub fn p_value(&self, t: f64) -> f64 {
        (1 + self.count_at_least(t)) as f64 / (self.values.len() + 1) as f64
    }

    pub fn check(&self, expected: &Fingerprint) -> Result<()> {
        if &self.fingerprint == expected {
            Ok(())
        } else {
            Err(Error::Calibration(format!(
                "table was calibrated for [{}] but the test needs [{}]",
                self.fingerprint, expected
            )))
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# {} M={} seed={}",
            self.fingerprint,
            self.values.len(),
            self.seed
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for v in &self.values {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Calibration(msg);
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| bad("missing '#' header line".into()))?;

        let mut fields = std::collections::HashMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header field '{tok}'")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| bad(format!("header lacks '{k}'")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| bad(format!("header field '{k}' is not an integer")))
        };
        let m = match get("m")? {
            "-" => None,
            _ => Some(num("m")?),
        };
        let fingerprint = Fingerprint {
            kind: get("kind")?.to_string(),
            method: get("metric")?.to_string(),
            noise: get("noise")?
                .parse()
                .map_err(|_| bad("unknown noise in header".into()))?,
            epsilon: get("eps")?
                .parse()
                .map_err(|_| bad("header field 'eps' is not a number".into()))?,
            n: num("n")?,
            m,
        };
        let declared = num("M")?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|_| bad("header field 'seed' is not an integer".into()))?;

        let mut values = Vec::with_capacity(declared);
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| bad(format!("line {}: '{line}' is not a number", i + 2)))?;
            values.push(v);
        }
        if values.len() != declared {
            return Err(bad(format!(
                "header declares M={declared} but {} values follow",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("table values are not sorted ascending".into()));
        }
        Self::from_values(fingerprint, values, seed)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}
