use crate::error::{Error, Result};

/// A non-empty, finite, ascending sample: the carrier of an ecdf.
///
/// Ties are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Validates and sorts `values`.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("sample must contain at least one value".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at position {}",
                values[pos], pos
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(SortedSample { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// Builds from values that are already known to be finite; sorts them.
    ///
    /// Panics if `values` is empty or contains a non-finite value.
    pub(crate) fn from_finite(mut values: Vec<f64>) -> Self {
        assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        values.sort_by(f64::total_cmp);
        SortedSample { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Evaluates the ecdf, `#{x_i <= t} / n`.
    pub fn ecdf(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= t);
        k as f64 / self.len() as f64
    }

    /// Sample quantile with linear interpolation between order statistics.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = h - lo as f64;
        self.values[lo] + frac * (self.values[hi] - self.values[lo])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Applies `f` to every value and re-sorts (for arbitrary monotone or
    /// non-monotone maps).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        SortedSample::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(SortedSample::new(vec![]), Err(Error::Data(_))));
        assert!(SortedSample::new(vec![1.0, f64::NAN]).is_err());
        assert!(SortedSample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn sorts_and_keeps_ties() {
        let s = SortedSample::new(vec![3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.ecdf(1.0), 0.5);
        assert_eq!(s.ecdf(0.999), 0.0);
        assert_eq!(s.ecdf(3.0), 1.0);
    }

    #[test]
    fn quantiles() {
        let s = SortedSample::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median(), 2.5);
        assert_eq!(s.quantile(0.0), 1.0);
        assert_eq!(s.quantile(1.0), 4.0);
        assert!((s.quantile(0.25) - 1.75).abs() < 1e-15);
    }
}
