//! Empirical distributions of per-step metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

/// Percentile ranks reported by default.
pub const REPORT_PERCENTILES: [u32; 4] = [25, 50, 75, 90];

/// Sorted samples with their empirical CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport<T> {
    samples: Vec<T>,
    /// `(rank, value)` for every rank in [`REPORT_PERCENTILES`].
    pub percentiles: Vec<(u32, T)>,
}

/// Sorts the samples and evaluates the default percentiles. NaN is rejected.
pub fn compute_distribution<T: Real>(samples: &[T]) -> Result<DistributionReport<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("distribution needs at least one sample".into()));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("distribution samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut report = DistributionReport { samples: sorted, percentiles: Vec::new() };
    report.percentiles = REPORT_PERCENTILES.iter().map(|&q| (q, report.percentile(T::from_u32(q).unwrap()))).collect();
    Ok(report)
}

impl<T: Real> DistributionReport<T> {
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn min(&self) -> T {
        self.samples[0]
    }

    pub fn max(&self) -> T {
        self.samples[self.samples.len() - 1]
    }

    pub fn mean(&self) -> T {
        self.samples.iter().copied().sum::<T>() / T::from_usize(self.samples.len()).unwrap()
    }

    /// Linear interpolation between the closest order statistics: rank `q` in `[0, 100]`
    /// sits at fractional index `q / 100 * (n - 1)`.
    pub fn percentile(&self, q: T) -> T {
        let n = self.samples.len();
        let q = q.max(T::zero()).min(T::lit(100.0));
        let pos = q / T::lit(100.0) * T::from_usize(n - 1).unwrap();
        let lo = pos.floor().to_usize().unwrap().min(n - 1);
        let hi = (lo + 1).min(n - 1);
        let frac = pos - T::from_usize(lo).unwrap();
        let (a, b) = (self.samples[lo], self.samples[hi]);
        if a == b {
            a
        } else {
            a + (b - a) * frac
        }
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: T) -> T {
        let below = self.samples.partition_point(|s| *s <= x);
        T::from_usize(below).unwrap() / T::from_usize(self.samples.len()).unwrap()
    }

    /// Fraction of samples `> x`.
    pub fn ccdf(&self, x: T) -> T {
        T::one() - self.cdf(x)
    }

    /// `(x, CDF(x), CCDF(x))` at every distinct sample value, ready for plotting.
    pub fn curve(&self) -> Vec<(T, T, T)> {
        let mut out: Vec<(T, T, T)> = Vec::new();
        for &x in &self.samples {
            if out.last().is_some_and(|p| p.0 == x) {
                continue;
            }
            let f = self.cdf(x);
            out.push((x, f, T::one() - f));
        }
        out
    }
}
