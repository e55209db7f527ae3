use serde::{Deserialize, Serialize};

use super::AnalyticsError;

/// Relative slack applied at bin edges so that decimal-looking values such as
/// 0.7 land in the bin a reader expects despite binary rounding.
const EDGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// `[lo + k*w, lo + (k+1)*w)`, with the final edge clamped to `hi`.
    pub fn bin_range(&self, k: usize) -> (f64, f64) {
        let start = self.lo + k as f64 * self.bin_width;
        (start, (start + self.bin_width).min(self.hi))
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the fullest bin (first on ties); `None` when empty.
    pub fn modal_bin(&self) -> Option<usize> {
        let max = *self.counts.iter().max()?;
        if max == 0 {
            return None;
        }
        self.counts.iter().position(|c| *c == max)
    }
}

/// Half-open bins of `bin_width` over `[lo, hi]`, the last bin closed.
/// Values outside the range (and NaN) are not counted.
pub fn sentiment_histogram(values: &[f64], bin_width: f64, range: (f64, f64)) -> Result<Histogram, AnalyticsError> {
    let (lo, hi) = range;
    if !bin_width.is_finite() || bin_width <= 0.0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(AnalyticsError::BadRange);
    }
    let bins = (((hi - lo) / bin_width) - EDGE_EPSILON).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(lo..=hi).contains(&v) {
            continue;
        }
        let idx = (((v - lo) / bin_width) + EDGE_EPSILON).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    Ok(Histogram {
        lo,
        hi,
        bin_width,
        counts,
    })
}
