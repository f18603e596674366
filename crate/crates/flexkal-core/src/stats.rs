//! Moment statistics and histograms for validating sample distributions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Summary moments of a sample set.
///
/// The variance uses the unbiased (n - 1) divisor; skewness and excess
/// kurtosis are the standard moment ratios over n-divided central moments.
/// A zero-spread sample reports zero skewness and excess kurtosis so that
/// every field stays finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Computes [`SampleStats`] over a slice.
///
/// # Errors
/// Needs at least two samples.
pub fn normality_stats(samples: &[f64]) -> Result<SampleStats> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let m2n = m2 / nf;
    let (skewness, excess_kurtosis) = if m2n == 0.0 {
        (0.0, 0.0)
    } else {
        let m3n = m3 / nf;
        let m4n = m4 / nf;
        (m3n / (m2n * math::sqrt(m2n)), m4n / (m2n * m2n) - 3.0)
    };
    Ok(SampleStats {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// Bin counts over a closed range, with explicit overflow buckets.
///
/// `below` and `above` absorb out-of-range samples, so the bucket total
/// always equals the sample count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub below: usize,
    pub counts: Vec<usize>,
    pub above: usize,
}

impl Histogram {
    /// Sum over all buckets, including the overflow ones.
    pub fn total(&self) -> usize {
        self.below + self.above + self.counts.iter().sum::<usize>()
    }
}

/// Counts samples into `bin_count` equal-width bins over `[min, max]`.
///
/// The last bin is closed so `max` itself is counted inside the range.
/// Samples below `min` land in `below`, samples above `max` (and any NaN)
/// in `above`.
///
/// # Errors
/// The range must be finite with `min < max`, and `bin_count` at least 1.
pub fn histogram(samples: &[f64], bin_count: usize, min: f64, max: f64) -> Result<Histogram> {
    if bin_count == 0 {
        return Err(Error::Parameter("bin_count must be at least 1"));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::Parameter("histogram range must be finite with min < max"));
    }
    let mut counts = alloc::vec![0usize; bin_count];
    let mut below = 0;
    let mut above = 0;
    let width = (max - min) / bin_count as f64;
    for &x in samples {
        if x.is_nan() || x > max {
            above += 1;
        } else if x < min {
            below += 1;
        } else {
            let mut idx = ((x - min) / width) as usize;
            if idx >= bin_count {
                idx = bin_count - 1;
            }
            counts[idx] += 1;
        }
    }
    Ok(Histogram {
        below,
        counts,
        above,
    })
}

/// Distance between two floats in units in the last place.
///
/// Adjacent representable values are 1 apart; equal values (including
/// positive and negative zero) are 0 apart. Any non-finite input yields
/// `u64::MAX`.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if !a.is_finite() || !b.is_finite() {
        return u64::MAX;
    }
    // Map the float bit patterns onto a single ordered unsigned scale.
    fn ordered(x: f64) -> u64 {
        let bits = x.to_bits();
        if bits >> 63 == 1 {
            !bits
        } else {
            bits | 0x8000_0000_0000_0000
        }
    }
    ordered(a).abs_diff(ordered(b))
}
