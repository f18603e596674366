//! Timestamped multi-channel measurement traces and motor-command
//! quantization.
//!
//! A trace stores its rows in one flat row-major buffer. Rows are validated
//! on insertion: timestamps must strictly increase, every value must be
//! finite, and the column count is fixed by the channel labels.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::stats;

/// One trace row: a timestamp and a borrowed slice of channel values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    /// Milliseconds since the start of the trace.
    pub t_ms: f64,
    /// Measurement values in channel order.
    pub values: &'a [f64],
}

/// A time-ordered multi-channel measurement trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    labels: Vec<String>,
    t_ms: Vec<f64>,
    values: Vec<f64>,
}

impl Trace {
    /// Creates an empty trace whose channel count and labels are fixed by
    /// `labels`. Empty strings mean "unlabeled".
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Parameter("a trace needs at least one channel"));
        }
        Ok(Trace {
            labels,
            t_ms: Vec::new(),
            values: Vec::new(),
        })
    }

    /// Creates an empty unlabeled trace with `channels` channels.
    pub fn with_channels(channels: usize) -> Result<Self> {
        Trace::new(alloc::vec![String::new(); channels])
    }

    pub fn channels(&self) -> usize {
        self.labels.len()
    }

    pub fn rows(&self) -> usize {
        self.t_ms.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Appends one row.
    ///
    /// # Errors
    /// The row length must match the channel count, all values must be
    /// finite, and the timestamp must be finite and strictly greater than
    /// the previous row's.
    pub fn push_row(&mut self, t_ms: f64, row: &[f64]) -> Result<()> {
        if row.len() != self.channels() {
            return Err(Error::Shape {
                expected: self.channels(),
                got: row.len(),
            });
        }
        if !t_ms.is_finite() {
            return Err(Error::NonMonotonicTime { index: self.rows() });
        }
        if let Some(&last) = self.t_ms.last() {
            if t_ms <= last {
                return Err(Error::NonMonotonicTime { index: self.rows() });
            }
        }
        for &v in row {
            if !v.is_finite() {
                return Err(Error::Measurement { value: v });
            }
        }
        self.t_ms.push(t_ms);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn t(&self, row: usize) -> f64 {
        self.t_ms[row]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.channels();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn sample(&self, row: usize) -> Sample<'_> {
        Sample {
            t_ms: self.t(row),
            values: self.row(row),
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample<'_>> {
        (0..self.rows()).map(move |i| self.sample(i))
    }

    /// All values in row-major order, mostly useful for checksums.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, channel: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.channels();
        self.values[channel..].iter().step_by(n).copied()
    }
}

/// Integer command values for one output row, in channel order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotorCommand {
    pub values: Vec<i64>,
}

/// Default saturation bound for quantized commands: the largest 32-bit
/// signed magnitude.
pub const DEFAULT_COMMAND_BOUND: i64 = i32::MAX as i64;

/// Quantizes a filtered value with the default saturation bound.
pub fn quantize_command(x: f64) -> Result<i64> {
    quantize_with_bound(x, DEFAULT_COMMAND_BOUND)
}

/// Rounds half away from zero and clamps the result to `[-bound, bound]`.
///
/// # Errors
/// The input must be finite and the bound positive.
pub fn quantize_with_bound(x: f64, bound: i64) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::Command { value: x });
    }
    if bound <= 0 {
        return Err(Error::Parameter("saturation bound must be positive"));
    }
    let rounded = math::round(x);
    if rounded >= bound as f64 {
        Ok(bound)
    } else if rounded <= -(bound as f64) {
        Ok(-bound)
    } else {
        Ok(rounded as i64)
    }
}

/// First-difference variances of a raw and a filtered trace, per channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessMetric {
    pub raw_var: f64,
    pub filtered_var: f64,
    /// `filtered_var / raw_var`; zero when both vanish, infinite when only
    /// the raw variance vanishes.
    pub ratio: f64,
}

/// Quantifies how much smoother `filtered` is than `raw`, channel by
/// channel, as the variance of consecutive-sample differences.
///
/// # Errors
/// The traces must have equal shape and at least two rows.
pub fn smoothness_metrics(raw: &Trace, filtered: &Trace) -> Result<Vec<SmoothnessMetric>> {
    if raw.channels() != filtered.channels() {
        return Err(Error::Shape {
            expected: raw.channels(),
            got: filtered.channels(),
        });
    }
    if raw.rows() != filtered.rows() {
        return Err(Error::Shape {
            expected: raw.rows(),
            got: filtered.rows(),
        });
    }
    if raw.rows() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: raw.rows(),
        });
    }
    let mut metrics = Vec::with_capacity(raw.channels());
    for ch in 0..raw.channels() {
        let raw_var = first_difference_variance(raw, ch)?;
        let filtered_var = first_difference_variance(filtered, ch)?;
        let ratio = if raw_var > 0.0 {
            filtered_var / raw_var
        } else if filtered_var == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        metrics.push(SmoothnessMetric {
            raw_var,
            filtered_var,
            ratio,
        });
    }
    Ok(metrics)
}

/// Unbiased variance of consecutive-sample differences in one channel.
/// With exactly two rows there is a single difference and no spread, so the
/// variance is zero.
pub fn first_difference_variance(trace: &Trace, channel: usize) -> Result<f64> {
    if trace.rows() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: trace.rows(),
        });
    }
    let col: Vec<f64> = trace.column(channel).collect();
    let diffs: Vec<f64> = col.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.len() < 2 {
        return Ok(0.0);
    }
    Ok(stats::normality_stats(&diffs)?.variance)
}
