//! Per-channel measurement-noise calibration.
//!
//! Ships an 18-channel default configuration measured on a bending-sensor
//! glove rig, and estimates per-channel measurement variance from a trace
//! captured while the sensors are held stationary.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::DEFAULT_P0;
use crate::stats;
use crate::trace::Trace;

/// Default sampling rate of the sensor stream.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1000.0;

/// Default per-step latency budget: one sample period at the default rate.
pub const DEFAULT_STEP_BUDGET_MS: f64 = 1.0;

/// Smallest measurement variance an estimate may report. Keeps a perfectly
/// constant calibration channel from configuring a degenerate filter.
pub const R_FLOOR: f64 = 1e-9;

/// The shipped 18-channel measurement-variance diagonal, in channel order.
pub const DEFAULT_R_18: [f64; 18] = [
    21.18, 12.52, 10.62, 9.86, 26.94, 10.08, 9.71, 17.58, 6.05, 9.91, 47.19, 11.04, 7.56, 23.94,
    26.82, 28.82, 27.69, 31.49,
];

/// Noise calibration of a single sensor channel.
///
/// Invariants are checked by [`ChannelCalibration::new`] and again by
/// [`SystemConfig::new`]; treat the fields as read-mostly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCalibration {
    /// Zero-based channel position, matching the trace column order.
    pub index: usize,
    /// Free-text channel name; empty means unlabeled.
    pub label: String,
    /// Measurement-noise variance, strictly positive.
    pub r_var: f64,
    /// Multiplier on the unit process covariance, strictly positive.
    pub q_scale: f64,
}

impl ChannelCalibration {
    pub fn new(index: usize, label: String, r_var: f64, q_scale: f64) -> Result<Self> {
        let ch = ChannelCalibration {
            index,
            label,
            r_var,
            q_scale,
        };
        ch.validate()?;
        Ok(ch)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_var.is_finite() && self.r_var > 0.0) {
            return Err(Error::Parameter("r_var must be positive and finite"));
        }
        if !(self.q_scale.is_finite() && self.q_scale > 0.0) {
            return Err(Error::Parameter("q_scale must be positive and finite"));
        }
        Ok(())
    }
}

/// Full system configuration: the ordered channel calibrations plus the
/// shared sampling and filter parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    channels: Vec<ChannelCalibration>,
    sample_rate_hz: f64,
    p0: f64,
    step_budget_ms: f64,
}

impl SystemConfig {
    /// Builds and validates a configuration.
    ///
    /// # Errors
    /// Needs at least one channel, with indices matching their positions;
    /// the sampling rate, initial covariance scale, and step budget must be
    /// positive.
    pub fn new(
        channels: Vec<ChannelCalibration>,
        sample_rate_hz: f64,
        p0: f64,
        step_budget_ms: f64,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Parameter("a config needs at least one channel"));
        }
        for (pos, ch) in channels.iter().enumerate() {
            ch.validate()?;
            if ch.index != pos {
                return Err(Error::Parameter("channel indices must match their order"));
            }
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Parameter("sample_rate_hz must be positive"));
        }
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::Parameter("p0 must be positive"));
        }
        if !(step_budget_ms.is_finite() && step_budget_ms >= 0.0) {
            return Err(Error::Parameter("step_budget_ms must be non-negative"));
        }
        Ok(SystemConfig {
            channels,
            sample_rate_hz,
            p0,
            step_budget_ms,
        })
    }

    /// A configuration with the default rate, covariance scale, and budget.
    pub fn with_channels(channels: Vec<ChannelCalibration>) -> Result<Self> {
        SystemConfig::new(
            channels,
            DEFAULT_SAMPLE_RATE_HZ,
            DEFAULT_P0,
            DEFAULT_STEP_BUDGET_MS,
        )
    }

    pub fn channels(&self) -> &[ChannelCalibration] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn step_budget_ms(&self) -> f64 {
        self.step_budget_ms
    }
}

/// The shipped 18-channel configuration: the default measurement-variance
/// diagonal with unit process covariance at 1000 Hz.
pub fn default_config_18() -> SystemConfig {
    let channels = DEFAULT_R_18
        .iter()
        .enumerate()
        .map(|(i, &r)| ChannelCalibration {
            index: i,
            label: alloc::format!("ch{i}"),
            r_var: r,
            q_scale: 1.0,
        })
        .collect();
    SystemConfig::with_channels(channels).expect("the shipped defaults are valid")
}

/// Estimates per-channel measurement variance from a stationary capture.
///
/// Without detrending this is the unbiased sample variance of each column.
/// With `detrend` the variance of the first differences is halved instead,
/// which cancels slow drift at the cost of needing one extra row. Channels
/// whose estimate falls below [`R_FLOOR`] are floored to it.
///
/// The trace must have been captured with the sensors held stationary;
/// the estimator cannot tell motion from noise.
///
/// # Errors
/// Needs at least two rows, or three when detrending.
pub fn estimate_r(trace: &Trace, detrend: bool) -> Result<Vec<f64>> {
    let needed = if detrend { 3 } else { 2 };
    if trace.rows() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: trace.rows(),
        });
    }
    let mut estimates = Vec::with_capacity(trace.channels());
    for ch in 0..trace.channels() {
        let col: Vec<f64> = trace.column(ch).collect();
        let var = if detrend {
            let diffs: Vec<f64> = col.windows(2).map(|w| w[1] - w[0]).collect();
            stats::normality_stats(&diffs)?.variance / 2.0
        } else {
            stats::normality_stats(&col)?.variance
        };
        estimates.push(var.max(R_FLOOR));
    }
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{gaussian_stream, UniformSource};
    use proptest::prelude::*;

    #[test]
    fn default_config_matches_shipped_diagonal() {
        let cfg = default_config_18();
        assert_eq!(cfg.n_channels(), 18);
        assert_eq!(cfg.sample_rate_hz(), 1000.0);
        assert_eq!(cfg.p0(), 100.0);
        assert_eq!(cfg.channels()[0].r_var, 21.18);
        assert_eq!(cfg.channels()[10].r_var, 47.19);
        assert_eq!(cfg.channels()[17].r_var, 31.49);
        for (i, ch) in cfg.channels().iter().enumerate() {
            assert_eq!(ch.index, i);
            assert_eq!(ch.q_scale, 1.0);
            assert_eq!(ch.r_var, DEFAULT_R_18[i]);
        }
    }

    #[test]
    fn config_validation_rejects_bad_entries() {
        assert!(ChannelCalibration::new(0, String::new(), -1.0, 1.0).is_err());
        assert!(ChannelCalibration::new(0, String::new(), 1.0, 0.0).is_err());
        assert!(SystemConfig::with_channels(Vec::new()).is_err());

        let out_of_order = alloc::vec![ChannelCalibration::new(1, String::new(), 1.0, 1.0).unwrap()];
        assert!(SystemConfig::with_channels(out_of_order).is_err());

        let ch = alloc::vec![ChannelCalibration::new(0, String::new(), 1.0, 1.0).unwrap()];
        assert!(SystemConfig::new(ch.clone(), 0.0, 100.0, 1.0).is_err());
        assert!(SystemConfig::new(ch, 1000.0, 0.0, 1.0).is_err());
    }

    fn column_trace(values: &[f64]) -> Trace {
        let mut t = Trace::with_channels(1).unwrap();
        for (i, &v) in values.iter().enumerate() {
            t.push_row(i as f64, &[v]).unwrap();
        }
        t
    }

    #[test]
    fn estimate_r_floors_constant_columns() {
        let t = column_trace(&[512.0; 100]);
        let est = estimate_r(&t, false).unwrap();
        assert_eq!(est, alloc::vec![R_FLOOR]);
        let est = estimate_r(&t, true).unwrap();
        assert_eq!(est, alloc::vec![R_FLOOR]);
    }

    #[test]
    fn estimate_r_alternating_column() {
        // 0, 2, 0, 2, ... over 1000 rows: the unbiased variance is
        // 1000/999, just over 1.
        let values: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }).collect();
        let est = estimate_r(&column_trace(&values), false).unwrap();
        assert!((est[0] - 1000.0 / 999.0).abs() < 1e-12, "got {}", est[0]);
    }

    #[test]
    fn estimate_r_recovers_synthetic_noise() {
        let sigma2 = 21.18f64;
        let noise = gaussian_stream(
            &mut UniformSource::new(5),
            100_000,
            512.0,
            sigma2.sqrt(),
        )
        .unwrap();
        let est = estimate_r(&column_trace(&noise), false).unwrap();
        assert!(
            (est[0] - sigma2).abs() / sigma2 < 0.03,
            "estimate {} target {sigma2}",
            est[0]
        );
    }

    #[test]
    fn estimate_r_detrend_cancels_drift() {
        // A ramp plus noise: the plain estimate absorbs the drift spread,
        // the detrended estimate recovers the noise variance.
        let sigma2 = 4.0f64;
        let noise = gaussian_stream(&mut UniformSource::new(6), 50_000, 0.0, sigma2.sqrt()).unwrap();
        let values: Vec<f64> = noise
            .iter()
            .enumerate()
            .map(|(i, &n)| i as f64 * 0.01 + n)
            .collect();
        let t = column_trace(&values);
        let plain = estimate_r(&t, false).unwrap()[0];
        let detrended = estimate_r(&t, true).unwrap()[0];
        assert!((detrended - sigma2).abs() / sigma2 < 0.05, "detrended {detrended}");
        assert!(plain > 10.0 * sigma2, "plain {plain}");
    }

    #[test]
    fn estimate_r_requires_enough_rows() {
        let one = column_trace(&[1.0]);
        assert!(matches!(
            estimate_r(&one, false),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
        let two = column_trace(&[1.0, 2.0]);
        assert!(estimate_r(&two, false).is_ok());
        assert!(matches!(
            estimate_r(&two, true),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
    }

    proptest! {
        // Scaling a column by c scales its variance estimate by c^2.
        #[test]
        fn estimate_r_is_scale_equivariant(c in 0.5f64..50.0, seed in any::<u64>()) {
            let base = gaussian_stream(&mut UniformSource::new(seed), 200, 0.0, 3.0).unwrap();
            let scaled: Vec<f64> = base.iter().map(|&x| x * c).collect();
            let a = estimate_r(&column_trace(&base), false).unwrap()[0];
            let b = estimate_r(&column_trace(&scaled), false).unwrap()[0];
            prop_assert!((b - c * c * a).abs() <= 1e-9 * b.max(a));
        }
    }
}
