//! Synthetic sensor simulation: a clean trajectory plus seeded Gaussian
//! measurement noise, standing in for a live glove stream.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::noise::{gaussian_stream, UniformSource};
use crate::trace::Trace;

/// The clean motion a simulated sensor follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    /// Holds one value.
    Constant { level: f64 },
    /// `offset + amplitude * sin(2 pi row / period_rows)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        period_rows: u32,
    },
    /// A Gaussian random walk clamped to `[min, max]`.
    RandomWalk {
        start: f64,
        step_std: f64,
        min: f64,
        max: f64,
    },
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TrajectorySpec::Constant { level } => {
                if !level.is_finite() {
                    return Err(Error::Parameter("constant level must be finite"));
                }
            }
            TrajectorySpec::Sinusoid {
                offset,
                amplitude,
                period_rows,
            } => {
                if !(offset.is_finite() && amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::Parameter(
                        "sinusoid offset and amplitude must be finite, amplitude non-negative",
                    ));
                }
                if period_rows == 0 {
                    return Err(Error::Parameter("sinusoid period must be at least one row"));
                }
            }
            TrajectorySpec::RandomWalk {
                start,
                step_std,
                min,
                max,
            } => {
                if !(start.is_finite() && step_std.is_finite() && min.is_finite() && max.is_finite())
                {
                    return Err(Error::Parameter("random walk parameters must be finite"));
                }
                if step_std < 0.0 {
                    return Err(Error::Parameter("random walk step_std must be non-negative"));
                }
                if !(min <= start && start <= max) {
                    return Err(Error::Parameter(
                        "random walk start must lie within [min, max]",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The clean trajectory values for `rows` steps. The walk variant draws
    /// its increments from `source`.
    fn generate(&self, rows: usize, source: &mut UniformSource) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(rows);
        match *self {
            TrajectorySpec::Constant { level } => {
                out.resize(rows, level);
            }
            TrajectorySpec::Sinusoid {
                offset,
                amplitude,
                period_rows,
            } => {
                let period = period_rows as f64;
                for i in 0..rows {
                    let phase = 2.0 * core::f64::consts::PI * (i as f64) / period;
                    out.push(offset + amplitude * math::sin(phase));
                }
            }
            TrajectorySpec::RandomWalk {
                start,
                step_std,
                min,
                max,
            } => {
                let steps = gaussian_stream(source, rows.saturating_sub(1), 0.0, step_std)?;
                let mut x = start;
                out.push(x);
                for &dx in &steps {
                    x = (x + dx).clamp(min, max);
                    out.push(x);
                }
                out.truncate(rows);
            }
        }
        Ok(out)
    }
}

/// Synthesizes a noisy sensor trace and its clean reference.
///
/// All channels follow the same trajectory; channel `c` adds Gaussian noise
/// with variance `sigma2[c]` from its own deterministic stream, so the
/// whole output is a function of `seed` alone. Row `i` is stamped at
/// `i * period_ms`. The clean reference makes error-versus-truth metrics
/// possible, which a live sensor rig cannot provide.
///
/// # Errors
/// `spec` must validate, every variance must be non-negative and finite,
/// and the sample period must be positive.
pub fn simulate_sensor(
    spec: &TrajectorySpec,
    sigma2: &[f64],
    seed: u64,
    rows: usize,
    period_ms: f64,
) -> Result<(Trace, Trace)> {
    spec.validate()?;
    if sigma2.is_empty() {
        return Err(Error::Parameter("at least one channel variance is required"));
    }
    if sigma2.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(Error::Parameter(
            "channel variances must be non-negative and finite",
        ));
    }
    if !(period_ms.is_finite() && period_ms > 0.0) {
        return Err(Error::Parameter("sample period must be positive"));
    }

    let channels = sigma2.len();
    // Stream 0 drives the trajectory; stream c + 1 drives channel c's noise.
    let mut trajectory_source = UniformSource::with_stream(seed, 0);
    let clean_values = spec.generate(rows, &mut trajectory_source)?;

    let noise_columns: Vec<Vec<f64>> = sigma2
        .iter()
        .enumerate()
        .map(|(c, &var)| {
            let mut src = UniformSource::with_stream(seed, c as u64 + 1);
            gaussian_stream(&mut src, rows, 0.0, math::sqrt(var))
        })
        .collect::<Result<_>>()?;

    let mut noisy = Trace::with_channels(channels)?;
    let mut clean = Trace::with_channels(channels)?;
    let mut noisy_row = alloc::vec![0.0; channels];
    let mut clean_row = alloc::vec![0.0; channels];
    for i in 0..rows {
        let t = i as f64 * period_ms;
        for c in 0..channels {
            clean_row[c] = clean_values[i];
            noisy_row[c] = clean_values[i] + noise_columns[c][i];
        }
        noisy.push_row(t, &noisy_row)?;
        clean.push_row(t, &clean_row)?;
    }
    Ok((noisy, clean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normality_stats;

    #[test]
    fn constant_without_noise_repeats_the_level() {
        let spec = TrajectorySpec::Constant { level: 100.0 };
        let (noisy, clean) = simulate_sensor(&spec, &[0.0], 1, 5, 1.0).unwrap();
        assert_eq!(noisy.rows(), 5);
        for i in 0..5 {
            assert_eq!(noisy.row(i), &[100.0]);
            assert_eq!(clean.row(i), &[100.0]);
            assert_eq!(noisy.t(i), i as f64);
        }
    }

    #[test]
    fn zero_amplitude_sinusoid_is_constant() {
        let spec = TrajectorySpec::Sinusoid {
            offset: 512.0,
            amplitude: 0.0,
            period_rows: 100,
        };
        let (_, clean) = simulate_sensor(&spec, &[0.0], 1, 10, 1.0).unwrap();
        for i in 0..10 {
            assert_eq!(clean.row(i), &[512.0]);
        }
    }

    #[test]
    fn noise_variance_matches_request() {
        let spec = TrajectorySpec::Constant { level: 0.0 };
        let (noisy, _) = simulate_sensor(&spec, &[21.18], 77, 100_000, 1.0).unwrap();
        let col: Vec<f64> = noisy.column(0).collect();
        let stats = normality_stats(&col).unwrap();
        assert!(
            (stats.variance - 21.18).abs() / 21.18 < 0.03,
            "variance {}",
            stats.variance
        );
    }

    #[test]
    fn channels_get_independent_noise() {
        let spec = TrajectorySpec::Constant { level: 0.0 };
        let (noisy, _) = simulate_sensor(&spec, &[1.0, 1.0], 3, 1000, 1.0).unwrap();
        let a: Vec<f64> = noisy.column(0).collect();
        let b: Vec<f64> = noisy.column(1).collect();
        assert_ne!(a, b);
        // Correlation should be near zero for independent streams.
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot / 1000.0).abs() < 0.2);
    }

    #[test]
    fn same_seed_reproduces_the_trace() {
        let spec = TrajectorySpec::Sinusoid {
            offset: 512.0,
            amplitude: 200.0,
            period_rows: 3000,
        };
        let (a, _) = simulate_sensor(&spec, &[21.18], 7, 500, 1.0).unwrap();
        let (b, _) = simulate_sensor(&spec, &[21.18], 7, 500, 1.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn random_walk_respects_bounds() {
        let spec = TrajectorySpec::RandomWalk {
            start: 0.0,
            step_std: 10.0,
            min: -5.0,
            max: 5.0,
        };
        let (_, clean) = simulate_sensor(&spec, &[0.0], 9, 2000, 1.0).unwrap();
        for v in clean.column(0) {
            assert!((-5.0..=5.0).contains(&v));
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(TrajectorySpec::Constant { level: f64::NAN }.validate().is_err());
        assert!(TrajectorySpec::Sinusoid {
            offset: 0.0,
            amplitude: -1.0,
            period_rows: 10
        }
        .validate()
        .is_err());
        assert!(TrajectorySpec::Sinusoid {
            offset: 0.0,
            amplitude: 1.0,
            period_rows: 0
        }
        .validate()
        .is_err());
        assert!(TrajectorySpec::RandomWalk {
            start: 10.0,
            step_std: 1.0,
            min: -5.0,
            max: 5.0
        }
        .validate()
        .is_err());

        let spec = TrajectorySpec::Constant { level: 0.0 };
        assert!(simulate_sensor(&spec, &[], 1, 10, 1.0).is_err());
        assert!(simulate_sensor(&spec, &[-1.0], 1, 10, 1.0).is_err());
        assert!(simulate_sensor(&spec, &[1.0], 1, 10, 0.0).is_err());
    }
}
