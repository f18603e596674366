//! Trace execution against the per-step latency budget.
//!
//! [`run_offline`] pulls rows as fast as the filter can take them and is the
//! throughput path; [`run_realtime`] replays rows on a fixed-period schedule
//! from a producer thread, measuring each step from the moment its sample is
//! released to the moment the motor command is ready. Both produce identical
//! filtered values; scheduling affects timing fields only.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use flexkal_core::{quantize_command, ControlPolicy, MotorCommand, MultiChannelFilter, Trace};

use crate::error::Result;

/// Whole-loop reaction time of the original hand prosthesis, reported for
/// context alongside the much tighter per-step budget.
pub const EVENT_TIME_REFERENCE_MS: f64 = 45.0;

/// In-flight samples the real-time hand-off absorbs before counting the
/// excess as backlog. Samples past this depth are still processed (values
/// must not depend on scheduling), they are just reported as late arrivals
/// the consumer could not keep up with.
pub const HANDOFF_CAPACITY: usize = 1024;

/// Per-step processing-time statistics against the step budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub samples_processed: usize,
    pub channels: usize,
    pub budget_ms: f64,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
    /// Steps whose processing time exceeded the budget.
    pub violations: usize,
    /// Samples released while more than [`HANDOFF_CAPACITY`] were in flight.
    /// Always zero in offline runs.
    pub backlogged: usize,
    pub throughput_sps: f64,
}

/// Everything one pass over a trace produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub filtered: Trace,
    pub commands: Vec<MotorCommand>,
    pub report: LatencyReport,
}

fn check_budget(budget_ms: f64) -> Result<()> {
    if !budget_ms.is_finite() || budget_ms < 0.0 {
        return Err(flexkal_core::Error::Parameter("step budget must be finite and non-negative").into());
    }
    Ok(())
}

fn step_row(
    filter: &mut MultiChannelFilter,
    row: &[f64],
    out_row: &mut [f64],
) -> Result<MotorCommand> {
    filter.step_row_into(row, ControlPolicy::Zero, out_row)?;
    let mut values = Vec::with_capacity(out_row.len());
    for &v in out_row.iter() {
        values.push(quantize_command(v)?);
    }
    Ok(MotorCommand { values })
}

fn build_report(
    durations: &mut [Duration],
    channels: usize,
    budget_ms: f64,
    wall: Duration,
    backlogged: usize,
) -> LatencyReport {
    let n = durations.len();
    if n == 0 {
        return LatencyReport {
            samples_processed: 0,
            channels,
            budget_ms,
            mean_ms: 0.0,
            p50_ms: 0.0,
            p99_ms: 0.0,
            max_ms: 0.0,
            violations: 0,
            backlogged,
            throughput_sps: 0.0,
        };
    }
    let budget = Duration::from_secs_f64(budget_ms / 1e3);
    let violations = durations.iter().filter(|d| **d > budget).count();
    durations.sort_unstable();
    let rank = |q: f64| durations[((q * n as f64).ceil() as usize).max(1) - 1];
    let total: Duration = durations.iter().sum();
    LatencyReport {
        samples_processed: n,
        channels,
        budget_ms,
        mean_ms: total.as_secs_f64() * 1e3 / n as f64,
        p50_ms: rank(0.5).as_secs_f64() * 1e3,
        p99_ms: rank(0.99).as_secs_f64() * 1e3,
        max_ms: durations[n - 1].as_secs_f64() * 1e3,
        violations,
        backlogged,
        throughput_sps: n as f64 / wall.as_secs_f64(),
    }
}

/// Runs a trace through the filter bank at full speed.
///
/// Each step is timed from picking up the row to having its quantized motor
/// command ready. Filtered values are bit-identical across repeated runs;
/// only the timing fields vary.
pub fn run_offline(
    trace: &Trace,
    filter: &mut MultiChannelFilter,
    budget_ms: f64,
) -> Result<RunOutput> {
    check_budget(budget_ms)?;
    let n = filter.n();
    let mut filtered = Trace::new(trace.labels().to_vec())?;
    let mut commands = Vec::with_capacity(trace.rows());
    let mut durations = Vec::with_capacity(trace.rows());
    let mut out_row = vec![0.0; n];

    let wall_start = Instant::now();
    for i in 0..trace.rows() {
        let started = Instant::now();
        let command = step_row(filter, trace.row(i), &mut out_row)?;
        durations.push(started.elapsed());
        filtered.push_row(trace.t(i), &out_row)?;
        commands.push(command);
    }
    let wall = wall_start.elapsed();

    let report = build_report(&mut durations, n, budget_ms, wall, 0);
    Ok(RunOutput {
        filtered,
        commands,
        report,
    })
}

fn pace_until(target: Instant) {
    loop {
        let now = Instant::now();
        if now >= target {
            return;
        }
        let remaining = target - now;
        if remaining > Duration::from_micros(300) {
            thread::sleep(remaining - Duration::from_micros(200));
        } else {
            std::hint::spin_loop();
        }
    }
}

/// Replays a trace at `rate_hz` and filters it as samples arrive.
///
/// A producer thread releases row indices at fixed-period targets; the
/// consumer (this thread) filters each row and stamps its latency from the
/// release instant. The hand-off never drops data, so the filtered values
/// equal [`run_offline`]'s exactly; a consumer that falls more than
/// [`HANDOFF_CAPACITY`] samples behind shows up in `report.backlogged`.
pub fn run_realtime(
    trace: &Trace,
    filter: &mut MultiChannelFilter,
    rate_hz: f64,
    budget_ms: f64,
) -> Result<RunOutput> {
    check_budget(budget_ms)?;
    if !rate_hz.is_finite() || rate_hz <= 0.0 {
        return Err(flexkal_core::Error::Parameter("rate must be positive and finite").into());
    }
    let n = filter.n();
    if trace.channels() != n {
        return Err(flexkal_core::Error::Shape {
            expected: n,
            got: trace.channels(),
        }
        .into());
    }

    let rows = trace.rows();
    let period = Duration::from_secs_f64(1.0 / rate_hz);
    let depth = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Instant)>();

    let mut filtered = Trace::new(trace.labels().to_vec())?;
    let mut commands = Vec::with_capacity(rows);
    let mut durations = Vec::with_capacity(rows);
    let mut out_row = vec![0.0; n];
    let mut step_result: Result<()> = Ok(());

    let wall_start = Instant::now();
    let backlogged = thread::scope(|s| {
        let producer = s.spawn(|| {
            let mut backlogged = 0usize;
            let t0 = Instant::now();
            for i in 0..rows {
                pace_until(t0 + period.mul_f64((i + 1) as f64));
                if depth.fetch_add(1, Ordering::AcqRel) >= HANDOFF_CAPACITY {
                    backlogged += 1;
                }
                if tx.send((i, Instant::now())).is_err() {
                    break;
                }
            }
            backlogged
        });

        for (i, released) in rx.iter().take(rows) {
            let outcome = step_row(filter, trace.row(i), &mut out_row);
            durations.push(released.elapsed());
            depth.fetch_sub(1, Ordering::AcqRel);
            match outcome.and_then(|command| {
                filtered.push_row(trace.t(i), &out_row)?;
                commands.push(command);
                Ok(())
            }) {
                Ok(()) => {}
                Err(e) => {
                    step_result = Err(e);
                    break;
                }
            }
        }
        drop(rx);
        producer.join().expect("producer thread panicked")
    });
    let wall = wall_start.elapsed();
    step_result?;

    let report = build_report(&mut durations, n, budget_ms, wall, backlogged);
    Ok(RunOutput {
        filtered,
        commands,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use flexkal_core::{default_config_18, simulate_sensor, SystemConfig, TrajectorySpec};

    fn small_filter() -> MultiChannelFilter {
        let config = SystemConfig::with_channels(vec![flexkal_core::ChannelCalibration::new(
            0,
            String::new(),
            21.18,
            1.0,
        )
        .unwrap()])
        .unwrap();
        MultiChannelFilter::from_config(&config).unwrap()
    }

    fn small_trace(rows: usize) -> Trace {
        let spec = TrajectorySpec::Sinusoid {
            offset: 512.0,
            amplitude: 200.0,
            period_rows: 500,
        };
        simulate_sensor(&spec, &[21.18], 3, rows, 1.0).unwrap().0
    }

    #[test]
    fn offline_commands_quantize_filtered_values() {
        let trace = small_trace(200);
        let out = run_offline(&trace, &mut small_filter(), 1.0).unwrap();
        assert_eq!(out.filtered.rows(), 200);
        assert_eq!(out.commands.len(), 200);
        for (i, cmd) in out.commands.iter().enumerate() {
            let expected = quantize_command(out.filtered.row(i)[0]).unwrap();
            assert_eq!(cmd.values, vec![expected]);
        }
    }

    #[test]
    fn offline_is_deterministic_across_runs() {
        let trace = small_trace(500);
        let a = run_offline(&trace, &mut small_filter(), 1.0).unwrap();
        let b = run_offline(&trace, &mut small_filter(), 1.0).unwrap();
        for (x, y) in a.filtered.values().iter().zip(b.filtered.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.commands, b.commands);
    }

    #[test]
    fn zero_budget_flags_every_step() {
        let trace = small_trace(100);
        let out = run_offline(&trace, &mut small_filter(), 0.0).unwrap();
        assert_eq!(out.report.violations, out.report.samples_processed);
    }

    #[test]
    fn report_percentiles_are_ordered() {
        let trace = small_trace(1000);
        let report = run_offline(&trace, &mut small_filter(), 1.0).unwrap().report;
        assert_eq!(report.samples_processed, 1000);
        assert!(report.p50_ms <= report.p99_ms);
        assert!(report.p99_ms <= report.max_ms);
        assert!(report.violations <= report.samples_processed);
        assert!(report.throughput_sps > 0.0);
    }

    #[test]
    fn empty_trace_yields_an_empty_report() {
        let trace = Trace::with_channels(1).unwrap();
        let out = run_offline(&trace, &mut small_filter(), 1.0).unwrap();
        assert_eq!(out.report.samples_processed, 0);
        assert_eq!(out.report.max_ms, 0.0);
        assert_eq!(out.report.throughput_sps, 0.0);
        assert_eq!(out.filtered.rows(), 0);
    }

    #[test]
    fn realtime_values_match_offline_exactly() {
        let trace = small_trace(1500);
        let offline = run_offline(&trace, &mut small_filter(), 1.0).unwrap();
        let realtime = run_realtime(&trace, &mut small_filter(), 20_000.0, 1.0).unwrap();
        assert_eq!(offline.filtered.rows(), realtime.filtered.rows());
        for (x, y) in offline
            .filtered
            .values()
            .iter()
            .zip(realtime.filtered.values())
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(offline.commands, realtime.commands);
        assert_eq!(realtime.report.backlogged, 0);
    }

    #[test]
    fn realtime_pacing_holds_the_requested_rate() {
        let trace = small_trace(400);
        let started = Instant::now();
        let out = run_realtime(&trace, &mut small_filter(), 4000.0, 1.0).unwrap();
        let elapsed = started.elapsed();
        assert!(elapsed >= Duration::from_millis(100), "{elapsed:?}");
        assert!(out.report.throughput_sps <= 4100.0);
    }

    #[test]
    fn realtime_rejects_bad_rates() {
        let trace = small_trace(10);
        assert!(run_realtime(&trace, &mut small_filter(), 0.0, 1.0).is_err());
        assert!(run_realtime(&trace, &mut small_filter(), f64::NAN, 1.0).is_err());
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let trace = small_trace(10);
        let mut filter = MultiChannelFilter::from_config(&default_config_18()).unwrap();
        assert!(run_offline(&trace, &mut filter, 1.0).is_err());
        assert!(run_realtime(&trace, &mut filter, 1000.0, 1.0).is_err());
    }

    #[test]
    fn negative_budget_is_rejected() {
        let trace = small_trace(10);
        assert!(run_offline(&trace, &mut small_filter(), -1.0).is_err());
        assert!(run_offline(&trace, &mut small_filter(), f64::INFINITY).is_err());
    }
}
