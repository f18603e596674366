//! Structured-text rendering of latency reports.
//!
//! One `key: value` per line with a fixed key set and order, so shell tools
//! and tests can grep a field without a parser. Timing fields are printed
//! with microsecond-scale precision; counters verbatim.

use std::fmt::Write as _;

use flexkal_core::Trace;

use crate::runner::{LatencyReport, EVENT_TIME_REFERENCE_MS};

/// Renders a report as stable `key: value` lines.
pub fn render_report(report: &LatencyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "samples_processed: {}", report.samples_processed);
    let _ = writeln!(out, "channels: {}", report.channels);
    let _ = writeln!(out, "budget_ms: {}", report.budget_ms);
    let _ = writeln!(out, "mean_ms: {:.6}", report.mean_ms);
    let _ = writeln!(out, "p50_ms: {:.6}", report.p50_ms);
    let _ = writeln!(out, "p99_ms: {:.6}", report.p99_ms);
    let _ = writeln!(out, "max_ms: {:.6}", report.max_ms);
    let _ = writeln!(out, "violations: {}", report.violations);
    let _ = writeln!(out, "backlogged: {}", report.backlogged);
    let _ = writeln!(out, "throughput_sps: {:.1}", report.throughput_sps);
    let _ = writeln!(out, "event_time_reference_ms: {}", EVENT_TIME_REFERENCE_MS);
    out
}

fn fnv1a64(hash: u64, bytes: &[u8]) -> u64 {
    let mut h = hash;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

/// Order-sensitive digest of a trace's exact bit patterns. Two runs that
/// produced the same values, in the same order, hash identically.
pub fn trace_checksum(trace: &Trace) -> u64 {
    let mut h = FNV_OFFSET;
    for i in 0..trace.rows() {
        h = fnv1a64(h, &trace.t(i).to_le_bytes());
    }
    for v in trace.values() {
        h = fnv1a64(h, &v.to_le_bytes());
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> LatencyReport {
        LatencyReport {
            samples_processed: 94096,
            channels: 18,
            budget_ms: 1.0,
            mean_ms: 0.0021345,
            p50_ms: 0.0021,
            p99_ms: 0.0049,
            max_ms: 0.051,
            violations: 0,
            backlogged: 0,
            throughput_sps: 412345.125,
        }
    }

    #[test]
    fn renders_every_field_once() {
        let text = render_report(&sample_report());
        for key in [
            "samples_processed:",
            "channels:",
            "budget_ms:",
            "mean_ms:",
            "p50_ms:",
            "p99_ms:",
            "max_ms:",
            "violations:",
            "backlogged:",
            "throughput_sps:",
            "event_time_reference_ms:",
        ] {
            assert_eq!(text.matches(key).count(), 1, "{key} in {text}");
        }
    }

    #[test]
    fn renders_values_in_stable_form() {
        let text = render_report(&sample_report());
        assert!(text.contains("samples_processed: 94096\n"), "{text}");
        assert!(text.contains("budget_ms: 1\n"), "{text}");
        assert!(text.contains("mean_ms: 0.002135\n"), "{text}");
        assert!(text.contains("throughput_sps: 412345.1\n"), "{text}");
        assert!(text.contains("event_time_reference_ms: 45\n"), "{text}");
    }

    #[test]
    fn fnv_matches_reference_vectors() {
        assert_eq!(FNV_OFFSET, 0xcbf29ce484222325);
        assert_eq!(fnv1a64(FNV_OFFSET, b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(FNV_OFFSET, b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn checksum_tracks_content() {
        let mut a = Trace::with_channels(2).unwrap();
        a.push_row(0.0, &[1.0, 2.0]).unwrap();
        a.push_row(1.0, &[3.0, 4.0]).unwrap();
        let mut b = Trace::with_channels(2).unwrap();
        b.push_row(0.0, &[1.0, 2.0]).unwrap();
        b.push_row(1.0, &[3.0, 4.0]).unwrap();
        assert_eq!(trace_checksum(&a), trace_checksum(&b));

        let mut c = Trace::with_channels(2).unwrap();
        c.push_row(0.0, &[1.0, 2.0]).unwrap();
        c.push_row(1.0, &[3.0, 4.5]).unwrap();
        assert_ne!(trace_checksum(&a), trace_checksum(&c));
    }
}
