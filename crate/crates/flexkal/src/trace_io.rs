//! Reading and writing the comma-separated trace format.
//!
//! The header is `t_ms,ch0,...,ch{n-1}`; a column may carry a label after a
//! colon, as in `ch3:index_mcp`. Each data row is a timestamp followed by
//! one decimal value per channel, written with at most 9 significant digits.
//! Reading a written file and writing it again reproduces the bytes exactly,
//! so repeated round trips are stable after the first generation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use flexkal_core::Trace;

use crate::error::{Error, Result};

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a trace file.
///
/// # Errors
/// Reports ragged rows, non-numeric or non-finite cells, malformed headers,
/// and non-increasing timestamps, each with its 1-based line number.
pub fn read_trace(path: impl AsRef<Path>) -> Result<Trace> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file, expected a header"))?;
    let labels = parse_header(header)?;
    let channels = labels.len();

    let mut trace = Trace::new(labels)?;
    let mut row = Vec::with_capacity(channels);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t_field = fields.next().unwrap_or("");
        let t_ms: f64 = t_field
            .parse()
            .map_err(|_| parse_error(line_no, format!("invalid timestamp {t_field:?}")))?;
        row.clear();
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(line_no, format!("invalid value {field:?}")))?;
            row.push(v);
        }
        if row.len() != channels {
            return Err(parse_error(
                line_no,
                format!("expected {channels} values, got {}", row.len()),
            ));
        }
        trace
            .push_row(t_ms, &row)
            .map_err(|e| parse_error(line_no, e.to_string()))?;
    }
    Ok(trace)
}

fn parse_header(header: &str) -> Result<Vec<String>> {
    let mut fields = header.split(',');
    match fields.next() {
        Some("t_ms") => {}
        other => {
            return Err(parse_error(
                1,
                format!("header must start with t_ms, got {other:?}"),
            ))
        }
    }
    let mut labels = Vec::new();
    for (i, field) in fields.enumerate() {
        let expected = format!("ch{i}");
        let label = match field.strip_prefix(expected.as_str()) {
            Some("") => String::new(),
            Some(rest) => match rest.strip_prefix(':') {
                Some(label) => label.to_string(),
                None => {
                    return Err(parse_error(
                        1,
                        format!(
                            "header column {} must be {expected} or {expected}:label",
                            i + 1
                        ),
                    ))
                }
            },
            None => {
                return Err(parse_error(
                    1,
                    format!("header column {} must be {expected}, got {field:?}", i + 1),
                ))
            }
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(parse_error(1, "header declares no channels"));
    }
    Ok(labels)
}

/// Formats a finite value with at most 9 significant digits, the file
/// format's stated precision. Plain notation inside [1e-4, 1e9), scientific
/// outside, trailing zeros trimmed either way.
pub(crate) fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs();
    if (1e-4..1e9).contains(&mag) {
        let prec = (8 - mag.log10().floor() as i32).max(0) as usize;
        let mut s = format!("{x:.prec$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let s = format!("{x:.8e}");
        match s.split_once('e') {
            Some((mant, exp)) => {
                let mant = mant.trim_end_matches('0').trim_end_matches('.');
                format!("{mant}e{exp}")
            }
            None => s,
        }
    }
}

/// Renders the header line for a label set, ready for rows to follow.
pub(crate) fn render_header(labels: &[String]) -> Result<String> {
    let mut out = String::from("t_ms");
    for (i, label) in labels.iter().enumerate() {
        if label.contains(',') {
            return Err(Error::Config(format!(
                "channel {i} label {label:?} contains a comma"
            )));
        }
        if label.is_empty() {
            let _ = write!(out, ",ch{i}");
        } else {
            let _ = write!(out, ",ch{i}:{label}");
        }
    }
    out.push('\n');
    Ok(out)
}

/// Writes a trace in the format accepted by [`read_trace`].
///
/// # Errors
/// Labels may not contain commas (they would corrupt the header).
pub fn write_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let mut out = render_header(trace.labels())?;
    for sample in trace.samples() {
        out.push_str(&format_value(sample.t_ms));
        for &v in sample.values {
            out.push(',');
            out.push_str(&format_value(v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flexkal_core::{simulate_sensor, TrajectorySpec, UniformSource};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn reads_a_minimal_file() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0,ch1\n0,1.5,2\n1,3,4.25\n").unwrap();
        let trace = read_trace(&path).unwrap();
        assert_eq!(trace.rows(), 2);
        assert_eq!(trace.channels(), 2);
        assert_eq!(trace.row(0), &[1.5, 2.0]);
        assert_eq!(trace.t(1), 1.0);
    }

    #[test]
    fn header_labels_after_colon() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0:thumb,ch1\n0,1,2\n").unwrap();
        let trace = read_trace(&path).unwrap();
        assert_eq!(trace.labels(), &["thumb".to_string(), String::new()]);
    }

    #[test]
    fn ragged_row_is_named_by_line() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0,ch1\n0,1,2\n1,3\n").unwrap();
        let err = read_trace(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 3:"), "{msg}");
        assert!(msg.contains("expected 2 values, got 1"), "{msg}");
    }

    #[test]
    fn non_numeric_cell_is_named_by_line() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0\n0,1\n1,abc\n").unwrap();
        let msg = read_trace(&path).unwrap_err().to_string();
        assert!(msg.starts_with("line 3:"), "{msg}");
    }

    #[test]
    fn non_increasing_timestamp_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0\n0,1\n0,2\n").unwrap();
        let msg = read_trace(&path).unwrap_err().to_string();
        assert!(msg.starts_with("line 3:"), "{msg}");
        assert!(msg.contains("timestamp"), "{msg}");
    }

    #[test]
    fn non_finite_value_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "t_ms,ch0\n0,inf\n").unwrap();
        let msg = read_trace(&path).unwrap_err().to_string();
        assert!(msg.starts_with("line 2:"), "{msg}");
    }

    #[test]
    fn bad_headers_are_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        for header in ["time,ch0", "t_ms", "t_ms,ch1", "t_ms,ch0x"] {
            std::fs::write(&path, format!("{header}\n")).unwrap();
            assert!(read_trace(&path).is_err(), "accepted header {header:?}");
        }
    }

    #[test]
    fn formats_common_values_plainly() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(512.0), "512");
        assert_eq!(format_value(-21.18), "-21.18");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(94095.0), "94095");
        assert_eq!(format_value(123456789.0), "123456789");
    }

    #[test]
    fn formats_extreme_magnitudes_in_scientific_notation() {
        assert_eq!(format_value(1.5e-7), "1.5e-7");
        assert_eq!(format_value(2.5e12), "2.5e12");
        let s = format_value(1e300);
        assert_eq!(s.parse::<f64>().unwrap(), 1e300);
    }

    #[test]
    fn formatted_values_keep_nine_digits_and_reach_a_fixed_point() {
        let mut src = UniformSource::new(99);
        for _ in 0..20_000 {
            let exp = (src.next_uniform() - 0.5) * 40.0;
            let x = (src.next_uniform() - 0.5) * 10f64.powf(exp);
            let s = format_value(x);
            let y: f64 = s.parse().unwrap();
            assert!(
                (y - x).abs() <= 5e-9 * x.abs(),
                "{x} -> {s} drifted to {y}"
            );
            assert_eq!(format_value(y), s, "not a fixed point for {x}");
        }
    }

    #[test]
    fn write_then_read_round_trips_within_format_precision() {
        let dir = tmp();
        let path = dir.path().join("t.csv");
        let spec = TrajectorySpec::Sinusoid {
            offset: 512.0,
            amplitude: 200.0,
            period_rows: 250,
        };
        let (noisy, _) = simulate_sensor(&spec, &[21.18, 6.05], 11, 1000, 1.0).unwrap();
        write_trace(&noisy, &path).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(noisy.rows(), back.rows());
        assert_eq!(noisy.labels(), back.labels());
        for (a, b) in noisy.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 5e-9 * a.abs(), "{a} vs {b}");
        }

        let second = dir.path().join("t2.csv");
        write_trace(&back, &second).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&second).unwrap()
        );
    }

    #[test]
    fn rejects_labels_with_commas() {
        let trace = Trace::new(vec!["a,b".to_string()]).unwrap();
        let dir = tmp();
        assert!(write_trace(&trace, dir.path().join("t.csv")).is_err());
    }
}
