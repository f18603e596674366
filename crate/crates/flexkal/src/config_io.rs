//! TOML persistence for [`SystemConfig`].
//!
//! The on-disk schema is versioned. Unknown keys are hard errors rather than
//! silent drops: a typo like `q_scael` must not quietly fall back to the
//! default and change filter behavior.

use std::fs;
use std::path::Path;

use flexkal_core::{ChannelCalibration, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SCHEMA_VERSION: u32 = 1;

fn default_sample_rate() -> f64 {
    1000.0
}

fn default_p0() -> f64 {
    100.0
}

fn default_budget() -> f64 {
    1.0
}

fn default_q_scale() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: u32,
    #[serde(default = "default_sample_rate")]
    sample_rate_hz: f64,
    #[serde(default = "default_p0")]
    p0: f64,
    #[serde(default = "default_budget")]
    step_budget_ms: f64,
    channels: Vec<ChannelEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelEntry {
    index: usize,
    #[serde(default)]
    label: String,
    r_var: f64,
    #[serde(default = "default_q_scale")]
    q_scale: f64,
}

/// Loads and validates a configuration file.
///
/// # Errors
/// Rejects unreadable files, TOML syntax errors, unknown keys, unsupported
/// schema versions, and any value the core validation refuses (non-positive
/// variances, out-of-order channel indices, and so on).
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let text = fs::read_to_string(&path)?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| Error::Config(e.message().to_string()))?;
    if file.version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported config version {}, expected {SCHEMA_VERSION}",
            file.version
        )));
    }
    let mut channels = Vec::with_capacity(file.channels.len());
    for entry in file.channels {
        let calib = ChannelCalibration::new(entry.index, entry.label, entry.r_var, entry.q_scale)
            .map_err(|e| Error::Config(format!("channel {}: {e}", entry.index)))?;
        channels.push(calib);
    }
    SystemConfig::new(channels, file.sample_rate_hz, file.p0, file.step_budget_ms)
        .map_err(|e| Error::Config(e.to_string()))
}

/// Writes a configuration so that [`load_config`] reproduces it exactly.
pub fn save_config(config: &SystemConfig, path: impl AsRef<Path>) -> Result<()> {
    let file = ConfigFile {
        version: SCHEMA_VERSION,
        sample_rate_hz: config.sample_rate_hz(),
        p0: config.p0(),
        step_budget_ms: config.step_budget_ms(),
        channels: config
            .channels()
            .iter()
            .map(|c| ChannelEntry {
                index: c.index,
                label: c.label.clone(),
                r_var: c.r_var,
                q_scale: c.q_scale,
            })
            .collect(),
    };
    let text = toml::to_string_pretty(&file).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flexkal_core::default_config_18;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn round_trip_preserves_every_field() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        let config = SystemConfig::new(
            vec![
                ChannelCalibration::new(0, "thumb".to_string(), 21.18, 1.0).unwrap(),
                ChannelCalibration::new(1, String::new(), 6.05, 0.5).unwrap(),
            ],
            500.0,
            50.0,
            2.5,
        )
        .unwrap();
        save_config(&config, &path).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back.sample_rate_hz(), 500.0);
        assert_eq!(back.p0(), 50.0);
        assert_eq!(back.step_budget_ms(), 2.5);
        assert_eq!(back.n_channels(), 2);
        assert_eq!(back.channels()[0].label, "thumb");
        assert_eq!(back.channels()[1].r_var, 6.05);
        assert_eq!(back.channels()[1].q_scale, 0.5);
    }

    #[test]
    fn default_18_round_trips() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        let config = default_config_18();
        save_config(&config, &path).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back.n_channels(), 18);
        for (a, b) in config.channels().iter().zip(back.channels()) {
            assert_eq!(a.r_var.to_bits(), b.r_var.to_bits());
        }
    }

    #[test]
    fn optional_fields_take_defaults() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "version = 1\n\n[[channels]]\nindex = 0\nr_var = 4.0\n",
        )
        .unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(config.sample_rate_hz(), 1000.0);
        assert_eq!(config.p0(), 100.0);
        assert_eq!(config.step_budget_ms(), 1.0);
        assert_eq!(config.channels()[0].q_scale, 1.0);
        assert_eq!(config.channels()[0].label, "");
    }

    #[test]
    fn unknown_key_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "version = 1\nextra = 3\n\n[[channels]]\nindex = 0\nr_var = 4.0\n",
        )
        .unwrap();
        assert!(load_config(&path).is_err());
    }

    #[test]
    fn unknown_channel_key_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "version = 1\n\n[[channels]]\nindex = 0\nr_var = 4.0\nq_scael = 2.0\n",
        )
        .unwrap();
        assert!(load_config(&path).is_err());
    }

    #[test]
    fn wrong_version_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "version = 2\n\n[[channels]]\nindex = 0\nr_var = 4.0\n").unwrap();
        let msg = load_config(&path).unwrap_err().to_string();
        assert!(msg.contains("version"), "{msg}");
    }

    #[test]
    fn out_of_order_index_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "version = 1\n\n[[channels]]\nindex = 1\nr_var = 4.0\n",
        )
        .unwrap();
        assert!(load_config(&path).is_err());
    }

    #[test]
    fn negative_r_var_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "version = 1\n\n[[channels]]\nindex = 0\nr_var = -1.0\n",
        )
        .unwrap();
        assert!(load_config(&path).is_err());
    }
}
