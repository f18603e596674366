//! Multi-channel Kalman filtering for noisy joint-angle sensor streams.
//!
//! Each sensor channel is tracked by a two-state constant-acceleration
//! filter; a bank of them smooths whole multi-channel traces. Around the
//! filter sit seeded Gaussian noise generators (Box-Muller and a Galton
//! board), per-channel noise calibration with shipped 18-channel defaults,
//! synthetic sensor simulation, and the trace and command types shared with
//! the `flexkal` companion crate, which adds file formats, the real-time
//! runner, and the command-line front end.
//!
//! The crate is `no_std`-compatible: disable the default `std` feature and
//! enable `libm` instead. An allocator is required either way.
//!
//! ```
//! use flexkal_core::{filter, KinematicModel, NoiseModel};
//!
//! let model = KinematicModel::constant_acceleration();
//! let noise = NoiseModel::unit_q(21.18).unwrap();
//! let mut state = filter::init_filter(512.0, filter::DEFAULT_P0).unwrap();
//! for z in [511.2, 513.9, 512.4] {
//!     state = filter::step(&state, &model, &noise, z, 0.0).unwrap();
//! }
//! assert!((state.x_hat.q - 512.0).abs() < 5.0);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calib;
pub mod error;
pub mod filter;
pub mod mat2;
mod math;
pub mod model;
pub mod noise;
pub mod sim;
pub mod stats;
pub mod trace;

pub use calib::{default_config_18, estimate_r, ChannelCalibration, SystemConfig, DEFAULT_R_18, R_FLOOR};
pub use error::{Error, Result};
pub use filter::{
    filter_trace, gain, init_filter, predict, steady_state, step, update, ChannelFilter,
    ControlPolicy, FilterState, MeasurementPolicy, MultiChannelFilter, Prior, SteadyState,
};
pub use model::{KinematicModel, NoiseModel, StateVector};
pub use noise::{
    box_muller_pair, galton_sample, galton_standardized, gaussian_stream, standardize_bin,
    GaltonConfig, UniformSource,
};
pub use sim::{simulate_sensor, TrajectorySpec};
pub use stats::{histogram, normality_stats, Histogram, SampleStats};
pub use trace::{
    first_difference_variance, quantize_command, smoothness_metrics, MotorCommand, Sample,
    SmoothnessMetric, Trace,
};
