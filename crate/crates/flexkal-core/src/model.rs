//! State-space model types for a single sensor channel.
//!
//! Each channel tracks a joint angle and its per-step rate with a
//! constant-acceleration motion model: the rate integrates an (optional)
//! acceleration input, the angle integrates the rate, and only the angle is
//! measured.

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};

/// How far apart the off-diagonal entries of a covariance may drift before
/// the matrix is rejected as asymmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// How far below zero an eigenvalue may sit before the matrix is rejected
/// as not positive semi-definite.
pub const PSD_TOL: f64 = -1e-12;

/// Estimated state of one joint: angle and per-step angular rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    /// Joint angle, in sensor units.
    pub q: f64,
    /// Joint angular rate, in sensor units per step.
    pub w: f64,
}

impl StateVector {
    pub fn new(q: f64, w: f64) -> Result<Self> {
        let sv = StateVector { q, w };
        if !sv.is_finite() {
            return Err(Error::ModelInput("state entries must be finite"));
        }
        Ok(sv)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.w.is_finite()
    }
}

/// Discrete-time motion model of one joint.
///
/// `a` advances the state one step, `b` injects a scalar acceleration input,
/// and `h` maps the state to the measured quantity. The defaults discretize
/// constant acceleration at one sample per step; `dt` records the physical
/// step period in seconds but does not rescale the matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicModel {
    a: Mat2,
    b: [f64; 2],
    h: [f64; 2],
    dt: f64,
}

/// Default physical step period: one sample at 1000 Hz.
pub const DEFAULT_DT: f64 = 1e-3;

impl KinematicModel {
    /// The unit-step constant-acceleration model: the angle gains one rate
    /// unit per step and only the angle is observed.
    pub fn constant_acceleration() -> Self {
        KinematicModel {
            a: [[1.0, 1.0], [0.0, 1.0]],
            b: [0.5, 1.0],
            h: [1.0, 0.0],
            dt: DEFAULT_DT,
        }
    }

    /// Builds a model from explicit matrices.
    ///
    /// # Errors
    /// Rejects non-finite entries and a non-positive step period.
    pub fn new(a: Mat2, b: [f64; 2], h: [f64; 2], dt: f64) -> Result<Self> {
        if !mat2::is_finite(&a) {
            return Err(Error::ModelInput("transition matrix must be finite"));
        }
        if !(b[0].is_finite() && b[1].is_finite()) {
            return Err(Error::ModelInput("control column must be finite"));
        }
        if !(h[0].is_finite() && h[1].is_finite()) {
            return Err(Error::ModelInput("measurement row must be finite"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::ModelInput("step period must be positive"));
        }
        Ok(KinematicModel { a, b, h, dt })
    }

    pub fn a(&self) -> &Mat2 {
        &self.a
    }

    pub fn b(&self) -> &[f64; 2] {
        &self.b
    }

    pub fn h(&self) -> &[f64; 2] {
        &self.h
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl Default for KinematicModel {
    fn default() -> Self {
        KinematicModel::constant_acceleration()
    }
}

/// Noise description of one channel: process covariance and measurement
/// variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    q_cov: Mat2,
    r_var: f64,
}

impl NoiseModel {
    /// Builds a noise model, validating the covariance invariants.
    ///
    /// # Errors
    /// Rejects an asymmetric or indefinite `q_cov` and a measurement
    /// variance that is not strictly positive.
    pub fn new(q_cov: Mat2, r_var: f64) -> Result<Self> {
        if !mat2::is_finite(&q_cov) {
            return Err(Error::ModelInput("process covariance must be finite"));
        }
        if (q_cov[0][1] - q_cov[1][0]).abs() > SYMMETRY_TOL {
            return Err(Error::ModelInput("process covariance must be symmetric"));
        }
        let (lo, _) = mat2::sym_eigenvalues(&q_cov);
        if lo < PSD_TOL {
            return Err(Error::ModelInput(
                "process covariance must be positive semi-definite",
            ));
        }
        if !(r_var.is_finite() && r_var > 0.0) {
            return Err(Error::ModelInput(
                "measurement variance must be positive and finite",
            ));
        }
        Ok(NoiseModel { q_cov, r_var })
    }

    /// Unit process covariance with the given measurement variance.
    pub fn unit_q(r_var: f64) -> Result<Self> {
        NoiseModel::new(mat2::IDENTITY, r_var)
    }

    /// Process covariance `q_scale * I` with the given measurement variance.
    pub fn scaled_q(q_scale: f64, r_var: f64) -> Result<Self> {
        if !(q_scale.is_finite() && q_scale > 0.0) {
            return Err(Error::ModelInput("q_scale must be positive and finite"));
        }
        NoiseModel::new(mat2::scale(&mat2::IDENTITY, q_scale), r_var)
    }

    pub fn q_cov(&self) -> &Mat2 {
        &self.q_cov
    }

    pub fn r_var(&self) -> f64 {
        self.r_var
    }
}
