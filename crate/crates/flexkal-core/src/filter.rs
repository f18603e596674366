//! Kalman predict/update recursion for one channel, plus the decoupled
//! multi-channel filter used on whole traces.
//!
//! The gain is formed from the prior covariance, which is the standard
//! optimal pairing with the `(I - KH) P` covariance update used here. The
//! covariance is re-symmetrized after every predict and update so that
//! floating-point drift cannot accumulate over long runs.
//!
//! Because every shipped configuration uses a per-channel measurement and a
//! per-channel process covariance, an n-channel filter is realized as n
//! independent two-state filters. That keeps the innovation inverse a scalar
//! division, which is what makes the per-sample latency budget attainable.

use alloc::vec::Vec;

use crate::calib::SystemConfig;
use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};
use crate::model::{KinematicModel, NoiseModel, StateVector};
use crate::trace::Trace;

/// Default initial covariance scale: diffuse enough to trust early
/// measurements, small enough to stay well conditioned.
pub const DEFAULT_P0: f64 = 100.0;

/// Posterior filter state of one channel after `step` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    /// Posterior state estimate.
    pub x_hat: StateVector,
    /// Posterior error covariance, kept symmetric.
    pub p: Mat2,
    /// Gain applied by the most recent update.
    pub k_gain: [f64; 2],
    /// Number of measurement updates absorbed so far.
    pub step: u64,
}

/// Prediction result: the prior estimate before a measurement arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior {
    pub x: StateVector,
    pub p: Mat2,
    /// Update counter carried over from the predicting state.
    pub step: u64,
}

/// Projects a posterior state one step forward through the motion model.
///
/// Returns the prior estimate `x = A x_hat + B u` and prior covariance
/// `P = A P A' + Q`, symmetrized.
///
/// # Errors
/// Rejects a non-finite control input or a corrupted (non-finite) state.
pub fn predict(
    state: &FilterState,
    model: &KinematicModel,
    noise: &NoiseModel,
    u: f64,
) -> Result<Prior> {
    if !u.is_finite() {
        return Err(Error::ModelInput("control input must be finite"));
    }
    if !state.x_hat.is_finite() || !mat2::is_finite(&state.p) {
        return Err(Error::ModelInput("filter state entries must be finite"));
    }
    let a = model.a();
    let b = model.b();
    let x = StateVector {
        q: a[0][0] * state.x_hat.q + a[0][1] * state.x_hat.w + b[0] * u,
        w: a[1][0] * state.x_hat.q + a[1][1] * state.x_hat.w + b[1] * u,
    };
    let apa = mat2::mul(&mat2::mul(a, &state.p), &mat2::transpose(a));
    let p = mat2::symmetrize(&mat2::add(&apa, noise.q_cov()));
    Ok(Prior {
        x,
        p,
        step: state.step,
    })
}

/// Computes the gain `K = P H' / (H P H' + r)` from a prior covariance.
///
/// # Errors
/// Returns a singular-innovation error when `H P H' + r` is not strictly
/// positive, which indicates a corrupted covariance.
pub fn gain(p_prior: &Mat2, model: &KinematicModel, noise: &NoiseModel) -> Result<[f64; 2]> {
    let h = model.h();
    let ph = [
        p_prior[0][0] * h[0] + p_prior[0][1] * h[1],
        p_prior[1][0] * h[0] + p_prior[1][1] * h[1],
    ];
    let s = h[0] * ph[0] + h[1] * ph[1] + noise.r_var();
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::SingularInnovation { s });
    }
    Ok([ph[0] / s, ph[1] / s])
}

/// Folds a measurement into a prior, producing the next posterior state.
///
/// Applies `x_hat = x + K (z - H x)` and `P = (I - K H) P`, symmetrized,
/// and increments the update counter carried by the prior.
///
/// # Errors
/// Rejects a non-finite measurement; callers that want to tolerate dropped
/// samples should use [`ChannelFilter`] with the skip-update policy instead.
pub fn update(prior: &Prior, z: f64, model: &KinematicModel, noise: &NoiseModel) -> Result<FilterState> {
    if !z.is_finite() {
        return Err(Error::Measurement { value: z });
    }
    let k = gain(&prior.p, model, noise)?;
    let h = model.h();
    let innovation = z - (h[0] * prior.x.q + h[1] * prior.x.w);
    let x_hat = StateVector {
        q: prior.x.q + k[0] * innovation,
        w: prior.x.w + k[1] * innovation,
    };
    let ikh = [
        [1.0 - k[0] * h[0], -k[0] * h[1]],
        [-k[1] * h[0], 1.0 - k[1] * h[1]],
    ];
    let p = mat2::symmetrize(&mat2::mul(&ikh, &prior.p));
    Ok(FilterState {
        x_hat,
        p,
        k_gain: k,
        step: prior.step + 1,
    })
}

/// One full predict + update cycle.
pub fn step(
    state: &FilterState,
    model: &KinematicModel,
    noise: &NoiseModel,
    z: f64,
    u: f64,
) -> Result<FilterState> {
    let prior = predict(state, model, noise, u)?;
    update(&prior, z, model, noise)
}

/// Seeds a filter from its first measurement.
///
/// The angle starts at `z0`, the rate at zero, and the covariance at
/// `p0 * I`.
pub fn init_filter(z0: f64, p0: f64) -> Result<FilterState> {
    if !z0.is_finite() {
        return Err(Error::Measurement { value: z0 });
    }
    if !(p0.is_finite() && p0 >= 0.0) {
        return Err(Error::Parameter(
            "initial covariance scale must be non-negative and finite",
        ));
    }
    Ok(FilterState {
        x_hat: StateVector { q: z0, w: 0.0 },
        p: mat2::scale(&mat2::IDENTITY, p0),
        k_gain: [0.0, 0.0],
        step: 0,
    })
}

/// Converged gain and prior covariance of the recursion's fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub k_gain: [f64; 2],
    pub p_prior: Mat2,
    pub iterations: usize,
}

/// Iterates the covariance recursion to its fixed point.
///
/// Starting from the prior that follows a perfectly known initial state
/// (`P = Q`), repeats `P <- A ((I - KH) P) A' + Q` until the largest
/// element change drops below `tol`.
///
/// # Errors
/// Rejects a non-positive tolerance, and reports divergence when `max_iter`
/// passes are not enough to converge.
pub fn steady_state(
    model: &KinematicModel,
    noise: &NoiseModel,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive and finite"));
    }
    let a = model.a();
    let at = mat2::transpose(a);
    let h = model.h();
    let mut p_prior = *noise.q_cov();
    for iterations in 1..=max_iter {
        let k = gain(&p_prior, model, noise)?;
        let ikh = [
            [1.0 - k[0] * h[0], -k[0] * h[1]],
            [-k[1] * h[0], 1.0 - k[1] * h[1]],
        ];
        let p_post = mat2::symmetrize(&mat2::mul(&ikh, &p_prior));
        let next = mat2::symmetrize(&mat2::add(&mat2::mul(&mat2::mul(a, &p_post), &at), noise.q_cov()));
        let delta = mat2::max_abs_diff(&next, &p_prior);
        p_prior = next;
        if delta < tol {
            let k_gain = gain(&p_prior, model, noise)?;
            return Ok(SteadyState {
                k_gain,
                p_prior,
                iterations,
            });
        }
    }
    Err(Error::Divergence {
        iterations: max_iter,
    })
}

/// What a filter does when a measurement arrives non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurementPolicy {
    /// Advance through the prediction only and keep going. The default:
    /// live sensor streams drop samples.
    #[default]
    SkipUpdate,
    /// Refuse the sample with an error.
    HardError,
}

/// Control input applied at every step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ControlPolicy {
    /// No acceleration input. The default; sensor replay has none.
    #[default]
    Zero,
    /// The same constant input on every channel and step.
    Constant(f64),
}

impl ControlPolicy {
    pub fn control(&self, _channel: usize) -> f64 {
        match self {
            ControlPolicy::Zero => 0.0,
            ControlPolicy::Constant(u) => *u,
        }
    }
}

/// A self-initializing single-channel filter.
///
/// The first finite measurement seeds the state via [`init_filter`] and is
/// returned unchanged; every later measurement runs one [`step`].
#[derive(Debug, Clone)]
pub struct ChannelFilter {
    model: KinematicModel,
    noise: NoiseModel,
    p0: f64,
    policy: MeasurementPolicy,
    state: Option<FilterState>,
}

impl ChannelFilter {
    pub fn new(
        model: KinematicModel,
        noise: NoiseModel,
        p0: f64,
        policy: MeasurementPolicy,
    ) -> Result<Self> {
        if !(p0.is_finite() && p0 >= 0.0) {
            return Err(Error::Parameter(
                "initial covariance scale must be non-negative and finite",
            ));
        }
        Ok(ChannelFilter {
            model,
            noise,
            p0,
            policy,
            state: None,
        })
    }

    /// Feeds one measurement through the filter and returns the filtered
    /// angle estimate.
    ///
    /// A non-finite `z` either skips the measurement update (advancing the
    /// prediction alone) or fails hard, depending on the configured policy.
    /// Before initialization a skipped sample is passed through unchanged.
    pub fn process(&mut self, z: f64, u: f64) -> Result<f64> {
        match self.state {
            None => {
                if z.is_finite() {
                    let st = init_filter(z, self.p0)?;
                    self.state = Some(st);
                    Ok(st.x_hat.q)
                } else {
                    match self.policy {
                        MeasurementPolicy::SkipUpdate => Ok(z),
                        MeasurementPolicy::HardError => Err(Error::Measurement { value: z }),
                    }
                }
            }
            Some(st) => {
                if z.is_finite() {
                    let next = step(&st, &self.model, &self.noise, z, u)?;
                    self.state = Some(next);
                    Ok(next.x_hat.q)
                } else {
                    match self.policy {
                        MeasurementPolicy::SkipUpdate => {
                            let prior = predict(&st, &self.model, &self.noise, u)?;
                            let next = FilterState {
                                x_hat: prior.x,
                                p: prior.p,
                                k_gain: st.k_gain,
                                step: st.step + 1,
                            };
                            self.state = Some(next);
                            Ok(next.x_hat.q)
                        }
                        MeasurementPolicy::HardError => Err(Error::Measurement { value: z }),
                    }
                }
            }
        }
    }

    pub fn model(&self) -> &KinematicModel {
        &self.model
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Current state; `None` until the first finite measurement arrives.
    pub fn state(&self) -> Option<&FilterState> {
        self.state.as_ref()
    }

    /// Drops the accumulated state so the next measurement re-seeds it.
    pub fn reset(&mut self) {
        self.state = None;
    }
}

/// An ordered bank of decoupled per-channel filters.
#[derive(Debug, Clone)]
pub struct MultiChannelFilter {
    channels: Vec<ChannelFilter>,
}

impl MultiChannelFilter {
    /// Builds a filter bank; all channels must share the same step period.
    pub fn new(channels: Vec<ChannelFilter>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Parameter("a filter needs at least one channel"));
        }
        let dt = channels[0].model().dt();
        if channels.iter().any(|c| c.model().dt() != dt) {
            return Err(Error::Parameter("all channels must share the same dt"));
        }
        Ok(MultiChannelFilter { channels })
    }

    /// Builds one constant-acceleration channel per calibration entry.
    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        let model = KinematicModel::new(
            *KinematicModel::constant_acceleration().a(),
            *KinematicModel::constant_acceleration().b(),
            *KinematicModel::constant_acceleration().h(),
            1.0 / config.sample_rate_hz(),
        )?;
        let mut channels = Vec::with_capacity(config.channels().len());
        for ch in config.channels() {
            let noise = NoiseModel::scaled_q(ch.q_scale, ch.r_var)?;
            channels.push(ChannelFilter::new(
                model,
                noise,
                config.p0(),
                MeasurementPolicy::SkipUpdate,
            )?);
        }
        MultiChannelFilter::new(channels)
    }

    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn dt(&self) -> f64 {
        self.channels[0].model().dt()
    }

    pub fn channels(&self) -> &[ChannelFilter] {
        &self.channels
    }

    /// Steps every channel once, writing filtered angles into `out`.
    pub fn step_row_into(&mut self, row: &[f64], u_policy: ControlPolicy, out: &mut [f64]) -> Result<()> {
        if row.len() != self.channels.len() {
            return Err(Error::Shape {
                expected: self.channels.len(),
                got: row.len(),
            });
        }
        if out.len() != self.channels.len() {
            return Err(Error::Shape {
                expected: self.channels.len(),
                got: out.len(),
            });
        }
        for (ch, (&z, slot)) in row.iter().zip(out.iter_mut()).enumerate() {
            *slot = self.channels[ch].process(z, u_policy.control(ch))?;
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        for ch in &mut self.channels {
            ch.reset();
        }
    }
}

/// Runs a whole trace through a filter bank.
///
/// Returns the filtered trace (same shape, same timestamps) and, per
/// channel, the state after every row.
///
/// # Errors
/// Fails if the trace column count does not match the filter.
pub fn filter_trace(
    trace: &Trace,
    filter: &mut MultiChannelFilter,
    u_policy: ControlPolicy,
) -> Result<(Trace, Vec<Vec<FilterState>>)> {
    if trace.channels() != filter.n() {
        return Err(Error::Shape {
            expected: filter.n(),
            got: trace.channels(),
        });
    }
    let mut out = Trace::new(trace.labels().to_vec())?;
    let mut history: Vec<Vec<FilterState>> = (0..filter.n())
        .map(|_| Vec::with_capacity(trace.rows()))
        .collect();
    let mut row_out = alloc::vec![0.0; filter.n()];
    for i in 0..trace.rows() {
        filter.step_row_into(trace.row(i), u_policy, &mut row_out)?;
        for (ch, hist) in history.iter_mut().enumerate() {
            let st = filter.channels()[ch]
                .state()
                .copied()
                .ok_or(Error::ModelInput("channel state missing after a step"))?;
            hist.push(st);
        }
        out.push_row(trace.t(i), &row_out)?;
    }
    Ok((out, history))
}
