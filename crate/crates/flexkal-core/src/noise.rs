//! Seeded Gaussian sample generation.
//!
//! Two generators are provided: the trigonometric Box-Muller transform over
//! a uniform source, and a Galton-board model that accumulates fair coin
//! flips into a binomial bin index. Both are fully deterministic per seed.

use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::math;

/// 2^-64, for mapping a full 64-bit draw onto (0, 1].
const U64_SCALE: f64 = 1.0 / 18_446_744_073_709_551_616.0;

/// Mixing constant for deriving independent per-stream seeds.
const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// A seeded generator of uniform values in the half-open interval (0, 1].
///
/// The underlying generator is xoshiro256++ with a period of 2^256 - 1; a
/// 64-bit draw `k` is mapped to `(k + 1) / 2^64`, which can never produce
/// zero, so a logarithm of the output is always defined.
#[derive(Debug, Clone)]
pub struct UniformSource {
    seed: u64,
    rng: Xoshiro256PlusPlus,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        UniformSource {
            seed,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// A source for parallel stream `stream` derived from a shared seed.
    ///
    /// Streams are separated by mixing the stream index into the seed, so
    /// `with_stream(seed, 0)` differs from `with_stream(seed, 1)` while both
    /// remain reproducible from `seed` alone.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        UniformSource::new(seed ^ stream.wrapping_mul(STREAM_MIX))
    }

    /// The seed this source was created with (after stream mixing).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The next uniform value in (0, 1].
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() as f64 + 1.0) * U64_SCALE
    }

    /// A fair coin: true when a uniform draw exceeds one half.
    pub fn fair_coin(&mut self) -> bool {
        self.next_uniform() > 0.5
    }
}

/// Maps two uniform variates to two independent standard normal variates:
/// `z0 = sqrt(-2 ln u1) cos(2 pi u2)` and `z1` with the sine instead.
///
/// # Errors
/// `u1` must lie in (0, 1] so the logarithm is defined, and `u2` in [0, 1].
pub fn box_muller_pair(u1: f64, u2: f64) -> Result<(f64, f64)> {
    if !(u1 > 0.0 && u1 <= 1.0) {
        return Err(Error::Domain("u1 must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&u2) {
        return Err(Error::Domain("u2 must lie in [0, 1]"));
    }
    let radius = math::sqrt(-2.0 * math::ln(u1));
    let angle = 2.0 * core::f64::consts::PI * u2;
    Ok((radius * math::cos(angle), radius * math::sin(angle)))
}

/// Draws `count` Gaussian samples with the given mean and standard
/// deviation.
///
/// Uniform draws are consumed two at a time and both halves of each
/// Box-Muller pair are used before new uniforms are drawn. An odd `count`
/// discards the final pair's second half; every call starts with a fresh
/// pair, so the mapping from source state to output is reproducible.
///
/// # Errors
/// The standard deviation must be non-negative and finite, the mean finite.
pub fn gaussian_stream(
    source: &mut UniformSource,
    count: usize,
    mean: f64,
    std: f64,
) -> Result<Vec<f64>> {
    if !mean.is_finite() {
        return Err(Error::Parameter("mean must be finite"));
    }
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::Parameter(
            "standard deviation must be non-negative and finite",
        ));
    }
    let mut samples = Vec::with_capacity(count);
    while samples.len() < count {
        let u1 = source.next_uniform();
        let u2 = source.next_uniform();
        let (z0, z1) = box_muller_pair(u1, u2)?;
        samples.push(mean + std * z0);
        if samples.len() < count {
            samples.push(mean + std * z1);
        }
    }
    Ok(samples)
}

/// Pin-row count of a Galton board.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaltonConfig {
    rows: u32,
}

impl GaltonConfig {
    /// # Errors
    /// A board needs at least one pin row.
    pub fn new(rows: u32) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Parameter("a Galton board needs at least one row"));
        }
        Ok(GaltonConfig { rows })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }
}

/// Drops one ball: each pin row bounces it right on a fair coin, and the
/// returned bin index is the number of rightward bounces, in `[0, rows]`.
pub fn galton_sample(source: &mut UniformSource, cfg: &GaltonConfig) -> u32 {
    let mut bin = 0;
    for _ in 0..cfg.rows() {
        if source.fair_coin() {
            bin += 1;
        }
    }
    bin
}

/// Standardizes a bin index by the binomial moments: mean `rows / 2` and
/// variance `rows / 4`.
pub fn standardize_bin(bin: u32, rows: u32) -> f64 {
    let n = rows as f64;
    (bin as f64 - n / 2.0) / math::sqrt(n / 4.0)
}

/// Drops one ball and standardizes its bin, giving an approximately
/// standard normal sample.
pub fn galton_standardized(source: &mut UniformSource, cfg: &GaltonConfig) -> f64 {
    standardize_bin(galton_sample(source, cfg), cfg.rows())
}
