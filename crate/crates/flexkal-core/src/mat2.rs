//! Small fixed-size helpers for the 2x2 covariance algebra.
//!
//! Everything in the filter works on 2x2 matrices and length-2 vectors, so
//! the operations are written out directly instead of pulling in a general
//! linear algebra dependency.

use crate::math;

/// A 2x2 matrix in row-major order.
pub type Mat2 = [[f64; 2]; 2];

/// The 2x2 identity matrix.
pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// The 2x2 zero matrix.
pub const ZERO: Mat2 = [[0.0, 0.0], [0.0, 0.0]];

/// Matrix product `a * b`.
pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Element-wise sum `a + b`.
pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

pub fn scale(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

/// Replaces the off-diagonal pair by its average, forcing exact symmetry.
pub fn symmetrize(m: &Mat2) -> Mat2 {
    let off = 0.5 * (m[0][1] + m[1][0]);
    [[m[0][0], off], [off, m[1][1]]]
}

/// Largest absolute element-wise difference between two matrices.
pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let d = (a[i][j] - b[i][j]).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigenvalues of a symmetric 2x2 matrix, smallest first.
///
/// Uses the closed form with the off-diagonal taken from `m[0][1]`; callers
/// are expected to pass an (at least numerically) symmetric matrix.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let mid = 0.5 * (m[0][0] + m[1][1]);
    let half_gap = 0.5 * (m[0][0] - m[1][1]);
    let disc = math::sqrt(half_gap * half_gap + m[0][1] * m[0][1]);
    (mid - disc, mid + disc)
}

pub fn is_finite(m: &Mat2) -> bool {
    m[0][0].is_finite() && m[0][1].is_finite() && m[1][0].is_finite() && m[1][1].is_finite()
}
