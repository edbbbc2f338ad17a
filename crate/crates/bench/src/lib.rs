//! Fixtures shared by the benchmarks.

use hilmod::C64;
use nalgebra::DMatrix;

/// `n` points on a spiral inside the disk of radius `radius`.
pub fn spiral(n: usize, radius: f64) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let t = (i + 1) as f64 / n as f64;
            C64::from_polar(radius * t, 2.399963 * i as f64)
        })
        .collect()
}

/// The nilpotent Jordan block of size `d`.
pub fn jordan_block(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `diag(s, …, s) + N/2`, a non-normal strict contraction for `|s| < 1/2`.
pub fn damped_block(d: usize, s: f64) -> DMatrix<C64> {
    jordan_block(d) * C64::new(0.5, 0.0) + DMatrix::identity(d, d) * C64::new(s, 0.0)
}
