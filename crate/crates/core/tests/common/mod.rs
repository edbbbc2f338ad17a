//! Independent oracles and fixtures shared by the integration tests. Nothing
//! here calls into the crate's numerical routines beyond constructors.

#![allow(dead_code)]

use hilmod::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `‖z^n‖²` in `L²_{a,α}(𝔻)` from the Beta integral,
/// `(α+1) B(n+1, α+1) = Γ(n+1)Γ(α+2)/Γ(n+α+2)`.
pub fn bergman_norm2(alpha: f64, n: u32) -> f64 {
    (ln_gamma(f64::from(n) + 1.0) + ln_gamma(alpha + 2.0) - ln_gamma(f64::from(n) + alpha + 2.0))
        .exp()
}

/// Stirling series for `ln Γ(x)`, `x > 0`, shifted up for accuracy.
pub fn ln_gamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    acc + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// The entry `(0,0)` of the curvature of the `m = 2` power frame of the
/// Bergman space, from the rational metric `(1+r)/(1−r)²` in `r = |ω|²`
/// evaluated in closed form by hand.
pub fn bergman_m2_entry00(r: f64) -> f64 {
    -(3.0 + 2.0 * r + 3.0 * r * r) / (1.0 - r * r).powi(2)
}

pub fn bergman_m2_entry11(r: f64) -> f64 {
    -2.0 / (1.0 - r).powi(2)
}

/// Curvature of `g = (1 − r)^{−p}` by hand: `−p/(1−r)²`.
pub fn closed_curvature(p: f64, r: f64) -> f64 {
    -p / (1.0 - r).powi(2)
}

/// Points on a polar grid with `|ω| ≤ radius`.
pub fn polar_grid(radius: f64, rings: usize, spokes: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0)];
    for i in 1..=rings {
        let rho = radius * i as f64 / rings as f64;
        for j in 0..spokes {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / spokes as f64;
            out.push(C64::from_polar(rho, t));
        }
    }
    out
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Largest singular value through the power method on `A*A`, kept
/// independent of the library's SVD.
pub fn power_norm(a: &DMatrix<C64>) -> f64 {
    let ata = a.adjoint() * a;
    let mut v = DMatrix::from_element(a.ncols(), 1, c(1.0, 0.3));
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w = &ata * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        lambda = n;
        v = w / c(n, 0.0);
    }
    lambda.sqrt()
}

/// A random contraction of norm at most `1`, sometimes exactly `1`.
pub fn random_contraction(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    let a = random_complex_matrix(rng, d, d);
    let n = a.clone().svd(false, false).singular_values.max();
    let scale = if rng.gen_bool(0.3) {
        1.0
    } else {
        rng.gen_range(1.0..2.0)
    };
    a / c(n * scale, 0.0)
}

/// A unitary from the QR factor of a random matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    random_complex_matrix(rng, d, d).qr().q()
}

/// A point `|z| ≤ radius` drawn uniformly in area.
pub fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let rho = radius * rng.gen_range(0.0f64..1.0).sqrt();
    C64::from_polar(rho, rng.gen_range(0.0..2.0 * std::f64::consts::PI))
}

/// Monomial count `#{α ∈ ℤⁿ≥0 : |α| < k}` = `C(n+k−1, n)`.
pub fn lattice_count(n: u64, k: u64) -> u64 {
    let mut r = 1u64;
    for i in 0..n {
        r = r * (k - 1 + n - i) / (i + 1);
    }
    r
}
