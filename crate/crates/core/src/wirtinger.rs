//! Wirtinger derivatives by central differences on the real and imaginary
//! axes, with one level of Richardson extrapolation.
//!
//! For `ω = x + iy`: `∂_ω = (∂_x − i∂_y)/2`, `∂_ω̄ = (∂_x + i∂_y)/2` and
//! `∂_ω∂_ω̄ = (∂_xx + ∂_yy)/4`.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::numeric::C64;

/// Default finite-difference step, relative to the unit domain radius.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `∂_ω∂_ω̄ f` of a real function by the 4-neighbour stencil with step `h`.
/// Second order: the error is `h²/48 (f_xxxx + f_yyyy) + O(h⁴)`.
pub fn mixed_second_order<F>(f: &F, w: C64, h: f64) -> Result<f64>
where
    F: Fn(C64) -> Result<f64>,
{
    let c = f(w)?;
    let e = f(w + C64::new(h, 0.0))?;
    let west = f(w - C64::new(h, 0.0))?;
    let n = f(w + C64::new(0.0, h))?;
    let s = f(w - C64::new(0.0, h))?;
    Ok(((e + west - 2.0 * c) + (n + s - 2.0 * c)) / (4.0 * h * h))
}

/// Richardson combination for a second-order scheme evaluated at `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// `∂_ω∂_ω̄ f` with one Richardson level; also returns `|fine − coarse|/3`,
/// the standard estimate of the error left in the fine second-order value.
pub fn mixed<F>(f: &F, w: C64, h: f64) -> Result<(f64, f64)>
where
    F: Fn(C64) -> Result<f64>,
{
    let coarse = mixed_second_order(f, w, h)?;
    let fine = mixed_second_order(f, w, h / 2.0)?;
    Ok((richardson(coarse, fine), (fine - coarse).abs() / 3.0))
}

/// Value and Wirtinger derivatives of a matrix-valued function at a point.
#[derive(Debug, Clone)]
pub struct MatrixJet {
    pub value: DMatrix<C64>,
    /// `∂_ω F`
    pub d: DMatrix<C64>,
    /// `∂_ω̄ F`
    pub dbar: DMatrix<C64>,
    /// `∂_ω̄ ∂_ω F`
    pub d_dbar: DMatrix<C64>,
}

struct Stencil {
    d: DMatrix<C64>,
    dbar: DMatrix<C64>,
    d_dbar: DMatrix<C64>,
}

fn stencil<F>(f: &F, w: C64, center: &DMatrix<C64>, h: f64) -> Result<Stencil>
where
    F: Fn(C64) -> Result<DMatrix<C64>>,
{
    let e = f(w + C64::new(h, 0.0))?;
    let west = f(w - C64::new(h, 0.0))?;
    let n = f(w + C64::new(0.0, h))?;
    let s = f(w - C64::new(0.0, h))?;
    let two_h = C64::new(2.0 * h, 0.0);
    let fx = (&e - &west) / two_h;
    let fy = (&n - &s) / two_h;
    let i = C64::new(0.0, 1.0);
    let half = C64::new(0.5, 0.0);
    let lap = (&e + &west + &n + &s - center * C64::new(4.0, 0.0)) / C64::new(h * h, 0.0);
    Ok(Stencil {
        d: (&fx - &fy * i) * half,
        dbar: (&fx + &fy * i) * half,
        d_dbar: lap * C64::new(0.25, 0.0),
    })
}

/// Matrix jet from central differences at `h` and `h/2`, Richardson-combined.
pub fn matrix_jet<F>(f: &F, w: C64, h: f64) -> Result<MatrixJet>
where
    F: Fn(C64) -> Result<DMatrix<C64>>,
{
    let value = f(w)?;
    let coarse = stencil(f, w, &value, h)?;
    let fine = stencil(f, w, &value, h / 2.0)?;
    let r = |c: &DMatrix<C64>, f: &DMatrix<C64>| (f * C64::new(4.0, 0.0) - c) / C64::new(3.0, 0.0);
    Ok(MatrixJet {
        d: r(&coarse.d, &fine.d),
        dbar: r(&coarse.dbar, &fine.dbar),
        d_dbar: r(&coarse.d_dbar, &fine.d_dbar),
        value,
    })
}
