//! Hermitian holomorphic bundle geometry over the disk: the metric `h`,
//! line-bundle curvature, Grammians of frames, curvature matrices and the
//! reducing-lattice verdict.
//!
//! Curvature follows the sign convention `K = −∂_ω̄(H⁻¹ ∂_ω H)`, which for a
//! line with metric `g` reduces to `K = −∂_ω∂_ω̄ log g`. With `r = |ω|²`
//! and `g` radial,
//!
//! ```text
//! K(ω) = −[ (log g)'(r) + r (log g)''(r) ]
//! ```
//!
//! so the Hardy metric `1/(1−r)` has `K = −1/(1−r)²`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{geometric_tail, KernelSpec, DEFAULT_MARGIN};
use crate::numeric::{generalized_hermitian_eigenvalues, CompensatedSum, C64};
use crate::shift::{restriction_shift, shift_kernel_metric};
use crate::wirtinger::{self, DEFAULT_STEP};

/// Terms per section used when none are given.
pub const DEFAULT_FRAME_TERMS: usize = 400;
/// Eigenvalues closer than this are treated as tied.
pub const EIGEN_RESOLUTION: f64 = 1e-6;
/// Relative tolerance on neglected series tails in metrics and Grammians.
pub const SERIES_TOLERANCE: f64 = 1e-12;

/// A radial metric `g(r)`, `r = |ω|²`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialMetric {
    Series(SeriesMetric),
    Closed(ClosedMetric),
}

/// `g(r) = Σ a_ℓ r^ℓ` from a coefficient prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMetric {
    coeffs: Vec<f64>,
    /// The prefix is the whole series.
    finite: bool,
    /// Largest coefficient ratio `a_{ℓ+1}/a_ℓ` over the second half of the
    /// prefix; the ratio-test certificate for convergence on `r < 1/ratio`.
    ratio: f64,
}

/// `g(r) = scale · (1 − r)^{−exponent}`; `exponent = 0` is the flat metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedMetric {
    pub exponent: f64,
    pub scale: f64,
}

impl RadialMetric {
    /// `1/(1−r)`, the Hardy kernel on the diagonal.
    pub fn hardy() -> Self {
        Self::Closed(ClosedMetric {
            exponent: 1.0,
            scale: 1.0,
        })
    }

    /// `(1−r)^{−2−α}`.
    pub fn weighted_bergman(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::InvalidArgument(format!("need α > −1, got {alpha}")));
        }
        Ok(Self::Closed(ClosedMetric {
            exponent: 2.0 + alpha,
            scale: 1.0,
        }))
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(
                "constant metric must be positive".into(),
            ));
        }
        Ok(Self::Closed(ClosedMetric {
            exponent: 0.0,
            scale: c,
        }))
    }

    /// Truncated power series with coefficients `a_ℓ ≥ 0`, `a_0 > 0`.
    pub fn series(coeffs: Vec<f64>) -> Result<Self> {
        Self::series_impl(coeffs, false)
    }

    /// An exact polynomial metric.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::series_impl(coeffs, true)
    }

    fn series_impl(coeffs: Vec<f64>, finite: bool) -> Result<Self> {
        if coeffs.first().is_none_or(|a| !(*a > 0.0)) {
            return Err(Error::InvalidArgument("metric series needs a_0 > 0".into()));
        }
        if coeffs.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument(
                "metric coefficients must be finite and non-negative".into(),
            ));
        }
        let start = coeffs.len() / 2;
        let mut ratio: f64 = 0.0;
        for l in start.max(1)..coeffs.len() {
            if coeffs[l - 1] > 0.0 {
                ratio = ratio.max(coeffs[l] / coeffs[l - 1]);
            }
        }
        Ok(Self::Series(SeriesMetric {
            coeffs,
            finite,
            ratio,
        }))
    }

    /// `c · g`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Series(s) => Self::Series(SeriesMetric {
                coeffs: s.coeffs.iter().map(|a| a * c).collect(),
                ..s.clone()
            }),
            Self::Closed(m) => Self::Closed(ClosedMetric {
                scale: m.scale * c,
                ..*m
            }),
        }
    }

    /// Radius of convergence in `r` certified by the stored ratio test.
    pub fn convergence_radius(&self) -> f64 {
        match self {
            Self::Series(s) if s.finite || s.ratio == 0.0 => f64::INFINITY,
            Self::Series(s) => 1.0 / s.ratio,
            Self::Closed(m) if m.exponent == 0.0 => f64::INFINITY,
            Self::Closed(_) => 1.0,
        }
    }

    /// Taylor coefficients of a closed-form metric.
    pub fn taylor_coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Series(s) => s.coeffs.iter().copied().take(n).collect(),
            Self::Closed(m) => {
                let mut out = Vec::with_capacity(n);
                let mut a = m.scale;
                for l in 0..n {
                    out.push(a);
                    a *= (l as f64 + m.exponent) / (l as f64 + 1.0);
                }
                out
            }
        }
    }

    /// `g(r)`.
    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r)?.0)
    }

    /// `(g, g', g'')` at `r`.
    pub fn jet(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..1.0).contains(&r) && !self.convergence_radius().is_infinite() {
            return Err(Error::Domain {
                norm: r.sqrt(),
                margin: 0.0,
            });
        }
        match self {
            Self::Closed(m) => {
                let p = m.exponent;
                let g = m.scale * (1.0 - r).powf(-p);
                Ok((
                    g,
                    p * g / (1.0 - r),
                    p * (p + 1.0) * g / ((1.0 - r) * (1.0 - r)),
                ))
            }
            Self::Series(s) => s.jet(r),
        }
    }
}

impl SeriesMetric {
    fn jet(&self, r: f64) -> Result<(f64, f64, f64)> {
        let mut g = CompensatedSum::new();
        let mut g1 = CompensatedSum::new();
        let mut g2 = CompensatedSum::new();
        let mut p = 1.0; // r^ℓ
        let mut p1 = 0.0; // r^{ℓ−1}
        let mut p2 = 0.0; // r^{ℓ−2}
        for (l, a) in self.coeffs.iter().enumerate() {
            let lf = l as f64;
            g.add(a * p);
            g1.add(lf * a * p1);
            g2.add(lf * (lf - 1.0) * a * p2);
            p2 = p1;
            p1 = p;
            p *= r;
        }
        let (g, g1, g2) = (g.value(), g1.value(), g2.value());
        let len = self.coeffs.len();
        if !self.finite && r > 0.0 && len >= 3 {
            let lf = len as f64;
            let last = self.coeffs[len - 1] * (lf - 1.0) * (lf - 2.0) * r.powi(len as i32 - 3);
            let q = self.ratio * r * (lf / (lf - 2.0)).powi(2);
            let bound = if q < 1.0 {
                last * q / (1.0 - q)
            } else {
                f64::INFINITY
            };
            let allowed = SERIES_TOLERANCE * g.max(g1.abs()).max(g2.abs());
            if bound > allowed {
                return Err(Error::Truncation {
                    terms: len,
                    bound,
                    tolerance: allowed,
                });
            }
        }
        Ok((g, g1, g2))
    }
}

/// How a curvature is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineMethod {
    /// Exact derivatives of the power series in `r`.
    Series,
    /// Wirtinger finite differences of `log g` with Richardson extrapolation.
    FiniteDifference,
    /// The closed-form curvature of a closed-form metric.
    ClosedForm,
}

fn check_disk(w: C64, reach: f64) -> Result<()> {
    let norm = w.norm() + reach;
    if norm > 1.0 - DEFAULT_MARGIN {
        return Err(Error::Domain {
            norm,
            margin: DEFAULT_MARGIN,
        });
    }
    Ok(())
}

fn curvature_from_jet(r: f64, (g, g1, g2): (f64, f64, f64)) -> f64 {
    let l1 = g1 / g;
    let l2 = g2 / g - l1 * l1;
    -(l1 + r * l2)
}

/// `K(ω) = −∂_ω∂_ω̄ log g(|ω|²)`.
pub fn line_curvature(g: &RadialMetric, w: C64, method: LineMethod) -> Result<f64> {
    line_curvature_with_step(g, w, method, DEFAULT_STEP)
}

pub fn line_curvature_with_step(
    g: &RadialMetric,
    w: C64,
    method: LineMethod,
    step: f64,
) -> Result<f64> {
    check_disk(w, 0.0)?;
    let r = w.norm_sqr();
    match method {
        LineMethod::ClosedForm => match g {
            RadialMetric::Closed(m) => Ok(-m.exponent / ((1.0 - r) * (1.0 - r))),
            RadialMetric::Series(_) => Err(Error::Method {
                method: "closed-form curvature",
                reason: "metric is given as a series".into(),
            }),
        },
        LineMethod::Series => match g {
            RadialMetric::Series(_) => Ok(curvature_from_jet(r, g.jet(r)?)),
            RadialMetric::Closed(m) => {
                let mut n = 128;
                loop {
                    let s = if m.exponent == 0.0 {
                        RadialMetric::polynomial(vec![m.scale])?
                    } else {
                        RadialMetric::series(g.taylor_coefficients(n))?
                    };
                    match s.jet(r) {
                        Ok(jet) => return Ok(curvature_from_jet(r, jet)),
                        Err(Error::Truncation { .. }) if n < 1 << 22 => n *= 2,
                        Err(e) => return Err(e),
                    }
                }
            }
        },
        LineMethod::FiniteDifference => fd_line_curvature(g, w, step, true).map(|(k, _)| k),
    }
}

/// Finite-difference curvature; with `richardson = false` the raw
/// second-order stencil at step `h` is returned. The second value is the
/// error estimate of the fine stencil (zero without Richardson).
pub fn fd_line_curvature(g: &RadialMetric, w: C64, h: f64, richardson: bool) -> Result<(f64, f64)> {
    if !(h > 1e-8) {
        return Err(Error::Method {
            method: "finite differences",
            reason: format!("step {h:e} underflows; use the series method"),
        });
    }
    if w.norm() + h > 1.0 - DEFAULT_MARGIN {
        return Err(Error::Method {
            method: "finite differences",
            reason: "stencil leaves the domain near the boundary; use the series method".into(),
        });
    }
    let f = |p: C64| -> Result<f64> { Ok(g.value(p.norm_sqr())?.ln()) };
    if richardson {
        let (v, est) = wirtinger::mixed(&f, w, h)?;
        Ok((-v, est))
    } else {
        Ok((-wirtinger::mixed_second_order(&f, w, h)?, 0.0))
    }
}

/// The Cowen–Douglas metric `h(ω) = (−K(ω))^{−1/2}` of a line.
pub fn metric_h(g: &RadialMetric, w: C64) -> Result<f64> {
    let method = match g {
        RadialMetric::Closed(_) => LineMethod::ClosedForm,
        RadialMetric::Series(_) => LineMethod::Series,
    };
    let k = line_curvature(g, w, method)?;
    if k >= 0.0 {
        return Err(Error::InvariantUndefined { curvature: k });
    }
    Ok((-k).powf(-0.5))
}

/// Coefficients of one section at `ω` with `terms` terms, as
/// `(ambient orthonormal index, coefficient)` pairs in generation order.
pub type SectionFn = dyn Fn(C64, usize) -> Result<Vec<(usize, C64)>> + Send + Sync;
type RadialFn = dyn Fn(usize) -> Result<Vec<RadialMetric>> + Send + Sync;

/// A section evaluator of a frame.
#[derive(Clone)]
pub struct Section {
    label: String,
    eval: Arc<SectionFn>,
    /// Consecutive terms grouped together when estimating the tail.
    block: usize,
    /// The coefficients are the whole vector, not a truncation.
    finite: bool,
}

impl Section {
    pub fn new(label: impl Into<String>, block: usize, eval: Arc<SectionFn>) -> Self {
        Self {
            label: label.into(),
            eval,
            block: block.max(1),
            finite: false,
        }
    }

    /// A section whose coefficient list is exact.
    pub fn finite(label: impl Into<String>, eval: Arc<SectionFn>) -> Self {
        Self {
            finite: true,
            ..Self::new(label, 1, eval)
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, w: C64, terms: usize) -> Result<Vec<(usize, C64)>> {
        (self.eval)(w, terms)
    }
}

impl std::fmt::Debug for Section {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Section")
            .field("label", &self.label)
            .finish()
    }
}

/// An ordered list of sections, optionally mixed by a constant matrix.
#[derive(Clone)]
pub struct Frame {
    sections: Vec<Section>,
    radial: Option<Arc<RadialFn>>,
    mixing: Option<DMatrix<C64>>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("sections", &self.sections)
            .field("radial", &self.radial.is_some())
            .field("mixing", &self.mixing)
            .finish()
    }
}

impl Frame {
    pub fn new(sections: Vec<Section>) -> Self {
        Self {
            sections,
            radial: None,
            mixing: None,
        }
    }

    /// Sections that do not depend on `ω`.
    pub fn constant(vectors: Vec<Vec<C64>>) -> Self {
        let sections = vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let v: Vec<(usize, C64)> = v.into_iter().enumerate().collect();
                let eval: Arc<SectionFn> = Arc::new(move |_, _| Ok(v.clone()));
                Section::finite(format!("constant {i}"), eval)
            })
            .collect();
        Self::new(sections)
    }

    pub fn rank(&self) -> usize {
        self.sections.len()
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// True when the Grammian is known to be diagonal with radial entries.
    pub fn is_diagonal_radial(&self) -> bool {
        self.radial.is_some() && self.mixing.is_none()
    }

    /// The frame `ν'_i = Σ_j D_ij ν_j`.
    pub fn mixed(&self, d: DMatrix<C64>) -> Result<Self> {
        if d.nrows() != self.rank() || d.ncols() != self.rank() {
            return Err(Error::InvalidArgument(
                "mixing matrix has the wrong shape".into(),
            ));
        }
        let combined = match &self.mixing {
            Some(old) => &d * old,
            None => d,
        };
        Ok(Self {
            sections: self.sections.clone(),
            radial: None,
            mixing: Some(combined),
        })
    }
}

/// A Grammian and the bound on its entries from truncated sections.
#[derive(Debug, Clone)]
pub struct Grammian {
    pub matrix: DMatrix<C64>,
    pub tail_bound: f64,
}

/// `H_ij(ω) = ⟨ν_j(ω), ν_i(ω)⟩`.
pub fn grammian(frame: &Frame, w: C64, terms: usize) -> Result<Grammian> {
    check_disk(w, 0.0)?;
    grammian_unchecked(frame, w, terms)
}

fn grammian_unchecked(frame: &Frame, w: C64, terms: usize) -> Result<Grammian> {
    let m = frame.rank();
    let mut dense: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut norms2 = Vec::with_capacity(m);
    let mut tails = Vec::with_capacity(m);
    for s in &frame.sections {
        let coeffs = s.eval(w, terms)?;
        let len = coeffs.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
        let mut v = vec![C64::new(0.0, 0.0); len];
        let mut blocks = Vec::new();
        for chunk in coeffs.chunks(s.block) {
            blocks.push(chunk.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>());
        }
        for (i, c) in coeffs {
            v[i] += c;
        }
        norms2.push(v.iter().map(|c| c.norm_sqr()).sum::<f64>());
        tails.push(if s.finite {
            0.0
        } else {
            geometric_tail(&blocks)
        });
        dense.push(v);
    }
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = crate::numeric::CompensatedComplexSum::new();
            for (a, b) in dense[j].iter().zip(&dense[i]) {
                acc.add(a * b.conj());
            }
            let v = acc.value();
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
        h[(i, i)].im = 0.0;
    }
    let mut tail_bound: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let e = tails[i].sqrt() * norms2[j].sqrt()
                + tails[j].sqrt() * norms2[i].sqrt()
                + (tails[i] * tails[j]).sqrt();
            tail_bound = tail_bound.max(e);
        }
    }
    if let Some(d) = &frame.mixing {
        let dn = d.iter().map(|c| c.norm_sqr()).sum::<f64>();
        h = d.map(|c| c.conj()) * h * d.transpose();
        tail_bound *= dn;
    }
    let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if tail_bound > SERIES_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Truncation {
            terms,
            bound: tail_bound,
            tolerance: SERIES_TOLERANCE * scale,
        });
    }
    Ok(Grammian {
        matrix: h,
        tail_bound,
    })
}

/// The `m` sections spanning the eigenspace of `(M_{z^m})*` at `conj(ω)`,
/// section `k` supported on the exponents `≡ k mod m`:
///
/// ```text
/// ν_k(ω) = Σ_ℓ conj(ω)^ℓ / β_ℓ · e_{mℓ+k}
/// ```
///
/// where `β_ℓ` are the cumulative weights of the restriction shift on
/// `span{z^{mℓ+k}}`. Section `k` has unit coefficient on `e_k` and
/// `H_kk(ω) = Σ_ℓ |ω|^{2ℓ}/β_ℓ²`; off-diagonal entries vanish.
pub fn power_frame(spec: &KernelSpec, m: u32) -> Result<Frame> {
    check_power_spec(spec, m)?;
    let sections = (0..m)
        .map(|k| {
            let spec = spec.clone();
            let eval: Arc<SectionFn> = Arc::new(move |w: C64, terms: usize| {
                let shift = restriction_shift(&spec, m, k, terms.max(1))?;
                let betas = shift.betas(terms)?;
                let wc = w.conj();
                let mut p = C64::new(1.0, 0.0);
                let mut out = Vec::with_capacity(terms);
                for (l, b) in betas.iter().enumerate() {
                    out.push((m as usize * l + k as usize, p / *b));
                    p *= wc;
                }
                Ok(out)
            });
            Section::new(format!("k = {k}"), 1, eval)
        })
        .collect();
    let spec = spec.clone();
    let radial: Arc<RadialFn> = Arc::new(move |terms: usize| {
        (0..m)
            .map(|k| {
                let shift = restriction_shift(&spec, m, k, terms.max(2))?;
                RadialMetric::series(shift_kernel_metric(&shift, terms.max(2))?)
            })
            .collect()
    });
    Ok(Frame {
        sections,
        radial: Some(radial),
        mixing: None,
    })
}

/// The same frame built from kernel vectors at the `m`-th roots of `ω`:
///
/// ```text
/// ν_k(ω) = √μ_k / (m conj(η)^k) Σ_j conj(ζ^j)^{−k} k_{ζ^j η},   η^m = ω
/// ```
///
/// with `η` the principal root rotated by `ζ^branch`, `ζ = e^{2πi/m}`. The
/// result does not depend on the branch; this constructor exists to check
/// that.
pub fn power_frame_via_roots(spec: &KernelSpec, m: u32, branch: u32) -> Result<Frame> {
    check_power_spec(spec, m)?;
    let mf = f64::from(m);
    let sections = (0..m)
        .map(|k| {
            let spec = spec.clone();
            let eval: Arc<SectionFn> = Arc::new(move |w: C64, terms: usize| {
                let zeta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / mf);
                let eta = if w == C64::new(0.0, 0.0) {
                    w
                } else {
                    w.powf(1.0 / mf) * zeta.powu(branch)
                };
                let roots: Vec<C64> = (0..m).map(|j| (zeta.powu(j) * eta).conj()).collect();
                let mom = spec.moments();
                let mut out = Vec::with_capacity(terms * m as usize);
                for n in k..k + m * terms as u32 {
                    // (1/m) Σ_j conj(ζ^j η)^{n−k}: zero unless m | n−k
                    let s: C64 = roots.iter().map(|r| r.powu(n - k)).sum::<C64>() / mf;
                    let scale = (1.0 / mom.ratio(&[n], &[k])?).sqrt();
                    out.push((n as usize, s * scale));
                }
                Ok(out)
            });
            Section::new(format!("k = {k} via roots"), m as usize, eval)
        })
        .collect();
    Ok(Frame::new(sections))
}

fn check_power_spec(spec: &KernelSpec, m: u32) -> Result<()> {
    if spec.vars() != 1 {
        return Err(Error::Arity {
            expected: 1,
            got: spec.vars(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be ≥ 1".into()));
    }
    Ok(())
}

/// Reducing-lattice verdict from curvature eigenvalue separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeVerdict {
    /// All eigenvalues pairwise separated: the lattice of reducing
    /// submodules is finite and discrete.
    FiniteDiscrete,
    /// Some eigenvalues coincide within the resolution.
    Indeterminate,
}

/// Classifies sorted eigenvalues; also returns, per eigenvalue, the size of
/// the cluster of eigenvalues it ties with.
pub fn lattice_verdict(sorted: &[f64], resolution: f64) -> (LatticeVerdict, Vec<usize>) {
    let n = sorted.len();
    let mut mult = vec![1; n];
    let mut start = 0;
    for i in 1..=n {
        if i == n || sorted[i] - sorted[i - 1] > resolution {
            for m in mult.iter_mut().take(i).skip(start) {
                *m = i - start;
            }
            start = i;
        }
    }
    let verdict = if mult.iter().all(|&m| m == 1) {
        LatticeVerdict::FiniteDiscrete
    } else {
        LatticeVerdict::Indeterminate
    };
    (verdict, mult)
}

/// How the curvature matrix is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMethod {
    /// Wirtinger finite differences of `H`, Richardson-extrapolated.
    FiniteDifference,
    /// Exact log-derivatives; diagonal radial frames only.
    Exact,
    /// Both, failing if they disagree beyond the cross-check tolerance.
    CrossChecked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOptions {
    pub terms: usize,
    pub step: f64,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self {
            terms: DEFAULT_FRAME_TERMS,
            step: DEFAULT_STEP,
        }
    }
}

/// Curvature matrix of a frame at a point, with its spectrum.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub omega: C64,
    pub matrix: DMatrix<C64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Size of the tie cluster each eigenvalue belongs to.
    pub multiplicities: Vec<usize>,
    pub verdict: LatticeVerdict,
    /// Largest entrywise difference between the two paths, when both ran.
    pub cross_check: Option<f64>,
}

/// Serialised form `{omega: [re, im], matrix: [[[re, im], …], …], eigenvalues, verdict}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReportDoc {
    pub omega: [f64; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub eigenvalues: Vec<f64>,
    pub verdict: LatticeVerdict,
}

impl CurvatureReport {
    pub fn to_doc(&self) -> CurvatureReportDoc {
        CurvatureReportDoc {
            omega: [self.omega.re, self.omega.im],
            matrix: (0..self.matrix.nrows())
                .map(|i| {
                    (0..self.matrix.ncols())
                        .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                        .collect()
                })
                .collect(),
            eigenvalues: self.eigenvalues.clone(),
            verdict: self.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("report serialises")
    }
}

/// `K(ω) = −∂_ω̄(H⁻¹ ∂_ω H)` with default options.
pub fn bundle_curvature(frame: &Frame, w: C64, method: CurvatureMethod) -> Result<CurvatureReport> {
    bundle_curvature_with(frame, w, method, &CurvatureOptions::default())
}

pub fn bundle_curvature_with(
    frame: &Frame,
    w: C64,
    method: CurvatureMethod,
    opts: &CurvatureOptions,
) -> Result<CurvatureReport> {
    check_disk(w, 0.0)?;
    let h = grammian_unchecked(frame, w, opts.terms)?.matrix;
    if h.clone().cholesky().is_none() {
        return Err(Error::FrameDegenerate);
    }
    let (matrix, cross_check) = match method {
        CurvatureMethod::FiniteDifference => (fd_curvature(frame, w, opts)?.0, None),
        CurvatureMethod::Exact => (exact_curvature(frame, w, opts)?, None),
        CurvatureMethod::CrossChecked => {
            let exact = exact_curvature(frame, w, opts)?;
            let (fd, est) = fd_curvature(frame, w, opts)?;
            let diff = (&fd - &exact).iter().map(|c| c.norm()).fold(0.0, f64::max);
            let tolerance = (1e3 * est).max(1e-6);
            if diff > tolerance {
                return Err(Error::CrossCheck {
                    discrepancy: diff,
                    tolerance,
                });
            }
            (exact, Some(diff))
        }
    };
    let hk = &h * &matrix;
    let eigenvalues = generalized_hermitian_eigenvalues(&h, &hk)?;
    let (verdict, multiplicities) = lattice_verdict(&eigenvalues, EIGEN_RESOLUTION);
    Ok(CurvatureReport {
        omega: w,
        matrix,
        eigenvalues,
        multiplicities,
        verdict,
        cross_check,
    })
}

fn exact_curvature(frame: &Frame, w: C64, opts: &CurvatureOptions) -> Result<DMatrix<C64>> {
    let Some(radial) = frame.radial.as_ref().filter(|_| frame.mixing.is_none()) else {
        return Err(Error::Method {
            method: "exact curvature",
            reason: "frame is not known to be diagonal and radial".into(),
        });
    };
    let metrics = radial(opts.terms)?;
    let mut k = DMatrix::zeros(metrics.len(), metrics.len());
    for (i, g) in metrics.iter().enumerate() {
        k[(i, i)] = C64::new(line_curvature(g, w, LineMethod::Series)?, 0.0);
    }
    Ok(k)
}

/// Finite-difference curvature and an entrywise error estimate.
fn fd_curvature(frame: &Frame, w: C64, opts: &CurvatureOptions) -> Result<(DMatrix<C64>, f64)> {
    let h = opts.step;
    if !(h > 1e-8) {
        return Err(Error::Method {
            method: "finite differences",
            reason: format!("step {h:e} underflows"),
        });
    }
    if w.norm() + h > 1.0 - DEFAULT_MARGIN {
        return Err(Error::Method {
            method: "finite differences",
            reason: "stencil leaves the domain near the boundary; use the exact method".into(),
        });
    }
    let f = |p: C64| grammian_unchecked(frame, p, opts.terms).map(|g| g.matrix);
    let jet = wirtinger::matrix_jet(&f, w, h)?;
    let fine = wirtinger::matrix_jet(&f, w, h / 2.0)?;
    let k = curvature_from_matrix_jet(&jet)?;
    let k_fine = curvature_from_matrix_jet(&fine)?;
    // Richardson-level difference: a conservative proxy for the remaining error
    let est = (&k - &k_fine).iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok((k, est))
}

fn curvature_from_matrix_jet(jet: &wirtinger::MatrixJet) -> Result<DMatrix<C64>> {
    let hinv = jet
        .value
        .clone()
        .try_inverse()
        .ok_or(Error::FrameDegenerate)?;
    // −∂̄(H⁻¹∂H) = H⁻¹(∂̄H)H⁻¹(∂H) − H⁻¹(∂̄∂H)
    Ok(&hinv * &jet.dbar * &hinv * &jet.d - &hinv * &jet.d_dbar)
}

/// Curvatures of the `m` lines `span{z^{mℓ+k}}` together with the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducingReport {
    pub curvatures: Vec<f64>,
    pub verdict: LatticeVerdict,
}

/// Curvature at 0 of each line `span{z^{mℓ+k}}`, `k = 0..m`.
pub fn reducing_curvatures(spec: &KernelSpec, m: u32) -> Result<ReducingReport> {
    reducing_curvatures_at(spec, m, C64::new(0.0, 0.0))
}

/// Curvature at `ω` of each line `span{z^{mℓ+k}}`, through the metric
/// series of the restriction shift.
pub fn reducing_curvatures_at(spec: &KernelSpec, m: u32, w: C64) -> Result<ReducingReport> {
    check_power_spec(spec, m)?;
    let mut curvatures = Vec::with_capacity(m as usize);
    for k in 0..m {
        let mut terms = DEFAULT_FRAME_TERMS;
        let value = loop {
            let shift = restriction_shift(spec, m, k, terms)?;
            let g = RadialMetric::series(shift_kernel_metric(&shift, terms)?)?;
            match line_curvature(&g, w, LineMethod::Series) {
                Err(Error::Truncation { .. }) if terms < 1 << 20 => terms *= 2,
                other => break other?,
            }
        };
        curvatures.push(value);
    }
    let mut sorted = curvatures.clone();
    sorted.sort_by(f64::total_cmp);
    let (verdict, _) = lattice_verdict(&sorted, EIGEN_RESOLUTION);
    Ok(ReducingReport {
        curvatures,
        verdict,
    })
}

/// The expression `−(m+k)/k` that is sometimes quoted for the curvature at
/// 0 of `M_{z^m}` on `span{z^{mℓ+k}}` in the Bergman space. It is
/// undefined at `k = 0` and does not agree with
/// [`reducing_curvatures`], whose series value is `−(m+k+1)/(k+1)`;
/// exposed only for comparison.
pub fn naive_reducing_curvature(m: u32, k: u32) -> Option<f64> {
    (k > 0).then(|| -f64::from(m + k) / f64::from(k))
}
