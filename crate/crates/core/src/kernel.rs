//! Reproducing-kernel Hilbert module families.
//!
//! Every family here is diagonal: the monomials `z^α` are mutually
//! orthogonal and the space is determined by the moment sequence
//! `μ_α = ‖z^α‖²`. The reproducing kernel is then
//!
//! ```text
//! K(z, w) = Σ_α z^α conj(w)^α / μ_α
//! ```
//!
//! Built-in families also carry a closed form for `K`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bit_key, euclid_norm, indices_of_degree, CompensatedComplexSum, C64};

/// Default number of series degrees summed when no closed form is available.
pub const DEFAULT_TERMS: usize = 200;
/// Default distance kept from the boundary of the domain.
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Default absolute tolerance (scaled by `max(1, |K|)`) on series tail bounds.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// The named kernel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    HardyDisk,
    WeightedBergman { alpha: f64 },
    DruryArveson { n: usize },
    HardyPolydisk { n: usize },
    Custom { n: usize },
}

/// The geometry of the domain a family lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainShape {
    Disk,
    Ball,
    Polydisk,
}

/// What a custom moment table does past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    /// Indices outside the table reuse the moment of the in-table index
    /// reached by lowering the largest coordinate, so the series tail is
    /// dominated by a geometric series.
    Geometric,
    /// The space is exactly the span of the tabulated monomials.
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
enum MomentRule {
    Hardy,
    WeightedBergman(f64),
    DruryArveson,
    Polydisk,
    Table {
        entries: BTreeMap<Vec<u32>, f64>,
        tail: TailRule,
        max_degree: u32,
    },
}

/// Squared norms of the monomials, keyed by multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    vars: usize,
    rule: MomentRule,
}

impl MomentSequence {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn get(&self, idx: &[u32]) -> Result<f64> {
        if idx.len() != self.vars {
            return Err(Error::Arity {
                expected: self.vars,
                got: idx.len(),
            });
        }
        match &self.rule {
            MomentRule::Hardy | MomentRule::Polydisk => Ok(1.0),
            MomentRule::WeightedBergman(alpha) => Ok(bergman_moment(*alpha, idx[0])),
            MomentRule::DruryArveson => Ok(drury_arveson_moment(idx)),
            MomentRule::Table { entries, tail, .. } => {
                if let Some(v) = entries.get(idx) {
                    return Ok(*v);
                }
                match tail {
                    TailRule::Reject => Err(Error::MissingMoment {
                        index: idx.to_vec(),
                        reason: "index outside the moment table".into(),
                    }),
                    TailRule::Geometric => {
                        let mut cur = idx.to_vec();
                        loop {
                            if let Some(v) = entries.get(&cur) {
                                return Ok(*v);
                            }
                            let (pos, &top) = cur
                                .iter()
                                .enumerate()
                                .rev()
                                .max_by_key(|(_, v)| **v)
                                .expect("non-empty index");
                            if top == 0 {
                                return Err(Error::MissingMoment {
                                    index: idx.to_vec(),
                                    reason: "table has no entry to extend from".into(),
                                });
                            }
                            cur[pos] -= 1;
                        }
                    }
                }
            }
        }
    }

    /// `μ_num / μ_den`. For single-variable Bergman families the quotient is
    /// formed from the telescoped factors, which keeps it accurate to a few
    /// ulps even when both moments are tiny.
    pub fn ratio(&self, num: &[u32], den: &[u32]) -> Result<f64> {
        if let MomentRule::WeightedBergman(alpha) = self.rule {
            if num.len() == 1 && den.len() == 1 {
                let (a, b) = (num[0], den[0]);
                let (lo, hi, invert) = if a >= b { (b, a, false) } else { (a, b, true) };
                let mut r = 1.0;
                for j in (lo + 1)..=hi {
                    let j = f64::from(j);
                    r *= j / (j + 1.0 + alpha);
                }
                return Ok(if invert { 1.0 / r } else { r });
            }
        }
        Ok(self.get(num)? / self.get(den)?)
    }

    /// Largest total degree carried by a `reject`-tailed table.
    fn finite_degree(&self) -> Option<u32> {
        match &self.rule {
            MomentRule::Table {
                tail: TailRule::Reject,
                max_degree,
                ..
            } => Some(*max_degree),
            _ => None,
        }
    }

    fn contains(&self, idx: &[u32]) -> bool {
        match &self.rule {
            MomentRule::Table {
                entries,
                tail: TailRule::Reject,
                ..
            } => entries.contains_key(idx),
            _ => true,
        }
    }
}

/// `n! Γ(2+α) / Γ(n+2+α)` as the product `Π_{j=1..n} j/(j+1+α)`.
fn bergman_moment(alpha: f64, n: u32) -> f64 {
    let mut m = 1.0;
    for j in 1..=n {
        let j = f64::from(j);
        m *= j / (j + 1.0 + alpha);
    }
    m
}

/// `α! / |α|!`, the reciprocal of the multinomial coefficient.
fn drury_arveson_moment(idx: &[u32]) -> f64 {
    let mut partial = 0u32;
    let mut m = 1.0;
    for &a in idx {
        partial += a;
        m /= binomial(partial, a);
    }
    m
}

/// `ln μ_α` for Drury–Arveson, finite where the moment itself underflows.
fn drury_arveson_ln_moment(idx: &[u32]) -> f64 {
    let mut partial = 0u32;
    let mut ln = 0.0;
    for &a in idx {
        partial += a;
        ln += ln_factorial(a) + ln_factorial(partial - a) - ln_factorial(partial);
    }
    ln
}

fn ln_factorial(n: u32) -> f64 {
    libm::lgamma_r(f64::from(n) + 1.0).0
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 1..=k {
        c = c * f64::from(n - k + i) / f64::from(i);
    }
    c.round()
}

/// A named reproducing-kernel family together with its moments.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: Family,
    moments: MomentSequence,
}

impl KernelSpec {
    pub fn hardy_disk() -> Self {
        Self {
            family: Family::HardyDisk,
            moments: MomentSequence {
                vars: 1,
                rule: MomentRule::Hardy,
            },
        }
    }

    /// The unweighted Bergman space, `α = 0`.
    pub fn bergman() -> Self {
        Self::weighted_bergman(0.0).expect("α = 0 is admissible")
    }

    pub fn weighted_bergman(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "weighted Bergman parameter must satisfy α > -1, got {alpha}"
            )));
        }
        Ok(Self {
            family: Family::WeightedBergman { alpha },
            moments: MomentSequence {
                vars: 1,
                rule: MomentRule::WeightedBergman(alpha),
            },
        })
    }

    pub fn drury_arveson(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Drury–Arveson needs n ≥ 1".into()));
        }
        Ok(Self {
            family: Family::DruryArveson { n },
            moments: MomentSequence {
                vars: n,
                rule: MomentRule::DruryArveson,
            },
        })
    }

    pub fn hardy_polydisk(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("polydisk needs n ≥ 1".into()));
        }
        Ok(Self {
            family: Family::HardyPolydisk { n },
            moments: MomentSequence {
                vars: n,
                rule: MomentRule::Polydisk,
            },
        })
    }

    /// A family defined by an explicit moment table.
    pub fn custom(vars: usize, table: Vec<(Vec<u32>, f64)>, tail: TailRule) -> Result<Self> {
        if vars == 0 {
            return Err(Error::InvalidMoments("variables must be ≥ 1".into()));
        }
        let mut entries = BTreeMap::new();
        for (idx, value) in table {
            if idx.len() != vars {
                return Err(Error::InvalidMoments(format!(
                    "index {idx:?} has arity {} but the table declares {vars} variables",
                    idx.len()
                )));
            }
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidMoments(format!(
                    "moment for {idx:?} must be positive and finite, got {value}"
                )));
            }
            if entries.insert(idx.clone(), value).is_some() {
                return Err(Error::InvalidMoments(format!("duplicate index {idx:?}")));
            }
        }
        if entries.is_empty() {
            return Err(Error::InvalidMoments("empty moment table".into()));
        }
        if tail == TailRule::Geometric && !entries.contains_key(&vec![0; vars]) {
            return Err(Error::InvalidMoments(
                "a geometric tail needs the constant monomial in the table".into(),
            ));
        }
        let max_degree = entries
            .keys()
            .map(|k| k.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        Ok(Self {
            family: Family::Custom { n: vars },
            moments: MomentSequence {
                vars,
                rule: MomentRule::Table {
                    entries,
                    tail,
                    max_degree,
                },
            },
        })
    }

    /// Parses the JSON moment-table document
    /// `{"variables": n, "moments": [{"index": [...], "value": v}], "tail": "geometric"|"reject"}`.
    pub fn from_moment_json(text: &str) -> Result<Self> {
        let doc: MomentTableDoc = serde_json::from_str(text)?;
        let table = doc
            .moments
            .into_iter()
            .map(|e| (e.index, e.value))
            .collect();
        Self::custom(doc.variables, table, doc.tail)
    }

    pub fn load_moment_table(path: &Path) -> Result<Self> {
        Self::from_moment_json(&std::fs::read_to_string(path)?)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn moments(&self) -> &MomentSequence {
        &self.moments
    }

    pub fn vars(&self) -> usize {
        self.moments.vars
    }

    pub fn shape(&self) -> DomainShape {
        match self.family {
            Family::DruryArveson { n } if n > 1 => DomainShape::Ball,
            Family::HardyPolydisk { n } | Family::Custom { n } if n > 1 => DomainShape::Polydisk,
            _ => DomainShape::Disk,
        }
    }

    /// True when the family has a closed-form kernel.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.family, Family::Custom { .. })
    }

    /// Checks that `p` has the right arity and sits inside the domain with
    /// its declared margin.
    pub fn check_point(&self, p: &PointInDomain) -> Result<()> {
        if p.coords.len() != self.vars() {
            return Err(Error::Arity {
                expected: self.vars(),
                got: p.coords.len(),
            });
        }
        let norm = p.norm(self.shape());
        if norm > 1.0 - p.margin {
            return Err(Error::Domain {
                norm,
                margin: p.margin,
            });
        }
        Ok(())
    }

    fn closed_form(&self, z: &[C64], w: &[C64]) -> Option<C64> {
        let one = C64::new(1.0, 0.0);
        match self.family {
            Family::HardyDisk => Some(one / (one - z[0] * w[0].conj())),
            Family::WeightedBergman { alpha } => {
                let base = one - z[0] * w[0].conj();
                if alpha == 0.0 {
                    Some(one / (base * base))
                } else {
                    Some(base.powf(-2.0 - alpha))
                }
            }
            Family::DruryArveson { .. } => {
                let s: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
                Some(one / (one - s))
            }
            Family::HardyPolydisk { .. } => Some(
                z.iter()
                    .zip(w)
                    .map(|(a, b)| one / (one - a * b.conj()))
                    .product(),
            ),
            Family::Custom { .. } => None,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct MomentTableDoc {
    variables: usize,
    moments: Vec<MomentEntryDoc>,
    tail: TailRule,
}

#[derive(Debug, Deserialize, Serialize)]
struct MomentEntryDoc {
    index: Vec<u32>,
    value: f64,
}

/// `μ_idx` for `spec`.
pub fn moment(spec: &KernelSpec, idx: &[u32]) -> Result<f64> {
    spec.moments.get(idx)
}

/// A point of the domain together with the boundary margin it must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct PointInDomain {
    coords: Vec<C64>,
    margin: f64,
}

impl PointInDomain {
    pub fn new(coords: Vec<C64>, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "domain margin must lie in (0, 1), got {margin}"
            )));
        }
        if coords
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { coords, margin })
    }

    /// Single-variable point with the default margin.
    pub fn disk(z: C64) -> Result<Self> {
        Self::new(vec![z], DEFAULT_MARGIN)
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn norm(&self, shape: DomainShape) -> f64 {
        match shape {
            DomainShape::Disk | DomainShape::Ball => euclid_norm(&self.coords),
            DomainShape::Polydisk => self.coords.iter().map(|c| c.norm()).fold(0.0, f64::max),
        }
    }
}

/// A kernel value with the bound on the neglected series tail (zero when a
/// closed form was used or the space is finite-dimensional).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub tail_bound: f64,
}

/// `K(z, w)`. Uses the closed form when the family has one and otherwise
/// the ascending-degree series truncated after `terms` degrees.
///
/// The arguments are put in a canonical order before evaluating, so
/// `kernel_eval(s, z, w)` and `conj(kernel_eval(s, w, z))` agree bit for bit.
pub fn kernel_eval(
    spec: &KernelSpec,
    z: &PointInDomain,
    w: &PointInDomain,
    terms: usize,
) -> Result<KernelValue> {
    spec.check_point(z)?;
    spec.check_point(w)?;
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be ≥ 1".into()));
    }
    let swapped = bit_key(&z.coords) > bit_key(&w.coords);
    let (a, b) = if swapped { (w, z) } else { (z, w) };
    let kv = match spec.closed_form(&a.coords, &b.coords) {
        Some(value) => KernelValue {
            value,
            tail_bound: 0.0,
        },
        None => series_checked(spec, &a.coords, &b.coords, terms, DEFAULT_TAIL_TOLERANCE)?,
    };
    Ok(if swapped {
        KernelValue {
            value: kv.value.conj(),
            ..kv
        }
    } else {
        kv
    })
}

/// The truncated series `Σ_{|α| < terms} z^α conj(w)^α / μ_α` for any
/// family, with its geometric tail bound. Fails when the bound exceeds
/// `tolerance · max(1, |K|)`.
pub fn kernel_series(
    spec: &KernelSpec,
    z: &PointInDomain,
    w: &PointInDomain,
    terms: usize,
    tolerance: f64,
) -> Result<KernelValue> {
    spec.check_point(z)?;
    spec.check_point(w)?;
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be ≥ 1".into()));
    }
    series_checked(spec, &z.coords, &w.coords, terms, tolerance)
}

fn series_checked(
    spec: &KernelSpec,
    z: &[C64],
    w: &[C64],
    terms: usize,
    tolerance: f64,
) -> Result<KernelValue> {
    let kv = series_raw(spec, z, w, terms)?;
    let allowed = tolerance * kv.value.norm().max(1.0);
    if kv.tail_bound > allowed {
        return Err(Error::Truncation {
            terms,
            bound: kv.tail_bound,
            tolerance: allowed,
        });
    }
    Ok(kv)
}

fn series_raw(spec: &KernelSpec, z: &[C64], w: &[C64], terms: usize) -> Result<KernelValue> {
    let prods: Vec<C64> = z.iter().zip(w).map(|(a, b)| a * b.conj()).collect();
    let finite = spec.moments.finite_degree();
    let last_degree = match finite {
        Some(d) => (terms as u32 - 1).min(d),
        None => terms as u32 - 1,
    };
    let mut sum = CompensatedComplexSum::new();
    let mut blocks = Vec::with_capacity(last_degree as usize + 1);
    for d in 0..=last_degree {
        let mut block = 0.0;
        for idx in indices_of_degree(spec.vars(), d) {
            if !spec.moments.contains(&idx) {
                continue;
            }
            let mono: C64 = prods.iter().zip(&idx).map(|(p, &e)| p.powu(e)).product();
            if mono == C64::new(0.0, 0.0) {
                continue;
            }
            let mu = spec.moments.get(&idx)?;
            let term = if mu > f64::MIN_POSITIVE && mu.is_finite() {
                mono / mu
            } else if matches!(spec.moments.rule, MomentRule::DruryArveson) {
                // the moment underflows at high degree; combine in logs
                let ln = mono.norm().ln() - drury_arveson_ln_moment(&idx);
                mono / mono.norm() * ln.exp()
            } else {
                return Err(Error::InvalidMoments(format!("moment {mu} at {idx:?}")));
            };
            block += term.norm();
            sum.add(term);
        }
        blocks.push(block);
    }
    let covers_all = finite.is_some_and(|d| terms as u32 > d);
    let tail_bound = if covers_all {
        0.0
    } else {
        geometric_tail(&blocks)
    };
    Ok(KernelValue {
        value: sum.value(),
        tail_bound,
    })
}

/// Bound on `Σ_{d ≥ len} B_d` from the last block and the largest ratio
/// between consecutive blocks over the final few degrees.
pub(crate) fn geometric_tail(blocks: &[f64]) -> f64 {
    let Some(&last) = blocks.last() else {
        return f64::INFINITY;
    };
    if last == 0.0 {
        return 0.0;
    }
    let start = blocks.len().saturating_sub(6);
    let mut q: f64 = 0.0;
    for i in (start + 1)..blocks.len() {
        if blocks[i - 1] > 0.0 {
            q = q.max(blocks[i] / blocks[i - 1]);
        }
    }
    if blocks.len() < 2 || q >= 1.0 {
        return f64::INFINITY;
    }
    last * q / (1.0 - q)
}

/// A polynomial `Σ c_i z^i` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    /// The monomial `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); k + 1];
        c[k] = C64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// Result of checking that the kernel vector is an eigenvector of `M_p*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCheck {
    /// `‖M_p* k_ω − conj(p(ω)) k_ω‖ / ‖k_ω‖` on the truncation.
    pub residual: f64,
    /// `⟨M_p* k_ω, k_ω⟩ / ‖k_ω‖²`.
    pub rayleigh: C64,
}

/// Truncates `M_p` to the first `n` orthonormal monomials
/// `e_j = z^j / √μ_j` and measures how far the truncated kernel vector is
/// from being an eigenvector of its adjoint with eigenvalue `conj(p(ω))`.
pub fn eigenvector_residual(
    spec: &KernelSpec,
    omega: &PointInDomain,
    p: &Polynomial,
    n: usize,
) -> Result<EigenCheck> {
    if spec.vars() != 1 {
        return Err(Error::Unsupported(
            "eigenvector residual is defined for single-variable families".into(),
        ));
    }
    spec.check_point(omega)?;
    if n < p.degree() + 2 {
        return Err(Error::Truncation {
            terms: n,
            bound: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let w = omega.coords[0];
    let mp = multiplication_matrix(spec, p, n)?;
    let mut k = DVector::zeros(n);
    for j in 0..n {
        let mu = spec.moments.get(&[j as u32])?;
        k[j] = w.conj().powu(j as u32) / mu.sqrt();
    }
    let mk = mp.adjoint() * &k;
    let eig = p.eval(w).conj();
    let resid = &mk - &k * eig;
    let knorm = k.norm();
    Ok(EigenCheck {
        residual: resid.norm() / knorm,
        rayleigh: crate::numeric::inner(&mk, &k) / (knorm * knorm),
    })
}

/// Matrix of `M_p` on `span{e_0, …, e_{n−1}}`, dropping the overflow past
/// degree `n − 1`.
pub fn multiplication_matrix(spec: &KernelSpec, p: &Polynomial, n: usize) -> Result<DMatrix<C64>> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for (i, c) in p.coeffs().iter().enumerate() {
            let row = i + j;
            if row >= n || *c == C64::new(0.0, 0.0) {
                continue;
            }
            let r = spec.moments.ratio(&[row as u32], &[j as u32])?;
            m[(row, j)] = c * r.sqrt();
        }
    }
    Ok(m)
}

/// Gram matrix `[K(p_i, p_j)]` of the kernel on a finite point set.
pub fn kernel_gram(
    spec: &KernelSpec,
    points: &[PointInDomain],
    terms: usize,
) -> Result<DMatrix<C64>> {
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = kernel_eval(spec, &points[i], &points[j], terms)?.value;
        }
    }
    Ok(g)
}
