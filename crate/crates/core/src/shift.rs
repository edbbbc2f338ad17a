//! Unilateral weighted shifts `e_ℓ ↦ w_ℓ e_{ℓ+1}`.
//!
//! Two shifts are unitarily equivalent exactly when their weight moduli
//! agree, and similar exactly when the ratios of cumulative weight products
//! stay bounded above and below. Shifts coming from the built-in kernel
//! families carry a rational weight rule in `ℓ`, which lets the
//! similarity question be settled from the asymptotics of the rule rather
//! than from a finite table.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{geometric_tail, Family, KernelSpec, KernelValue, PointInDomain};
use crate::numeric::{CompensatedComplexSum, C64};

/// Default number of weights compared.
pub const DEFAULT_DEPTH: usize = 512;
/// Default tolerance on weight and coefficient equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const ROOT_TOLERANCE: f64 = 1e-12;
const CAUCHY_TOLERANCE: f64 = 1e-9;

/// `w_ℓ² = scale · Π_i (ℓ − a_i) / Π_j (ℓ − b_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalWeightRule {
    scale: f64,
    num_roots: Vec<f64>,
    den_roots: Vec<f64>,
}

impl RationalWeightRule {
    pub fn new(scale: f64, num_roots: Vec<f64>, den_roots: Vec<f64>) -> Self {
        let (num_roots, den_roots) = cancel_roots(num_roots, den_roots);
        Self {
            scale,
            num_roots,
            den_roots,
        }
    }

    pub fn constant(w: f64) -> Self {
        Self::new(w * w, Vec::new(), Vec::new())
    }

    pub fn squared_weight(&self, l: usize) -> f64 {
        let x = l as f64;
        let num: f64 = self.num_roots.iter().map(|a| x - a).product();
        let den: f64 = self.den_roots.iter().map(|b| x - b).product();
        self.scale * num / den
    }

    pub fn weight(&self, l: usize) -> f64 {
        self.squared_weight(l).sqrt()
    }

    /// The rule of `self / other` in squared weights.
    fn quotient(&self, other: &Self) -> Self {
        let mut num = self.num_roots.clone();
        num.extend(&other.den_roots);
        let mut den = self.den_roots.clone();
        den.extend(&other.num_roots);
        Self::new(self.scale / other.scale, num, den)
    }

    fn is_identity(&self) -> bool {
        (self.scale - 1.0).abs() <= ROOT_TOLERANCE
            && self.num_roots.is_empty()
            && self.den_roots.is_empty()
    }

    /// Symbolic equality: same scale and the same root multisets.
    pub fn coincides_with(&self, other: &Self) -> bool {
        self.quotient(other).is_identity()
    }
}

fn cancel_roots(mut num: Vec<f64>, mut den: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    num.sort_by(f64::total_cmp);
    den.sort_by(f64::total_cmp);
    let mut keep_num = Vec::with_capacity(num.len());
    for a in num {
        if let Some(pos) = den.iter().position(|b| (a - b).abs() <= ROOT_TOLERANCE) {
            den.remove(pos);
        } else {
            keep_num.push(a);
        }
    }
    (keep_num, den)
}

/// How the weights continue past the stored prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    Rational(RationalWeightRule),
    /// Finite table; weights past its end are unknown.
    Table,
    /// Finite table whose last weight repeats forever.
    TableRepeatLast,
}

/// Closed-form shift descriptors, serialised as
/// `{"kind": "bergman-power", "m": 2, "k": 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShiftDescriptor {
    /// `M_{z^m}` on the `z^{mℓ+k}` span of the weighted Bergman space.
    BergmanPower {
        m: u32,
        k: u32,
        #[serde(default)]
        alpha: f64,
    },
    /// `M_{z^m}` on the `z^{mℓ+k}` span of the Hardy space.
    HardyPower { m: u32, k: u32 },
    /// `M_{z_1}` on the span of `z_1^a z_2^slice` in the Drury–Arveson space.
    DruryArvesonSlice { slice: u32 },
}

impl ShiftDescriptor {
    pub fn build(&self, depth: usize) -> Result<WeightedShift> {
        let mut s = match *self {
            ShiftDescriptor::BergmanPower { m, k, alpha } => {
                restriction_shift(&KernelSpec::weighted_bergman(alpha)?, m, k, depth)?
            }
            ShiftDescriptor::HardyPower { m, k } => {
                restriction_shift(&KernelSpec::hardy_disk(), m, k, depth)?
            }
            ShiftDescriptor::DruryArvesonSlice { slice } => {
                coordinate_slice_shift(&KernelSpec::drury_arveson(2)?, 0, &[0, slice], depth)?
            }
        };
        s.descriptor = Some(self.clone());
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialises")
    }
}

/// A unilateral weighted shift with a stored weight prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedShift {
    weights: Vec<f64>,
    rule: WeightRule,
    descriptor: Option<ShiftDescriptor>,
}

impl WeightedShift {
    /// A shift from an explicit weight table.
    pub fn from_table(weights: Vec<f64>, repeat_last: bool) -> Result<Self> {
        validate_weights(&weights)?;
        Ok(Self {
            weights,
            rule: if repeat_last {
                WeightRule::TableRepeatLast
            } else {
                WeightRule::Table
            },
            descriptor: None,
        })
    }

    /// A shift whose weights follow `rule`, with `depth` weights stored.
    pub fn from_rule(rule: RationalWeightRule, depth: usize) -> Result<Self> {
        let weights: Vec<f64> = (0..depth).map(|l| rule.weight(l)).collect();
        validate_weights(&weights)?;
        Ok(Self {
            weights,
            rule: WeightRule::Rational(rule),
            descriptor: None,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn descriptor(&self) -> Option<&ShiftDescriptor> {
        self.descriptor.as_ref()
    }

    /// `w_ℓ`, from the stored prefix or the continuation rule.
    pub fn weight(&self, l: usize) -> Option<f64> {
        if let Some(&w) = self.weights.get(l) {
            return Some(w);
        }
        match &self.rule {
            WeightRule::Rational(r) => Some(r.weight(l)),
            WeightRule::Table => None,
            WeightRule::TableRepeatLast => self.weights.last().copied(),
        }
    }

    /// Number of weights known, `None` when unbounded.
    pub fn known_len(&self) -> Option<usize> {
        match self.rule {
            WeightRule::Table => Some(self.weights.len()),
            _ => None,
        }
    }

    /// `β_0 = 1, β_{ℓ+1} = β_ℓ w_ℓ` for `ℓ < n`.
    pub fn betas(&self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        let mut b = 1.0;
        for l in 0..n {
            out.push(b);
            if l + 1 < n {
                b *= self.weight(l).ok_or_else(|| table_too_short(l))?;
            }
        }
        Ok(out)
    }

    /// Largest stored weight.
    pub fn sup_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Writes the stored weights as CSV with columns `index,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "weight"])?;
        for (i, x) in self.weights.iter().enumerate() {
            w.write_record([i.to_string(), format!("{x:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an `index,weight` CSV table. Indices must run 0, 1, 2, …
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "index" || &headers[1] != "weight" {
            return Err(Error::Parse("expected header `index,weight`".into()));
        }
        let mut weights = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let idx: usize = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if idx != row {
                return Err(Error::Parse(format!("row {row} has index {idx}")));
            }
            let w: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            weights.push(w);
        }
        Self::from_table(weights, false)
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "weight {i} must be positive and finite, got {w}"
        )));
    }
    Ok(())
}

fn table_too_short(l: usize) -> Error {
    Error::InvalidArgument(format!("weight table ends before index {l}"))
}

/// `M_{z^m}` restricted to `span{z^{mℓ+k} : ℓ ≥ 0}` in its normalised
/// monomial basis: `w_ℓ = sqrt(μ_{m(ℓ+1)+k} / μ_{mℓ+k})`.
pub fn restriction_shift(spec: &KernelSpec, m: u32, k: u32, len: usize) -> Result<WeightedShift> {
    if spec.vars() != 1 {
        return Err(Error::Arity {
            expected: 1,
            got: spec.vars(),
        });
    }
    if m == 0 || k >= m {
        return Err(Error::InvalidArgument(format!(
            "need m ≥ 1 and 0 ≤ k < m, got m = {m}, k = {k}"
        )));
    }
    if len == 0 {
        return Err(Error::InvalidArgument("length must be ≥ 1".into()));
    }
    let mom = spec.moments();
    let weights = (0..len as u32)
        .map(|l| mom.ratio(&[m * (l + 1) + k], &[m * l + k]).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    validate_weights(&weights)?;
    let rule = match *spec.family() {
        Family::HardyDisk => WeightRule::Rational(RationalWeightRule::constant(1.0)),
        Family::WeightedBergman { alpha } => {
            // μ_{n+1}/μ_n = (n+1)/(n+2+α) telescoped over n = mℓ+k … mℓ+k+m−1
            let m_f = f64::from(m);
            let num = (1..=m).map(|i| -f64::from(k + i) / m_f).collect();
            let den = (1..=m)
                .map(|i| -(f64::from(k + i) + 1.0 + alpha) / m_f)
                .collect();
            WeightRule::Rational(RationalWeightRule::new(1.0, num, den))
        }
        _ => WeightRule::Table,
    };
    let descriptor = match *spec.family() {
        Family::HardyDisk => Some(ShiftDescriptor::HardyPower { m, k }),
        Family::WeightedBergman { alpha } => Some(ShiftDescriptor::BergmanPower { m, k, alpha }),
        _ => None,
    };
    Ok(WeightedShift {
        weights,
        rule,
        descriptor,
    })
}

/// `M_{z_v}` restricted to `span{z^{base + a·e_v} : a ≥ 0}`, where the
/// `v`-th entry of `base` is ignored.
pub fn coordinate_slice_shift(
    spec: &KernelSpec,
    var: usize,
    base: &[u32],
    len: usize,
) -> Result<WeightedShift> {
    if base.len() != spec.vars() {
        return Err(Error::Arity {
            expected: spec.vars(),
            got: base.len(),
        });
    }
    if var >= spec.vars() {
        return Err(Error::InvalidArgument(format!(
            "variable {var} out of range"
        )));
    }
    let mut lo = base.to_vec();
    lo[var] = 0;
    let mut weights = Vec::with_capacity(len);
    for _ in 0..len {
        let mut hi = lo.clone();
        hi[var] += 1;
        weights.push(spec.moments().ratio(&hi, &lo)?.sqrt());
        lo = hi;
    }
    validate_weights(&weights)?;
    let rule = match *spec.family() {
        Family::HardyDisk | Family::HardyPolydisk { .. } => {
            WeightRule::Rational(RationalWeightRule::constant(1.0))
        }
        Family::DruryArveson { .. } => {
            // μ(α+e_v)/μ(α) = (α_v+1)/(|α|+1) with α_v = a and |α| = a + |base|
            let rest: u32 = base
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != var)
                .map(|(_, &b)| b)
                .sum();
            WeightRule::Rational(RationalWeightRule::new(
                1.0,
                vec![-1.0],
                vec![-(f64::from(rest) + 1.0)],
            ))
        }
        _ => WeightRule::Table,
    };
    Ok(WeightedShift {
        weights,
        rule,
        descriptor: None,
    })
}

/// The equivalence class established between two shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Equivalence {
    UnitarilyEquivalent,
    SimilarNotUnitary,
    NotSimilar,
    Inconclusive { depth: usize },
}

/// Outcome of comparing two shifts, with the diagonal intertwiner
/// `Y e_ℓ = c_ℓ f_ℓ` computed over the examined range.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVerdict {
    pub equivalence: Equivalence,
    pub coefficients: Vec<f64>,
    /// `(inf |c_ℓ|, sup |c_ℓ|)` over the computed range.
    pub bounds: (f64, f64),
    /// `lim c_ℓ` when both shifts follow rational rules and it exists.
    pub limit: Option<f64>,
    /// The exponent `p` in `c_ℓ² ~ C ℓ^p` for rational rules.
    pub growth_exponent: Option<f64>,
}

/// Decides unitary equivalence by comparing weights `ℓ < depth`. When the
/// weights differ, the result of [`similarity_intertwiner`] is returned.
pub fn unitarily_equivalent(
    a: &WeightedShift,
    b: &WeightedShift,
    depth: usize,
    tol: f64,
) -> Result<SimilarityVerdict> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be ≥ 1".into()));
    }
    let mut compared = 0;
    for l in 0..depth {
        match (a.weight(l), b.weight(l)) {
            (Some(x), Some(y)) => {
                if (x - y).abs() > tol {
                    return similarity_intertwiner(a, b, depth.max(2));
                }
                compared += 1;
            }
            _ => break,
        }
    }
    let ones = vec![1.0; compared + 1];
    let unit = |equivalence| SimilarityVerdict {
        equivalence,
        coefficients: ones.clone(),
        bounds: (1.0, 1.0),
        limit: Some(1.0),
        growth_exponent: Some(0.0),
    };
    if tails_coincide(a, b) {
        return Ok(unit(Equivalence::UnitarilyEquivalent));
    }
    if compared < depth {
        return Ok(SimilarityVerdict {
            limit: None,
            growth_exponent: None,
            ..unit(Equivalence::Inconclusive { depth: compared })
        });
    }
    // equal prefixes but no symbolic agreement past it
    similarity_intertwiner(a, b, depth.max(2))
}

fn tails_coincide(a: &WeightedShift, b: &WeightedShift) -> bool {
    match (&a.rule, &b.rule) {
        (WeightRule::Rational(x), WeightRule::Rational(y)) => x.coincides_with(y),
        (WeightRule::Table, WeightRule::Table) => {
            a.weights.len() == b.weights.len()
                && a.weights
                    .iter()
                    .zip(&b.weights)
                    .all(|(x, y)| (x - y).abs() <= DEFAULT_TOLERANCE)
        }
        (WeightRule::TableRepeatLast, WeightRule::TableRepeatLast) => {
            let n = a.weights.len().max(b.weights.len());
            (0..n).all(|l| match (a.weight(l), b.weight(l)) {
                (Some(x), Some(y)) => (x - y).abs() <= DEFAULT_TOLERANCE,
                _ => false,
            })
        }
        _ => false,
    }
}

/// Diagonal intertwiner `Y e_ℓ = c_ℓ f_ℓ` with `Y·source = target·Y`:
/// `c_0 = 1`, `c_{ℓ+1} = c_ℓ · w^target_ℓ / w^source_ℓ`.
pub fn similarity_intertwiner(
    source: &WeightedShift,
    target: &WeightedShift,
    depth: usize,
) -> Result<SimilarityVerdict> {
    if depth < 2 {
        return Err(Error::InvalidArgument("depth must be ≥ 2".into()));
    }
    let mut coefficients = Vec::with_capacity(depth);
    coefficients.push(1.0);
    for l in 0..depth - 1 {
        let (Some(ws), Some(wt)) = (source.weight(l), target.weight(l)) else {
            break;
        };
        let next = coefficients[l] * wt / ws;
        coefficients.push(next);
    }
    let bounds = coefficients
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
            (lo.min(c.abs()), hi.max(c.abs()))
        });
    let computed = coefficients.len();

    if let (WeightRule::Rational(rs), WeightRule::Rational(rt)) = (&source.rule, &target.rule) {
        let ratio = rt.quotient(rs);
        if ratio.is_identity() {
            return Ok(SimilarityVerdict {
                equivalence: Equivalence::UnitarilyEquivalent,
                coefficients,
                bounds,
                limit: Some(1.0),
                growth_exponent: Some(0.0),
            });
        }
        let geometric = (ratio.scale - 1.0).abs() > ROOT_TOLERANCE
            || ratio.num_roots.len() != ratio.den_roots.len();
        let exponent = ratio.den_roots.iter().sum::<f64>() - ratio.num_roots.iter().sum::<f64>();
        if geometric || exponent.abs() > 1e-9 {
            return Ok(SimilarityVerdict {
                equivalence: Equivalence::NotSimilar,
                coefficients,
                bounds,
                limit: None,
                growth_exponent: if geometric { None } else { Some(exponent) },
            });
        }
        return Ok(SimilarityVerdict {
            equivalence: Equivalence::SimilarNotUnitary,
            coefficients,
            bounds,
            limit: Some(rational_limit(&ratio)),
            growth_exponent: Some(0.0),
        });
    }

    let unit = coefficients
        .iter()
        .all(|c| (c - 1.0).abs() <= DEFAULT_TOLERANCE);
    let equivalence = if computed < depth {
        Equivalence::Inconclusive { depth: computed }
    } else if unit && tails_coincide(source, target) {
        Equivalence::UnitarilyEquivalent
    } else if cauchy_stable(&coefficients) {
        Equivalence::SimilarNotUnitary
    } else {
        Equivalence::Inconclusive { depth: computed }
    };
    Ok(SimilarityVerdict {
        equivalence,
        coefficients,
        bounds,
        limit: None,
        growth_exponent: None,
    })
}

/// For `R(ℓ) = Π(ℓ−a_i)/Π(ℓ−b_j)` with `Σa = Σb`, the partial products
/// `Π_{j<ℓ} R(j) = Π Γ(ℓ−a_i)/Γ(−a_i) · Π Γ(−b_j)/Γ(ℓ−b_j)` tend to
/// `Π Γ(−b_j) / Π Γ(−a_i)`.
fn rational_limit(ratio: &RationalWeightRule) -> f64 {
    let lg = |x: f64| libm::lgamma_r(x);
    let mut log = 0.0;
    let mut sign = 1;
    for b in &ratio.den_roots {
        let (v, s) = lg(-b);
        log += v;
        sign *= s;
    }
    for a in &ratio.num_roots {
        let (v, s) = lg(-a);
        log -= v;
        sign *= s;
    }
    let c2 = f64::from(sign) * log.exp();
    c2.sqrt()
}

fn cauchy_stable(c: &[f64]) -> bool {
    let half = &c[c.len() / 2..];
    let last = *half.last().expect("non-empty");
    if !(last > 0.0) || !last.is_finite() {
        return false;
    }
    half.iter()
        .all(|x| ((x - last) / last).abs() <= CAUCHY_TOLERANCE)
}

/// Coefficients `a_ℓ = 1/β_ℓ²` of `g(r) = Σ a_ℓ r^ℓ`, the squared norm of
/// the eigenvector of the adjoint at `conj(ω)` with `r = |ω|²`.
pub fn shift_kernel_metric(s: &WeightedShift, terms: usize) -> Result<Vec<f64>> {
    if terms < 2 {
        return Err(Error::InvalidArgument("terms must be ≥ 2".into()));
    }
    Ok(s.betas(terms)?.into_iter().map(|b| 1.0 / (b * b)).collect())
}

/// Reproducing kernel of `span{z^{mℓ+k}}` assembled from the restriction
/// shift: `K_k(z,w) = s^k/μ_k · Σ_ℓ a_ℓ s^{mℓ}` with `s = z conj(w)`.
pub fn subspace_kernel(
    spec: &KernelSpec,
    m: u32,
    k: u32,
    z: &PointInDomain,
    w: &PointInDomain,
    terms: usize,
) -> Result<KernelValue> {
    spec.check_point(z)?;
    spec.check_point(w)?;
    let shift = restriction_shift(spec, m, k, terms)?;
    let a = shift_kernel_metric(&shift, terms.max(2))?;
    let s = z.coords()[0] * w.coords()[0].conj();
    let sm = s.powu(m);
    let lead = s.powu(k) / spec.moments().get(&[k])?;
    let mut sum = CompensatedComplexSum::new();
    let mut blocks = Vec::with_capacity(a.len());
    let mut p = C64::new(1.0, 0.0);
    for al in &a {
        let t = lead * p * *al;
        blocks.push(t.norm());
        sum.add(t);
        p *= sm;
    }
    Ok(KernelValue {
        value: sum.value(),
        tail_bound: geometric_tail(&blocks),
    })
}
