//! Quotient dimensions `dim 𝓜/[I_ω^k·𝓜]` of polynomial modules truncated at
//! a total degree, and Hilbert–Samuel polynomial fitting.
//!
//! Elements are stored in monomial coordinates. The Gram matrix is diagonal
//! (`‖z^α‖² = μ_α`) and does not affect spans, so ranks are taken on the raw
//! coefficient vectors, whose entries are binomial multiples of powers of
//! `ω`; at `ω = 0` they are exactly 0 or 1.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::numeric::{indices_of_degree, numerical_rank, C64};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-9;
/// Required ratio between the smallest kept and largest dropped singular value.
pub const RANK_GAP: f64 = 1e3;

/// Which monomials belong to the module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    All,
    /// Functions vanishing at the origin: every monomial except `1`.
    VanishAtOrigin,
}

/// A polynomial module truncated at total degree `D`, possibly with
/// multiplicity (an orthogonal sum of identical copies).
#[derive(Debug, Clone)]
pub struct TruncatedModule {
    vars: usize,
    degree: u32,
    membership: Membership,
    multiplicity: usize,
    basis: Vec<Vec<u32>>,
    gram: Vec<f64>,
    index: HashMap<Vec<u32>, usize>,
}

impl TruncatedModule {
    /// All monomials of degree at most `degree`.
    pub fn full(spec: &KernelSpec, degree: u32) -> Result<Self> {
        Self::build(spec, degree, Membership::All)
    }

    fn build(spec: &KernelSpec, degree: u32, membership: Membership) -> Result<Self> {
        let vars = spec.vars();
        let mut basis = Vec::new();
        let start = match membership {
            Membership::All => 0,
            Membership::VanishAtOrigin => 1,
        };
        for d in start..=degree {
            basis.extend(indices_of_degree(vars, d));
        }
        let gram = basis
            .iter()
            .map(|a| spec.moments().get(a))
            .collect::<Result<Vec<_>>>()?;
        if let Some(bad) = gram.iter().find(|g| !(**g > 0.0)) {
            return Err(Error::InvalidMoments(format!(
                "non-positive squared norm {bad}"
            )));
        }
        let index = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        Ok(Self {
            vars,
            degree,
            membership,
            multiplicity: 1,
            basis,
            gram,
            index,
        })
    }

    /// `m` orthogonal copies of the module with identical multiplication.
    pub fn with_multiplicity(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("multiplicity must be ≥ 1".into()));
        }
        self.multiplicity = m;
        Ok(self)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn membership(&self) -> Membership {
        self.membership
    }

    /// Monomials of one copy, ascending by degree.
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    /// Dimension of the truncation, counting all copies.
    pub fn dim(&self) -> usize {
        self.basis.len() * self.multiplicity
    }

    /// Largest degree of a generator of the module.
    pub fn generator_degree(&self) -> u32 {
        match self.membership {
            Membership::All => 0,
            Membership::VanishAtOrigin => 1,
        }
    }

    /// Diagonal of the Gram matrix, copy by copy.
    pub fn gram(&self) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.dim());
        for _ in 0..self.multiplicity {
            g.extend_from_slice(&self.gram);
        }
        g
    }

    /// Matrices of `M_{z_1}, …, M_{z_n}` in monomial coordinates; products
    /// leaving the truncation are dropped.
    pub fn mult_matrices(&self) -> Vec<DMatrix<C64>> {
        let n = self.basis.len();
        let one = C64::new(1.0, 0.0);
        (0..self.vars)
            .map(|v| {
                let mut m = DMatrix::zeros(self.dim(), self.dim());
                for (j, a) in self.basis.iter().enumerate() {
                    let mut b = a.clone();
                    b[v] += 1;
                    if let Some(&i) = self.index.get(&b) {
                        for c in 0..self.multiplicity {
                            m[(c * n + i, c * n + j)] = one;
                        }
                    }
                }
                m
            })
            .collect()
    }

    fn position(&self, idx: &[u32]) -> Result<usize> {
        self.index.get(idx).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("monomial {idx:?} is outside the module"))
        })
    }
}

/// Functions in the module vanishing at `q`; only `q = 0` is supported.
pub fn vanishing_submodule(
    spec: &KernelSpec,
    n: usize,
    degree: u32,
    q: &[C64],
) -> Result<TruncatedModule> {
    if spec.vars() != n {
        return Err(Error::Arity {
            expected: spec.vars(),
            got: n,
        });
    }
    if q.len() != n {
        return Err(Error::Arity {
            expected: n,
            got: q.len(),
        });
    }
    if q.iter().any(|c| *c != C64::new(0.0, 0.0)) {
        return Err(Error::Unsupported(
            "vanishing predicates are only built in at the origin".into(),
        ));
    }
    TruncatedModule::build(spec, degree, Membership::VanishAtOrigin)
}

/// A quotient dimension and whether it is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientDim {
    pub dim: usize,
    /// Away from the origin the truncated span under-approximates the
    /// closed submodule, so the count depends on the truncation.
    pub approximate: bool,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Coefficients of `Π_i (z_i − ω_i)^{β_i}` as `(exponent, coefficient)`.
fn shifted_power(beta: &[u32], w: &[C64]) -> Vec<(Vec<u32>, C64)> {
    let mut terms = vec![(vec![0u32; beta.len()], C64::new(1.0, 0.0))];
    for (v, (&b, &wv)) in beta.iter().zip(w).enumerate() {
        let mut next = Vec::new();
        for (exp, c) in &terms {
            for g in 0..=b {
                let coef = binomial(b, g) * (-wv).powu(b - g);
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut e = exp.clone();
                e[v] = g;
                next.push((e, c * coef));
            }
        }
        terms = next;
    }
    terms
}

/// `dim 𝓜/[I_ω^k·𝓜]` on the truncation: the dimension of the truncated
/// module minus the rank of `{(z−ω)^β b : |β| = k, deg b ≤ D − k}`.
pub fn quotient_dim(module: &TruncatedModule, w: &[C64], k: u32) -> Result<QuotientDim> {
    if w.len() != module.vars {
        return Err(Error::Arity {
            expected: module.vars,
            got: w.len(),
        });
    }
    let required = k + module.generator_degree();
    if module.degree < required {
        return Err(Error::DegreeCap {
            degree: module.degree,
            required,
        });
    }
    let n = module.basis.len();
    let mut columns: Vec<Vec<(usize, C64)>> = Vec::new();
    let powers: Vec<Vec<(Vec<u32>, C64)>> = indices_of_degree(module.vars, k)
        .iter()
        .map(|b| shifted_power(b, w))
        .collect();
    for b in &module.basis {
        let db: u32 = b.iter().sum();
        if db + k > module.degree {
            continue;
        }
        for p in &powers {
            let mut col = Vec::with_capacity(p.len());
            for (g, c) in p {
                let e: Vec<u32> = b.iter().zip(g).map(|(x, y)| x + y).collect();
                col.push((module.position(&e)?, *c));
            }
            columns.push(col);
        }
    }
    // the copies are independent, so one block's rank is multiplied out
    let rank = if columns.is_empty() {
        0
    } else {
        let mut m = DMatrix::zeros(n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col {
                m[(*i, j)] += *c;
            }
        }
        numerical_rank(&m, RANK_CUTOFF, RANK_GAP)?
    };
    Ok(QuotientDim {
        dim: (n - rank) * module.multiplicity,
        approximate: w.iter().any(|c| *c != C64::new(0.0, 0.0)),
    })
}

pub type Rational = Ratio<i128>;

/// A fitted Hilbert–Samuel polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSamuelFit {
    /// `d_k` for `k = 1..=k_max`.
    pub dims: Vec<usize>,
    /// Coefficients of `h(k)` in ascending degree.
    pub coeffs: Vec<Rational>,
    pub degree: usize,
    /// First `k` from which `h(k) = d_k`.
    pub stable_from: usize,
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertSamuelDoc {
    pub dims: Vec<usize>,
    pub poly: String,
    pub degree: usize,
    pub stable_from: usize,
    /// Ascending-degree coefficients as `p/q` strings.
    pub coefficients: Vec<String>,
}

impl HilbertSamuelFit {
    pub fn eval(&self, k: i128) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::from_integer(0), |acc, c| acc * k + c)
    }

    pub fn poly_string(&self) -> String {
        format_poly(&self.coeffs)
    }

    pub fn to_doc(&self) -> HilbertSamuelDoc {
        HilbertSamuelDoc {
            dims: self.dims.clone(),
            poly: self.poly_string(),
            degree: self.degree,
            stable_from: self.stable_from,
            coefficients: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("fit serialises")
    }

    /// `k,dim` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "dim"])?;
        for (i, d) in self.dims.iter().enumerate() {
            w.write_record([(i + 1).to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Computes `d_k` for `k = 1..=k_max` and fits the polynomial that the tail
/// follows exactly.
pub fn hilbert_samuel(
    module: &TruncatedModule,
    w: &[C64],
    k_max: usize,
) -> Result<HilbertSamuelFit> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be ≥ 1".into()));
    }
    let mut dims = Vec::with_capacity(k_max);
    let mut approximate = false;
    for k in 1..=k_max {
        let q = quotient_dim(module, w, k as u32)?;
        approximate |= q.approximate;
        dims.push(q.dim);
    }
    let (coeffs, stable_from) = fit_polynomial(&dims)?;
    Ok(HilbertSamuelFit {
        degree: coeffs.len().saturating_sub(1),
        dims,
        coeffs,
        stable_from,
        approximate,
    })
}

/// Lowest-degree polynomial matching `values[s−1..]` (`values[i]` is the
/// value at `k = i + 1`) on a tail long enough that the vanishing of the
/// next difference is observed at least twice. Returns ascending
/// coefficients (empty for the zero polynomial) and `s`.
pub fn fit_polynomial(values: &[usize]) -> Result<(Vec<Rational>, usize)> {
    let k_max = values.len();
    let v: Vec<i128> = values.iter().map(|&d| d as i128).collect();
    for p in 0..k_max {
        for s in 1..=k_max {
            let tail = &v[s - 1..];
            if tail.len() < p + 3 {
                break;
            }
            let diffs = differences(tail, p + 1);
            if diffs.iter().all(|&d| d == 0) {
                let leading: Vec<i128> = (0..=p).map(|j| differences(tail, j)[0]).collect();
                let coeffs = newton_to_monomial(&leading, s as i128);
                return Ok((trim(coeffs), s));
            }
        }
    }
    Err(Error::Inconclusive { k_max })
}

fn differences(v: &[i128], order: usize) -> Vec<i128> {
    let mut cur = v.to_vec();
    for _ in 0..order {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    cur
}

/// `Σ_j Δ^j · C(k − s, j)` expanded in powers of `k`.
fn newton_to_monomial(leading: &[i128], s: i128) -> Vec<Rational> {
    let zero = Rational::from_integer(0);
    let mut out = vec![zero; leading.len()];
    // basis polynomial C(k − s, j) = Π_{i<j} (k − s − i) / j!
    let mut basis = vec![Rational::from_integer(1)];
    for (j, &d) in leading.iter().enumerate() {
        for (i, c) in basis.iter().enumerate() {
            out[i] += c * d;
        }
        let root = s + j as i128;
        let mut next = vec![zero; basis.len() + 1];
        for (i, c) in basis.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * root;
        }
        let denom = Rational::from_integer(j as i128 + 1);
        basis = next.into_iter().map(|c| c / denom).collect();
    }
    out
}

fn trim(mut c: Vec<Rational>) -> Vec<Rational> {
    while c.last() == Some(&Rational::from_integer(0)) {
        c.pop();
    }
    c
}

fn abs(r: Rational) -> Rational {
    if *r.numer() < 0 {
        -r
    } else {
        r
    }
}

/// Renders a polynomial in `k`, factored over the integers when every root
/// is an integer (`k*(k+1)/2`), expanded otherwise (`k^2/2 + 1/3`).
pub fn format_poly(coeffs: &[Rational]) -> String {
    if coeffs.is_empty() {
        return "0".into();
    }
    factored(coeffs).unwrap_or_else(|| expanded(coeffs))
}

fn expanded(coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (j, c) in coeffs.iter().enumerate().rev() {
        if *c.numer() == 0 {
            continue;
        }
        let neg = *c.numer() < 0;
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let m = abs(*c);
        let var = match j {
            0 => String::new(),
            1 => "k".into(),
            _ => format!("k^{j}"),
        };
        if j == 0 {
            out.push_str(&m.to_string());
        } else {
            if *m.numer() != 1 {
                out.push_str(&format!("{}*", m.numer()));
            }
            out.push_str(&var);
            if *m.denom() != 1 {
                out.push_str(&format!("/{}", m.denom()));
            }
        }
    }
    out
}

fn factored(coeffs: &[Rational]) -> Option<String> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Some(coeffs[0].to_string());
    }
    let mut rest = coeffs.to_vec();
    let mut roots: Vec<i128> = Vec::new();
    let bound = 64;
    'search: while rest.len() > 1 {
        for r in -bound..=bound {
            let value = rest
                .iter()
                .rev()
                .fold(Rational::from_integer(0), |acc, c| acc * r + c);
            if *value.numer() == 0 {
                // synthetic division by (k − r)
                let n = rest.len() - 1;
                let mut q = vec![Rational::from_integer(0); n];
                let mut carry = Rational::from_integer(0);
                for i in (0..n).rev() {
                    carry = rest[i + 1] + carry * r;
                    q[i] = carry;
                }
                rest = q;
                roots.push(r);
                continue 'search;
            }
        }
        return None;
    }
    let lead = rest[0];
    roots.sort_by_key(|&r| (r != 0, r.abs(), r));
    let mut factors: Vec<String> = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        let mult = roots[i..].iter().take_while(|&&x| x == r).count();
        let base = match r {
            0 => "k".to_string(),
            r if r < 0 => format!("(k+{})", -r),
            r => format!("(k-{r})"),
        };
        factors.push(if mult > 1 {
            format!("{base}^{mult}")
        } else {
            base
        });
        i += mult;
    }
    let mut out = String::new();
    if *lead.numer() == -1 {
        out.push('-');
    } else if *lead.numer() != 1 {
        out.push_str(&format!("{}*", lead.numer()));
    }
    out.push_str(&factors.join("*"));
    if *lead.denom() != 1 {
        out.push_str(&format!("/{}", lead.denom()));
    }
    Some(out)
}
