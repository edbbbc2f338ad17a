//! Model theory for finite contractions: defect operators, the
//! characteristic function
//!
//! ```text
//! Θ_T(z) = [−T + z D_{T*} (I − zT*)⁻¹ D_T] restricted to 𝒟_T → 𝒟_{T*},
//! ```
//!
//! localization of multiplication maps, and the norm-ratio obstruction
//! between weighted Bergman spaces.
//!
//! Defect spaces are represented by orthonormal bases, so `Θ` is only
//! determined up to constant unitaries on either side; compare samples
//! through singular values and `|det Θ|`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Polynomial, DEFAULT_MARGIN};
use crate::numeric::{hermitian_eigen, operator_norm, singular_values, C64};

/// Slack on `‖T‖ ≤ 1`.
pub const NORM_SLACK: f64 = 1e-12;
/// Eigenvalues of `I − T*T` at or below this count as zero.
pub const DEFECT_CUTOFF: f64 = 1e-10;
/// Slack on `‖Θ(z)‖ ≤ 1`.
pub const CONTRACTIVITY_SLACK: f64 = 1e-8;

/// Which reading of the characteristic-function formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharFnVariant {
    /// `−T + z D_{T*} (I − zT*)⁻¹ D_T` on `𝒟_T`.
    #[default]
    Standard,
    /// `−T + z D_{T*} (I − zT*)⁻¹` on `𝒟_T`, without the inner `D_T`.
    Printed,
}

/// A square matrix with `‖T‖ ≤ 1` and its defect data.
#[derive(Debug, Clone)]
pub struct FiniteContraction {
    t: DMatrix<C64>,
    d_t: DMatrix<C64>,
    d_t_star: DMatrix<C64>,
    /// Orthonormal basis of `𝒟_T` as columns.
    basis_t: DMatrix<C64>,
    /// Orthonormal basis of `𝒟_{T*}` as columns.
    basis_t_star: DMatrix<C64>,
}

/// Defect operators and the dimensions of their ranges.
#[derive(Debug, Clone)]
pub struct Defects {
    pub d_t: DMatrix<C64>,
    pub d_t_star: DMatrix<C64>,
    pub rank_t: usize,
    pub rank_t_star: usize,
}

/// `(I − A)^{1/2}` for `A = T*T` or `TT*`, with the range basis ordered by
/// descending eigenvalue.
fn defect(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(&(DMatrix::identity(n, n) - a));
    if let Some(&low) = values.first() {
        if low < -NORM_SLACK {
            return Err(Error::NotContraction {
                norm: (1.0 - low).sqrt(),
            });
        }
    }
    let roots: Vec<f64> = values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut sqrt = DMatrix::zeros(n, n);
    for (i, r) in roots.iter().enumerate() {
        let v = vectors.column(i);
        sqrt += v * v.adjoint() * C64::new(*r, 0.0);
    }
    let sqrt = (&sqrt + sqrt.adjoint()) * C64::new(0.5, 0.0);

    let mut kept: Vec<(f64, Vec<C64>)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > DEFECT_CUTOFF)
        .map(|(i, v)| {
            (
                *v,
                normalise_phase(vectors.column(i).iter().copied().collect()),
            )
        })
        .collect();
    kept.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let basis = DMatrix::from_fn(n, kept.len(), |r, c| kept[c].1[r]);
    Ok((sqrt, basis))
}

/// Rotates a vector so its first non-negligible entry is real and positive.
fn normalise_phase(v: Vec<C64>) -> Vec<C64> {
    match v.iter().find(|c| c.norm() > 1e-12) {
        Some(c) => {
            let phase = c.conj() / c.norm();
            v.into_iter().map(|x| x * phase).collect()
        }
        None => v,
    }
}

impl FiniteContraction {
    pub fn new(t: DMatrix<C64>) -> Result<Self> {
        if t.nrows() != t.ncols() {
            return Err(Error::InvalidArgument(format!(
                "contraction must be square, got {}×{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let norm = operator_norm(&t);
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NotContraction { norm });
        }
        let (d_t, basis_t) = defect(&(t.adjoint() * &t))?;
        let (d_t_star, basis_t_star) = defect(&(&t * t.adjoint()))?;
        Ok(Self {
            t,
            d_t,
            d_t_star,
            basis_t,
            basis_t_star,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn defects(&self) -> Defects {
        Defects {
            d_t: self.d_t.clone(),
            d_t_star: self.d_t_star.clone(),
            rank_t: self.basis_t.ncols(),
            rank_t_star: self.basis_t_star.ncols(),
        }
    }

    /// Orthonormal bases of `𝒟_T` and `𝒟_{T*}` as matrix columns.
    pub fn defect_bases(&self) -> (&DMatrix<C64>, &DMatrix<C64>) {
        (&self.basis_t, &self.basis_t_star)
    }
}

/// `(D_T, D_{T*}, rank D_T, rank D_{T*})` of a contraction.
pub fn defect_operators(t: &DMatrix<C64>) -> Result<Defects> {
    Ok(FiniteContraction::new(t.clone())?.defects())
}

/// `Θ_T(z)` in the stored defect bases.
#[derive(Debug, Clone)]
pub struct CharFnSample {
    pub z: C64,
    /// `rank D_{T*} × rank D_T`.
    pub theta: DMatrix<C64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `|det Θ(z)|` when the defect ranks agree.
    pub abs_det: Option<f64>,
}

impl CharFnSample {
    pub fn norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

pub fn char_function(t: &FiniteContraction, z: C64) -> Result<CharFnSample> {
    char_function_variant(t, z, CharFnVariant::Standard)
}

pub fn char_function_variant(
    t: &FiniteContraction,
    z: C64,
    variant: CharFnVariant,
) -> Result<CharFnSample> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain {
            norm: z.norm(),
            margin: 0.0,
        });
    }
    let d = t.dim();
    let resolvent = (DMatrix::identity(d, d) - t.t.adjoint() * z)
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("I − zT* is singular".into()))?;
    let mut inner = &t.d_t_star * resolvent * z;
    if variant == CharFnVariant::Standard {
        inner *= &t.d_t;
    }
    let full = inner - &t.t;
    let theta = t.basis_t_star.adjoint() * full * &t.basis_t;
    let sv = singular_values(&theta);
    let abs_det = theta.is_square().then(|| {
        if theta.nrows() == 0 {
            1.0
        } else {
            theta.determinant().norm()
        }
    });
    let sample = CharFnSample {
        z,
        theta,
        singular_values: sv,
        abs_det,
    };
    if variant == CharFnVariant::Standard && sample.norm() > 1.0 + CONTRACTIVITY_SLACK {
        return Err(Error::NotContraction {
            norm: sample.norm(),
        });
    }
    Ok(sample)
}

/// `re_z,im_z,sv_1..sv_r,abs_det` rows; all samples must share a rank.
pub fn write_charfn_csv<W: Write>(samples: &[CharFnSample], out: W) -> Result<()> {
    let r = samples.first().map_or(0, |s| s.singular_values.len());
    if samples.iter().any(|s| s.singular_values.len() != r) {
        return Err(Error::InvalidArgument(
            "samples have different ranks".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["re_z".to_string(), "im_z".to_string()];
    header.extend((1..=r).map(|i| format!("sv_{i}")));
    header.push("abs_det".into());
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.z.re.to_string(), s.z.im.to_string()];
        row.extend(s.singular_values.iter().map(|v| v.to_string()));
        row.push(s.abs_det.map_or(String::new(), |v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A scalar holomorphic function on the disk.
#[derive(Debug, Clone, PartialEq)]
pub enum HolomorphicSymbol {
    /// `Σ c_i z^i`.
    Polynomial(Polynomial),
    /// `p/q` with `q` zero-free on the disk.
    Rational { num: Polynomial, den: Polynomial },
}

impl HolomorphicSymbol {
    /// The Blaschke factor `(z − a)/(1 − conj(a) z)`.
    pub fn blaschke(a: C64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::InvalidArgument(
                "Blaschke zero must lie in the disk".into(),
            ));
        }
        Ok(Self::Rational {
            num: Polynomial::new(vec![-a, C64::new(1.0, 0.0)]),
            den: Polynomial::new(vec![C64::new(1.0, 0.0), -a.conj()]),
        })
    }
}

/// The localization of multiplication by `θ` at `ω`, i.e. the scalar `θ(ω)`.
pub fn localize_multiplier(theta: &HolomorphicSymbol, w: C64) -> Result<C64> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain {
            norm: w.norm(),
            margin: 0.0,
        });
    }
    match theta {
        HolomorphicSymbol::Polynomial(p) => Ok(p.eval(w)),
        HolomorphicSymbol::Rational { num, den } => {
            let q = den.eval(w);
            if q.norm() == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "denominator vanishes at {w}"
                )));
            }
            Ok(num.eval(w) / q)
        }
    }
}

/// Outcome of the norm-ratio test for module maps between weighted
/// Bergman spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Obstruction {
    /// The ratio tends to 0 at the boundary: every module map is zero.
    NoNonzeroMap,
    Unobstructed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiSimilarity {
    pub ratio: f64,
    pub verdict: Obstruction,
}

/// `‖γ^β_ω‖ / ‖γ^α_ω‖ = (1 − |ω|²)^{(α−β)/2}` for the weighted Bergman
/// kernels `‖γ^α_ω‖² = (1 − |ω|²)^{−(2+α)}`.
///
/// A module map `X: L^{2,β} → L^{2,α}` with symbol `φ` satisfies
/// `X* γ^α_ω = conj(φ(ω)) γ^β_ω`, so `|φ(ω)| ≤ ‖X‖ / ratio`. When `α < β`
/// that bound vanishes at the boundary and forces `φ ≡ 0`.
pub fn quasi_similarity_ratio(alpha: f64, beta: f64, w: C64) -> Result<QuasiSimilarity> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "weights must exceed −1, got α = {alpha}, β = {beta}"
        )));
    }
    if w.norm() > 1.0 - DEFAULT_MARGIN {
        return Err(Error::Domain {
            norm: w.norm(),
            margin: DEFAULT_MARGIN,
        });
    }
    let r = w.norm_sqr();
    Ok(QuasiSimilarity {
        ratio: (1.0 - r).powf((alpha - beta) / 2.0),
        verdict: if alpha < beta {
            Obstruction::NoNonzeroMap
        } else {
            Obstruction::Unobstructed
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Entry {
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixDoc {
    rows: Vec<Vec<Entry>>,
}

/// Parses `{"rows": [[{"re": .., "im": ..}, ..], ..]}`.
pub fn matrix_from_json(text: &str) -> Result<DMatrix<C64>> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    let n = doc.rows.len();
    let m = doc.rows.first().map_or(0, |r| r.len());
    if doc.rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("matrix rows have different lengths".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| {
        let e = doc.rows[i][j];
        C64::new(e.re, e.im)
    }))
}

pub fn matrix_to_json(m: &DMatrix<C64>) -> String {
    let doc = MatrixDoc {
        rows: (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| Entry {
                        re: m[(i, j)].re,
                        im: m[(i, j)].im,
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("matrix serialises")
}
