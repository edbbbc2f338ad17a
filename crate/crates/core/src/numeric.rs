//! Small numerical building blocks shared by the modules: compensated
//! summation, multi-index enumeration and Hermitian spectral helpers.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of complex numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// All multi-indices of `vars` entries with total degree `degree`, in
/// lexicographically descending order of the leading coordinate.
pub fn indices_of_degree(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if vars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0u32; vars];
    fill(&mut out, &mut current, 0, degree);
    out
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill(out, current, pos + 1, remaining - v);
    }
}

/// Number of multi-indices in `vars` variables with total degree at most `degree`.
pub fn count_up_to_degree(vars: usize, degree: u32) -> usize {
    (0..=degree).map(|d| indices_of_degree(vars, d).len()).sum()
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
/// The input is symmetrised first so round-off asymmetry is ignored.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of `a⁻¹ b` where `a` is Hermitian positive definite and `b`
/// is Hermitian, computed through the Cholesky factor of `a`.
pub fn generalized_hermitian_eigenvalues(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Vec<f64>> {
    let chol = a.clone().cholesky().ok_or(Error::FrameDegenerate)?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::FrameDegenerate)?;
    let b_sym = (b + b.adjoint()) * C64::new(0.5, 0.0);
    let reduced = &linv * b_sym * linv.adjoint();
    Ok(hermitian_eigen(&reduced).0)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with a relative cutoff and a mandatory gap between the
/// smallest retained and the largest discarded singular value.
pub fn numerical_rank(m: &DMatrix<C64>, rel_cutoff: f64, min_gap: f64) -> Result<usize> {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else {
        return Ok(0);
    };
    if top == 0.0 {
        return Ok(0);
    }
    let rank = sv.iter().take_while(|&&s| s > rel_cutoff * top).count();
    if rank < sv.len() && rank > 0 {
        let kept = sv[rank - 1];
        let dropped = sv[rank];
        if dropped > 0.0 && kept / dropped < min_gap {
            return Err(Error::Precision {
                gap: kept / dropped,
                required: min_gap,
            });
        }
    }
    // values just above the cutoff with a weak gap to the next retained one
    // are just as ambiguous
    if rank > 0 && sv[rank - 1] < rel_cutoff * top * min_gap {
        let kept = sv[rank - 1];
        return Err(Error::Precision {
            gap: kept / (rel_cutoff * top),
            required: min_gap,
        });
    }
    Ok(rank)
}

/// Total order on complex numbers by bit pattern, used to pick a canonical
/// argument order for Hermitian-symmetric evaluations.
pub fn bit_key(z: &[C64]) -> Vec<(u64, u64)> {
    z.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect()
}

/// Euclidean norm of a complex vector.
pub fn euclid_norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn inner(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}
