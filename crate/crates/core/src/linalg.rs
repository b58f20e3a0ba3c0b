//! Dense matrix helpers shared by the decompositions: the canonical
//! symplectic form, block-structure predicates, skew-Gram prefixes, and the
//! orthogonal canonical form of a real skew-symmetric matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Default relative rank tolerance for a matrix of dimension `dim`.
pub fn default_rank_tol(dim: usize) -> f64 {
    1e-10 * dim.max(1) as f64
}

/// The canonical form `J_n = I_n ⊗ [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: RealMatrix,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        let mut matrix = RealMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { n, matrix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.matrix
    }
}

pub fn symplectic_form(n: usize) -> SymplecticForm {
    SymplecticForm::new(n)
}

/// Shorthand for `symplectic_form(n).into_matrix()`.
pub fn jn(n: usize) -> RealMatrix {
    SymplecticForm::new(n).into_matrix()
}

pub(crate) fn ensure_square_even(m: &RealMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.nrows().is_multiple_of(2) {
        return Err(Error::DimensionOdd(m.nrows()));
    }
    Ok(m.nrows() / 2)
}

pub(crate) fn ensure_finite(m: &RealMatrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_complex(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖Tᵀ J_n T − J_n‖_max`.
pub fn symplectic_residual(t: &RealMatrix) -> Result<f64> {
    let n = ensure_square_even(t)?;
    let j = jn(n);
    Ok(max_abs(&(t.transpose() * &j * t - &j)))
}

pub fn is_symplectic(t: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(t)? <= tol)
}

/// Inverse of a symplectic matrix via `T⁻¹ = J_nᵀ Tᵀ J_n`.
pub fn symplectic_inverse(t: &RealMatrix) -> RealMatrix {
    let j = jn(t.nrows() / 2);
    j.transpose() * t.transpose() * j
}

/// Permutation reversing the order of the `(q_k, p_k)` pairs.
pub fn block_reversal_permutation(n: usize) -> RealMatrix {
    let mut p = RealMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let src = n - 1 - k;
        p[(2 * k, 2 * src)] = 1.0;
        p[(2 * k + 1, 2 * src + 1)] = 1.0;
    }
    p
}

/// Largest magnitude among entries strictly above the 2x2 block diagonal.
pub fn max_above_block_diagonal(m: &RealMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j / 2 > i / 2 {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// Largest magnitude among entries strictly below the 2x2 block diagonal.
pub fn max_below_block_diagonal(m: &RealMatrix) -> f64 {
    max_above_block_diagonal(&m.transpose())
}

pub fn zero_above_block_diagonal(m: &mut RealMatrix) {
    let (rows, cols) = m.shape();
    for i in 0..rows {
        for j in 0..cols {
            if j / 2 > i / 2 {
                m[(i, j)] = 0.0;
            }
        }
    }
}

pub fn zero_below_block_diagonal(m: &mut RealMatrix) {
    let (rows, cols) = m.shape();
    for i in 0..rows {
        for j in 0..cols {
            if i / 2 > j / 2 {
                m[(i, j)] = 0.0;
            }
        }
    }
}

pub fn is_lower_block_triangular(m: &RealMatrix) -> bool {
    max_above_block_diagonal(m) == 0.0
}

pub fn is_upper_block_triangular(m: &RealMatrix) -> bool {
    max_below_block_diagonal(m) == 0.0
}

/// `N_i = M̃_iᵀ J_n M̃_i` for the leading `2 * prefix_pairs` columns of `v`.
/// The result is exactly skew-symmetric.
pub fn skew_gram(v: &RealMatrix, prefix_pairs: usize) -> Result<RealMatrix> {
    let n = ensure_square_even(v)?;
    if prefix_pairs == 0 || prefix_pairs > n {
        return Err(Error::DimensionMismatch(format!(
            "prefix_pairs must lie in 1..={n}, got {prefix_pairs}"
        )));
    }
    let cols = v.columns(0, 2 * prefix_pairs);
    let g = cols.transpose() * jn(n) * cols;
    Ok((&g - g.transpose()) * 0.5)
}

/// One flag per prefix `N_1 .. N_n`: true iff `σ_min(N_i) > tol · scale_i`,
/// where `scale_i = max(σ_max(N_i), ‖M̃_i‖₂²)`.
pub fn prefix_rank_flags(v: &RealMatrix, tol: f64) -> Result<Vec<bool>> {
    let n = ensure_square_even(v)?;
    let j = jn(n);
    let mut flags = Vec::with_capacity(n);
    for k in 1..=n {
        let cols = v.columns(0, 2 * k).into_owned();
        let g = cols.transpose() * &j * &cols;
        let nk = (&g - g.transpose()) * 0.5;
        let sv = SVD::new(nk, false, false).singular_values;
        let col_scale = SVD::new(cols, false, false).singular_values[0].powi(2);
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        let scale = smax.max(col_scale);
        flags.push(scale > 0.0 && smin > tol * scale);
    }
    Ok(flags)
}

/// `X = Qᵀ Λ Q` with `Q` orthogonal and `Λ = diag([[0, λ_k], [-λ_k, 0]])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewCanonicalForm {
    pub q: RealMatrix,
    pub lambdas: Vec<f64>,
}

impl SkewCanonicalForm {
    pub fn lambda_matrix(&self) -> RealMatrix {
        let n = self.lambdas.len();
        let mut l = RealMatrix::zeros(2 * n, 2 * n);
        for (k, &lam) in self.lambdas.iter().enumerate() {
            l[(2 * k, 2 * k + 1)] = lam;
            l[(2 * k + 1, 2 * k)] = -lam;
        }
        l
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.q.transpose() * self.lambda_matrix() * &self.q
    }
}

pub fn skew_canonical_decomposition(x: &RealMatrix, tol: f64) -> Result<SkewCanonicalForm> {
    let n = ensure_square_even(x)?;
    ensure_finite(x)?;
    let scale = max_abs(x);
    let residual = max_abs(&(x + x.transpose()));
    if residual > tol * scale {
        return Err(Error::NotSkewSymmetric { residual });
    }
    let x = (x - x.transpose()) * 0.5;
    let dim = 2 * n;

    // Eigenvectors of XᵀX come in X-invariant pairs {b, X b / λ}.
    let eig = SymmetricEigen::new(x.transpose() * &x);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0).sqrt();
    let null_thr = f64::EPSILON * dim as f64 * top.max(f64::MIN_POSITIVE) * 16.0;

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let mut lambdas = Vec::with_capacity(n);
    let mut null_vectors: Vec<DVector<f64>> = Vec::new();

    for &idx in &order {
        if basis.len() + null_vectors.len() >= dim {
            break;
        }
        let Some(b) = orthonormalize(
            eig.eigenvectors.column(idx).into_owned(),
            &basis,
            &null_vectors,
        ) else {
            continue;
        };
        let xb = &x * &b;
        let lam = xb.norm();
        if lam > null_thr && basis.len() + 2 <= dim {
            let a = orthonormalize(&xb / lam, &basis, &null_vectors).unwrap_or_else(|| &xb / lam);
            basis.push(a);
            basis.push(b);
            lambdas.push(lam);
        } else {
            null_vectors.push(b);
        }
    }
    // Complete the null space with the standard basis if rounding lost vectors.
    let mut e = 0;
    while basis.len() + null_vectors.len() < dim && e < dim {
        let mut unit = DVector::zeros(dim);
        unit[e] = 1.0;
        if let Some(v) = orthonormalize(unit, &basis, &null_vectors) {
            null_vectors.push(v);
        }
        e += 1;
    }
    for pair in null_vectors.chunks(2) {
        basis.extend(pair.iter().cloned());
        lambdas.push(0.0);
    }

    let mut q = RealMatrix::zeros(dim, dim);
    for (row, v) in basis.iter().enumerate() {
        q.set_row(row, &v.transpose());
    }
    Ok(SkewCanonicalForm { q, lambdas })
}

/// Two passes of Gram-Schmidt against `a ∪ b`; `None` if little is left.
fn orthonormalize(
    mut v: DVector<f64>,
    a: &[DVector<f64>],
    b: &[DVector<f64>],
) -> Option<DVector<f64>> {
    let start = v.norm();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for u in a.iter().chain(b.iter()) {
            let c = u.dot(&v);
            v.axpy(-c, u, 1.0);
        }
    }
    let left = v.norm();
    if left < 0.5 * start {
        None
    } else {
        Some(v / left)
    }
}
