//! Symplectic QR decomposition `V = S Y`: `S` symplectic with respect to
//! `J_n`, `Y` upper 2x2 block triangular.
//!
//! Columns of `V` are consumed two at a time, left to right. Each new pair is
//! made skew-orthogonal to the partial symplectic basis already built and then
//! rescaled so that its own skew product is exactly `J_1`. The transforms
//! applied at each step are accumulated into an upper 2x2 block triangular
//! `X` with `V X = S`, and `Y = X⁻¹` is formed by block back-substitution so
//! that its structural zeros are exact.

use nalgebra::{Matrix2, SVD};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square_even, jn, prefix_rank_flags, RealMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct QrResult {
    pub s: RealMatrix,
    pub y: RealMatrix,
    /// Skew products `μ_j` of the orthogonalized pairs, before rescaling.
    pub mus: Vec<f64>,
    /// `α_j = |μ_j|^{-1/2}`.
    pub alphas: Vec<f64>,
}

pub fn symplectic_qr(v: &RealMatrix, tol: f64) -> Result<QrResult> {
    let n = ensure_square_even(v)?;
    ensure_finite(v)?;
    let dim = 2 * n;
    if dim == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }

    let sv = SVD::new(v.clone(), false, false).singular_values;
    if sv[0] == 0.0 || sv[dim - 1] <= tol * sv[0] {
        return Err(Error::SingularInput);
    }
    if let Some(k) = prefix_rank_flags(v, tol)?.iter().position(|ok| !ok) {
        return Err(Error::RankDeficientPrefix(k + 1));
    }

    let j = jn(n);
    let mut s = RealMatrix::zeros(dim, dim);
    // V X = S, X upper 2x2 block triangular.
    let mut x = RealMatrix::identity(dim, dim);
    let mut mus = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);

    for step in 0..n {
        let m = v.columns(2 * step, 2).into_owned();
        let (z, xi) = if step == 0 {
            (m.clone(), None)
        } else {
            let basis = s.columns(0, 2 * step);
            let xi = jn(step) * basis.transpose() * &j * &m;
            (basis * &xi + &m, Some(xi))
        };

        let mu = (z.column(0).transpose() * &j * z.column(1))[(0, 0)];
        let guard = tol * z.column(0).norm() * z.column(1).norm();
        if mu.abs() <= guard || mu == 0.0 {
            return Err(Error::RankDeficientPrefix(step + 1));
        }
        let alpha = mu.abs().sqrt().recip();
        let sign = mu.signum();
        let scale = Matrix2::new(alpha, 0.0, 0.0, alpha * sign);

        let col = &z * scale;
        s.columns_mut(2 * step, 2).copy_from(&col);

        // Step transform X_j: block column `step` receives
        // [α Ξ_j D; α D] against the current partial basis.
        let mut xj = RealMatrix::identity(dim, dim);
        xj.view_mut((2 * step, 2 * step), (2, 2)).copy_from(&scale);
        if let Some(xi) = xi {
            xj.view_mut((0, 2 * step), (2 * step, 2))
                .copy_from(&(xi * scale));
        }
        x *= xj;

        mus.push(mu);
        alphas.push(alpha);
    }

    let y = invert_upper_block_triangular(&x);
    Ok(QrResult { s, y, mus, alphas })
}

/// Inverse of an invertible upper 2x2 block triangular matrix by block
/// back-substitution; entries below the block diagonal are exactly zero.
pub(crate) fn invert_upper_block_triangular(x: &RealMatrix) -> RealMatrix {
    let n = x.nrows() / 2;
    let block = |m: &RealMatrix, i: usize, k: usize| -> Matrix2<f64> {
        m.fixed_view::<2, 2>(2 * i, 2 * k).into_owned()
    };
    let diag_inv: Vec<Matrix2<f64>> = (0..n)
        .map(|i| block(x, i, i).try_inverse().unwrap_or_else(Matrix2::zeros))
        .collect();

    let mut y = RealMatrix::zeros(2 * n, 2 * n);
    for col in 0..n {
        y.fixed_view_mut::<2, 2>(2 * col, 2 * col)
            .copy_from(&diag_inv[col]);
        for row in (0..col).rev() {
            let mut acc = Matrix2::zeros();
            for k in row + 1..=col {
                acc += block(x, row, k) * block(&y, k, col);
            }
            let v = -diag_inv[row] * acc;
            y.fixed_view_mut::<2, 2>(2 * row, 2 * col).copy_from(&v);
        }
    }
    y
}
