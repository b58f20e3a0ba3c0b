//! Symplectic Schur decomposition `A = S⁻¹ U S` with `U` lower 2x2 block
//! triangular.
//!
//! An admissible real Jordan basis `Ṽ` is factored as `Ṽ = S₁ Y`; then
//! `S = P S₁⁻¹` with `P` the pair-reversal permutation, so that
//! `S A S⁻¹ = P (Y J Y⁻¹) Pᵀ` turns upper block structure into lower.

use crate::error::{Error, Result};
use crate::linalg::{
    block_reversal_permutation, ensure_finite, ensure_square_even, max_above_block_diagonal,
    max_abs, max_below_block_diagonal, symplectic_inverse, zero_above_block_diagonal,
    zero_below_block_diagonal, RealMatrix,
};
use crate::realjordan::{
    admissible_basis_search, check_admissibility, JordanBlock, RealJordanForm, SearchOptions,
};
use crate::sympqr::symplectic_qr;

#[derive(Debug, Clone, PartialEq)]
pub struct SchurResult {
    /// Symplectic transform `S = P S₁⁻¹`.
    pub s: RealMatrix,
    /// `S A S⁻¹`, lower 2x2 block triangular with exact structural zeros.
    pub u: RealMatrix,
    pub jordan: RealJordanForm,
    pub s1: RealMatrix,
    pub y: RealMatrix,
    /// Basis-search attempts used (1 when the basis was pinned).
    pub attempts: usize,
}

pub fn symplectic_schur(a: &RealMatrix, opts: &SearchOptions) -> Result<SchurResult> {
    ensure_square_even(a)?;
    ensure_finite(a)?;
    let (jordan, attempts) = match &opts.basis_override {
        Some(v) => (pinned_form(a, v, opts)?, 1),
        None => {
            let (form, report) = admissible_basis_search(a, opts)?;
            (form, report.attempts)
        }
    };
    let mut result = symplectic_schur_from_jordan(a, jordan, opts)?;
    result.attempts = attempts;
    Ok(result)
}

/// Completes the decomposition from an already admissible Jordan form.
pub fn symplectic_schur_from_jordan(
    a: &RealMatrix,
    jordan: RealJordanForm,
    opts: &SearchOptions,
) -> Result<SchurResult> {
    let n = ensure_square_even(a)?;
    let tol = opts.rank_tol_for(2 * n);
    let qr = symplectic_qr(&jordan.v, tol)?;
    let p = block_reversal_permutation(n);
    let s = &p * symplectic_inverse(&qr.s);
    let s_inv = &qr.s * p.transpose();
    let mut u = &s * a * s_inv;

    let zero_tol = opts.zero_tol * max_abs(a);
    let above = max_above_block_diagonal(&u);
    if above > zero_tol {
        return Err(Error::TriangularizationResidual {
            max_entry: above,
            zero_tol,
        });
    }
    zero_above_block_diagonal(&mut u);

    Ok(SchurResult {
        s,
        u,
        jordan,
        s1: qr.s,
        y: qr.y,
        attempts: 1,
    })
}

/// Jordan form for a caller-pinned basis: `J = V⁻¹ A V` with entries below
/// the block diagonal required to vanish within the zero tolerance.
fn pinned_form(a: &RealMatrix, v: &RealMatrix, opts: &SearchOptions) -> Result<RealJordanForm> {
    if v.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "basis override is {}x{} but A is {}x{}",
            v.nrows(),
            v.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(v)?;
    let inv = v.clone().try_inverse().ok_or(Error::SingularInput)?;
    let mut j = &inv * a * v;
    let zero_tol = opts.zero_tol * max_abs(a);
    if max_below_block_diagonal(&j) > zero_tol {
        return Err(Error::NotAdmissible { attempts: 1 });
    }
    zero_below_block_diagonal(&mut j);
    let report = check_admissibility(v, &j, None, opts.rank_tol_for(v.nrows()))?;
    if !report.admissible {
        return Err(Error::NotAdmissible { attempts: 1 });
    }
    let blocks = blocks_from_diagonal(&j, zero_tol);
    Ok(RealJordanForm {
        v: v.clone(),
        blocks,
        j,
    })
}

/// Reads the diagonal 2x2 blocks of `j` as Jordan blocks. Only used to
/// describe a pinned basis; `j` itself is kept as computed.
fn blocks_from_diagonal(j: &RealMatrix, zero_tol: f64) -> Vec<JordanBlock> {
    let mut blocks = Vec::new();
    for k in 0..j.nrows() / 2 {
        let (p, q) = (2 * k, 2 * k + 1);
        let lower = j[(q, p)];
        if lower.abs() <= zero_tol {
            blocks.push(JordanBlock::RealEigen(j[(p, p)]));
            blocks.push(JordanBlock::RealEigen(j[(q, q)]));
        } else {
            let re = 0.5 * (j[(p, p)] + j[(q, q)]);
            let det = j[(p, p)] * j[(q, q)] - j[(p, q)] * lower;
            let im = (det - re * re).max(0.0).sqrt();
            blocks.push(JordanBlock::ComplexPair { re, im });
        }
    }
    blocks
}
