//! Real Jordan forms of diagonalizable matrices and the admissibility test
//! that gates the symplectic Schur decomposition.
//!
//! Eigenvalues come from a real Schur iteration. Eigenspaces are recovered
//! as the trailing right singular vectors of `A - λI` (complex for
//! non-real λ), so repeated eigenvalues yield an orthonormal eigenspace
//! basis rather than an arbitrary pick. Defective matrices are rejected.

use nalgebra::{Schur, SVD};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    default_rank_tol, ensure_finite, ensure_square_even, max_abs, max_below_block_diagonal,
    prefix_rank_flags, ComplexMatrix, RealMatrix,
};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_COND_CAP: f64 = 1e8;
pub const DEFAULT_MAX_ATTEMPTS: usize = 64;
pub const DEFAULT_ZERO_TOL: f64 = 1e-7;
/// Relative bound on `‖V J V⁻¹ − A‖_max` for an accepted form.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JordanBlock {
    RealEigen(f64),
    /// `[[re, im], [-im, re]]` with `im > 0`.
    ComplexPair {
        re: f64,
        im: f64,
    },
}

impl JordanBlock {
    pub fn width(&self) -> usize {
        match self {
            JordanBlock::RealEigen(_) => 1,
            JordanBlock::ComplexPair { .. } => 2,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, JordanBlock::RealEigen(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealJordanForm {
    pub v: RealMatrix,
    pub blocks: Vec<JordanBlock>,
    pub j: RealMatrix,
}

impl RealJordanForm {
    /// `V J V⁻¹`, or `None` if `V` is singular.
    pub fn reconstruct(&self) -> Option<RealMatrix> {
        let inv = self.v.clone().try_inverse()?;
        Some(&self.v * &self.j * inv)
    }
}

pub fn assemble_blocks(blocks: &[JordanBlock]) -> RealMatrix {
    let dim: usize = blocks.iter().map(JordanBlock::width).sum();
    let mut j = RealMatrix::zeros(dim, dim);
    let mut at = 0;
    for b in blocks {
        match *b {
            JordanBlock::RealEigen(l) => j[(at, at)] = l,
            JordanBlock::ComplexPair { re, im } => {
                j[(at, at)] = re;
                j[(at, at + 1)] = im;
                j[(at + 1, at)] = -im;
                j[(at + 1, at + 1)] = re;
            }
        }
        at += b.width();
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub max_attempts: usize,
    pub seed: u64,
    /// Relative rank tolerance for the prefix tests; `None` means
    /// `1e-10 · dim`.
    pub rank_tol: Option<f64>,
    pub cluster_tol: f64,
    pub cond_cap: f64,
    /// Relative threshold for hard-zeroing entries that must vanish
    /// structurally, scaled by `‖A‖_max`.
    pub zero_tol: f64,
    /// Pins the real Jordan basis instead of computing one.
    pub basis_override: Option<RealMatrix>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            seed: 0,
            rank_tol: None,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            cond_cap: DEFAULT_COND_CAP,
            zero_tol: DEFAULT_ZERO_TOL,
            basis_override: None,
        }
    }
}

impl SearchOptions {
    pub fn rank_tol_for(&self, dim: usize) -> f64 {
        self.rank_tol.unwrap_or_else(|| default_rank_tol(dim))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// 1-based index of the first rank-deficient prefix `N_i`.
    pub failing_prefix: Option<usize>,
    pub block_triangular: bool,
    pub reconstruction_residual: Option<f64>,
    pub attempts: usize,
    pub seed: u64,
}

/// Admissibility of a caller-supplied pair `(V, J)`: every
/// prefix `N_i` full rank, `J` upper 2x2 block triangular and, when `a` is
/// given, `V J V⁻¹ ≈ A`.
pub fn check_admissibility(
    v: &RealMatrix,
    j: &RealMatrix,
    a: Option<&RealMatrix>,
    tol: f64,
) -> Result<AdmissibilityReport> {
    ensure_square_even(v)?;
    if j.shape() != v.shape() {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{} but J is {}x{}",
            v.nrows(),
            v.ncols(),
            j.nrows(),
            j.ncols()
        )));
    }
    if let Some(a) = a {
        if a.shape() != v.shape() {
            return Err(Error::DimensionMismatch("A and V differ in shape".into()));
        }
    }
    let flags = prefix_rank_flags(v, tol)?;
    let failing_prefix = flags.iter().position(|ok| !ok).map(|k| k + 1);
    let block_triangular = max_below_block_diagonal(j) <= tol * max_abs(j);

    let reconstruction_residual = a.map(|a| match v.clone().try_inverse() {
        Some(inv) => max_abs(&(v * j * inv - a)) / max_abs(a).max(f64::MIN_POSITIVE),
        None => f64::INFINITY,
    });
    let reconstructs = reconstruction_residual.is_none_or(|r| r <= RECONSTRUCTION_TOL);

    Ok(AdmissibilityReport {
        admissible: failing_prefix.is_none() && block_triangular && reconstructs,
        failing_prefix,
        block_triangular,
        reconstruction_residual,
        attempts: 1,
        seed: 0,
    })
}

/// Tries every simultaneous column permutation `(V P, Pᵀ J P)` and reports
/// whether any passes [`check_admissibility`]. Limited to `2n ≤ 10`.
pub fn check_admissibility_over_permutations(
    v: &RealMatrix,
    j: &RealMatrix,
    tol: f64,
) -> Result<AdmissibilityReport> {
    let dim = v.ncols();
    if dim > 10 {
        return Err(Error::DimensionMismatch(format!(
            "exhaustive permutation check is limited to dimension 10, got {dim}"
        )));
    }
    let mut first = check_admissibility(v, j, None, tol)?;
    if first.admissible {
        return Ok(first);
    }
    let mut perm: Vec<usize> = (0..dim).collect();
    let mut attempts = 1;
    while next_permutation(&mut perm) {
        attempts += 1;
        let vp = v.select_columns(&perm);
        let jp = j.select_rows(&perm).select_columns(&perm);
        let report = check_admissibility(&vp, &jp, None, tol)?;
        if report.admissible {
            return Ok(AdmissibilityReport { attempts, ..report });
        }
    }
    first.attempts = attempts;
    Ok(first)
}

/// Lexicographic successor; returns false at the last permutation.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let k = (i + 1..p.len()).rev().find(|&k| p[k] > p[i]).unwrap();
    p.swap(i, k);
    p[i + 1..].reverse();
    true
}

#[derive(Debug, Clone)]
enum UnitBasis {
    Real(nalgebra::DVector<f64>),
    Complex(nalgebra::DVector<Complex64>),
}

#[derive(Debug, Clone)]
struct EigenUnit {
    block: JordanBlock,
    basis: UnitBasis,
    cluster: usize,
}

#[derive(Debug, Clone)]
struct Eigenstructure {
    units: Vec<EigenUnit>,
    cluster_sizes: Vec<usize>,
}

impl Eigenstructure {
    fn has_repeated(&self) -> bool {
        self.cluster_sizes.iter().any(|&k| k > 1)
    }

    fn assemble(&self, order: &[usize]) -> (RealMatrix, Vec<JordanBlock>) {
        let dim = self
            .units
            .first()
            .map(|u| match &u.basis {
                UnitBasis::Real(x) => x.len(),
                UnitBasis::Complex(w) => w.len(),
            })
            .unwrap_or(0);
        let mut v = RealMatrix::zeros(dim, dim);
        let mut blocks = Vec::with_capacity(order.len());
        let mut at = 0;
        for &idx in order {
            let unit = &self.units[idx];
            match &unit.basis {
                UnitBasis::Real(x) => {
                    v.set_column(at, x);
                }
                UnitBasis::Complex(w) => {
                    let (x, y) = real_pair(w);
                    v.set_column(at, &x);
                    v.set_column(at + 1, &y);
                }
            }
            at += unit.block.width();
            blocks.push(unit.block);
        }
        (v, blocks)
    }

    /// Replaces each repeated eigenspace basis by a random orthogonal
    /// (unitary, for complex clusters) recombination.
    fn remixed(&self, rng: &mut ChaCha8Rng) -> Self {
        let mut out = self.clone();
        for (cluster, &size) in self.cluster_sizes.iter().enumerate() {
            if size < 2 {
                continue;
            }
            let members: Vec<usize> = (0..self.units.len())
                .filter(|&i| self.units[i].cluster == cluster)
                .collect();
            match &self.units[members[0]].basis {
                UnitBasis::Real(_) => {
                    let q = random_orthogonal(size, rng);
                    for (col, &dst) in members.iter().enumerate() {
                        let mut acc = nalgebra::DVector::zeros(match &self.units[dst].basis {
                            UnitBasis::Real(x) => x.len(),
                            UnitBasis::Complex(_) => unreachable!(),
                        });
                        for (row, &src) in members.iter().enumerate() {
                            if let UnitBasis::Real(x) = &self.units[src].basis {
                                acc.axpy(q[(row, col)], x, 1.0);
                            }
                        }
                        out.units[dst].basis = UnitBasis::Real(sign_normalized(acc));
                    }
                }
                UnitBasis::Complex(_) => {
                    let q = random_unitary(size, rng);
                    for (col, &dst) in members.iter().enumerate() {
                        let len = match &self.units[dst].basis {
                            UnitBasis::Complex(w) => w.len(),
                            UnitBasis::Real(_) => unreachable!(),
                        };
                        let mut acc = nalgebra::DVector::<Complex64>::zeros(len);
                        for (row, &src) in members.iter().enumerate() {
                            if let UnitBasis::Complex(w) = &self.units[src].basis {
                                acc += w * q[(row, col)];
                            }
                        }
                        let norm = acc.norm();
                        out.units[dst].basis = UnitBasis::Complex(acc / Complex64::new(norm, 0.0));
                    }
                }
            }
        }
        out
    }
}

fn random_orthogonal(k: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
    let g = RealMatrix::from_fn(k, k, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for c in 0..k {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

fn random_unitary(k: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(k, k, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    g.qr().q()
}

fn sign_normalized(x: nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let x = &x / x.norm();
    let thr = 1e-10 * x.amax();
    match x.iter().find(|c| c.abs() > thr) {
        Some(&c) if c < 0.0 => -x,
        _ => x,
    }
}

/// Real column pair `(√2 Re w', √2 Im w')` of a unit complex eigenvector,
/// where `w' = e^{iθ} w` is rotated so both columns have unit norm and the
/// first significant entry of the real part is positive.
fn real_pair(w: &nalgebra::DVector<Complex64>) -> (nalgebra::DVector<f64>, nalgebra::DVector<f64>) {
    let z: Complex64 = w.iter().map(|c| c * c).sum();
    let theta = if z.norm() > 0.0 {
        0.5 * (std::f64::consts::FRAC_PI_2 - z.arg())
    } else {
        0.0
    };
    let rot = Complex64::from_polar(1.0, theta);
    let w = w * rot;
    let mut x = w.map(|c| c.re);
    let mut y = w.map(|c| c.im);
    let thr = 1e-10 * x.amax();
    if let Some(&c) = x.iter().find(|c| c.abs() > thr) {
        if c < 0.0 {
            x.neg_mut();
            y.neg_mut();
        }
    }
    let (nx, ny) = (x.norm(), y.norm());
    (x / nx, y / ny)
}

fn eigenstructure(a: &RealMatrix, cluster_tol: f64) -> Result<Eigenstructure> {
    let dim = a.nrows();
    let norm = a.norm();
    let thr = cluster_tol * norm;
    let defect_thr = cluster_tol.sqrt().max(1e3 * cluster_tol) * norm.max(f64::MIN_POSITIVE);

    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000 * dim.max(1))
        .ok_or(Error::EigenSolverFailed)?;
    let eigs = schur.complex_eigenvalues();

    let mut reals: Vec<f64> = Vec::new();
    let mut complexes: Vec<Complex64> = Vec::new();
    for e in eigs.iter() {
        if e.im.abs() <= thr {
            reals.push(e.re);
        } else if e.im > 0.0 {
            complexes.push(*e);
        }
    }
    if reals.len() + 2 * complexes.len() != dim {
        return Err(Error::EigenSolverFailed);
    }
    reals.sort_by(f64::total_cmp);
    complexes.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));

    let mut units = Vec::with_capacity(dim);
    let mut cluster_sizes = Vec::new();

    // Real eigenvalues: single-linkage clusters on the sorted list.
    let mut start = 0;
    while start < reals.len() {
        let mut end = start + 1;
        while end < reals.len() && reals[end] - reals[end - 1] <= thr {
            end += 1;
        }
        let members = &reals[start..end];
        let k = members.len();
        let lambda = members.iter().sum::<f64>() / k as f64;
        let shifted = a - RealMatrix::identity(dim, dim) * lambda;
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.ok_or(Error::EigenSolverFailed)?;
        if svd.singular_values[dim - k] > defect_thr {
            return Err(Error::DefectiveMatrix {
                condition: f64::INFINITY,
            });
        }
        let cluster = cluster_sizes.len();
        for (slot, &val) in members.iter().enumerate() {
            let x = v_t.row(dim - k + slot).transpose();
            let value = if k > 1 { lambda } else { val };
            units.push(EigenUnit {
                block: JordanBlock::RealEigen(value),
                basis: UnitBasis::Real(sign_normalized(x)),
                cluster,
            });
        }
        cluster_sizes.push(k);
        start = end;
    }

    // Complex pairs: greedy clusters by distance.
    let mut taken = vec![false; complexes.len()];
    for i in 0..complexes.len() {
        if taken[i] {
            continue;
        }
        let members: Vec<usize> = (i..complexes.len())
            .filter(|&k| !taken[k] && (complexes[k] - complexes[i]).norm() <= thr)
            .collect();
        for &k in &members {
            taken[k] = true;
        }
        let k = members.len();
        let lambda: Complex64 = members.iter().map(|&m| complexes[m]).sum::<Complex64>() / k as f64;
        let shifted =
            a.map(|x| Complex64::new(x, 0.0)) - ComplexMatrix::identity(dim, dim) * lambda;
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.ok_or(Error::EigenSolverFailed)?;
        if svd.singular_values[dim - k] > defect_thr {
            return Err(Error::DefectiveMatrix {
                condition: f64::INFINITY,
            });
        }
        let cluster = cluster_sizes.len();
        for (slot, &m) in members.iter().enumerate() {
            let w = v_t.row(dim - k + slot).transpose().map(|c| c.conj());
            let value = if k > 1 { lambda } else { complexes[m] };
            units.push(EigenUnit {
                block: JordanBlock::ComplexPair {
                    re: value.re,
                    im: value.im,
                },
                basis: UnitBasis::Complex(w),
                cluster,
            });
        }
        cluster_sizes.push(k);
    }

    Ok(Eigenstructure {
        units,
        cluster_sizes,
    })
}

fn condition_number(v: &RealMatrix) -> f64 {
    let sv = SVD::new(v.clone(), false, false).singular_values;
    let smin = sv[sv.len() - 1];
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / smin
    }
}

fn validate_input(a: &RealMatrix) -> Result<()> {
    ensure_square_even(a)?;
    ensure_finite(a)?;
    if a.nrows() == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    Ok(())
}

fn form_from(
    a: &RealMatrix,
    structure: &Eigenstructure,
    order: &[usize],
    cond_cap: f64,
) -> Result<RealJordanForm> {
    let (v, blocks) = structure.assemble(order);
    let condition = condition_number(&v);
    if condition.is_nan() || condition > cond_cap {
        return Err(Error::DefectiveMatrix { condition });
    }
    let j = assemble_blocks(&blocks);
    let form = RealJordanForm { v, blocks, j };
    let residual = form
        .reconstruct()
        .map(|r| max_abs(&(r - a)))
        .unwrap_or(f64::INFINITY);
    if residual > RECONSTRUCTION_TOL * max_abs(a).max(f64::MIN_POSITIVE) {
        return Err(Error::DefectiveMatrix { condition });
    }
    Ok(form)
}

/// Canonical real Jordan form: real eigenvalues ascending, then complex
/// pairs by `(re, im)`, unit-norm columns. `tol` is the relative eigenvalue
/// clustering threshold.
pub fn real_jordan_simple(a: &RealMatrix, tol: f64) -> Result<RealJordanForm> {
    real_jordan_with_cap(a, tol, DEFAULT_COND_CAP)
}

pub fn real_jordan_with_cap(a: &RealMatrix, tol: f64, cond_cap: f64) -> Result<RealJordanForm> {
    validate_input(a)?;
    let structure = eigenstructure(a, tol)?;
    let order: Vec<usize> = (0..structure.units.len()).collect();
    form_from(a, &structure, &order, cond_cap)
}

/// Deterministic search over block orderings (real group first, then
/// complex) and, for repeated eigenvalues, random eigenspace remixing, until
/// a basis passes [`check_admissibility`].
pub fn admissible_basis_search(
    a: &RealMatrix,
    opts: &SearchOptions,
) -> Result<(RealJordanForm, AdmissibilityReport)> {
    validate_input(a)?;
    let tol = opts.rank_tol_for(a.nrows());
    let base = eigenstructure(a, opts.cluster_tol)?;
    let real_units: Vec<usize> = (0..base.units.len())
        .filter(|&i| base.units[i].block.is_real())
        .collect();
    let complex_units: Vec<usize> = (0..base.units.len())
        .filter(|&i| !base.units[i].block.is_real())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut attempts = 0;
    let mut remix_pass = false;
    let budget = opts.max_attempts.max(1);

    loop {
        let mut real_perm: Vec<usize> = (0..real_units.len()).collect();
        loop {
            let mut complex_perm: Vec<usize> = (0..complex_units.len()).collect();
            loop {
                let structure = if remix_pass {
                    base.remixed(&mut rng)
                } else {
                    base.clone()
                };
                let order: Vec<usize> = real_perm
                    .iter()
                    .map(|&i| real_units[i])
                    .chain(complex_perm.iter().map(|&i| complex_units[i]))
                    .collect();
                attempts += 1;
                let form = form_from(a, &structure, &order, opts.cond_cap)?;
                let report = check_admissibility(&form.v, &form.j, None, tol)?;
                if report.admissible {
                    return Ok((
                        form,
                        AdmissibilityReport {
                            attempts,
                            seed: opts.seed,
                            ..report
                        },
                    ));
                }
                if attempts >= budget {
                    return Err(Error::NotAdmissible { attempts });
                }
                if !next_permutation(&mut complex_perm) {
                    break;
                }
            }
            if !next_permutation(&mut real_perm) {
                break;
            }
        }
        if !base.has_repeated() {
            return Err(Error::NotAdmissible { attempts });
        }
        remix_pass = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_upper_block_triangular, jn};

    fn random(dim: usize, seed: u64) -> RealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng))
    }

    fn nopa_a() -> RealMatrix {
        RealMatrix::from_row_slice(
            4,
            4,
            &[
                -3.6, 0.0, 2.16, 0.0, 0.0, -3.6, 0.0, -2.16, 2.16, 0.0, -3.6, 0.0, 0.0, -2.16, 0.0,
                -3.6,
            ],
        ) * 1e7
    }

    #[test]
    fn permutation_successor_enumerates_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }

    #[test]
    fn diagonal_is_already_canonical() {
        let a = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let f = real_jordan_simple(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(
            f.blocks,
            vec![
                JordanBlock::RealEigen(1.0),
                JordanBlock::RealEigen(2.0),
                JordanBlock::RealEigen(3.0),
                JordanBlock::RealEigen(4.0)
            ]
        );
        assert!(max_abs(&(f.v.abs() - RealMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn rotation_gives_one_complex_pair() {
        let f = real_jordan_simple(&jn(1), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(f.blocks.len(), 1);
        let JordanBlock::ComplexPair { re, im } = f.blocks[0] else {
            panic!("expected a complex pair");
        };
        assert!(re.abs() < 1e-14);
        assert!((im - 1.0).abs() < 1e-14);
        assert!(max_abs(&(f.reconstruct().unwrap() - jn(1))) < 1e-12);
    }

    #[test]
    fn nopa_eigenvalues_are_real_and_repeated() {
        let a = nopa_a();
        let f = real_jordan_simple(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let vals: Vec<f64> = f
            .blocks
            .iter()
            .map(|b| match b {
                JordanBlock::RealEigen(l) => *l,
                _ => panic!("complex block"),
            })
            .collect();
        let expected = [-5.76e7, -5.76e7, -1.44e7, -1.44e7];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-6 * 5.76e7, "{v} vs {e}");
        }
        let rec = f.reconstruct().unwrap();
        assert!(max_abs(&(rec - &a)) <= 1e-8 * max_abs(&a));
        // The canonical grouping pairs two eigenvectors of the same isotropic
        // eigenspace, so the first prefix fails.
        let report = check_admissibility(&f.v, &f.j, Some(&a), default_rank_tol(4)).unwrap();
        assert_eq!(report.failing_prefix, Some(1));
    }

    #[test]
    fn nopa_search_interleaves_eigenvalues() {
        let a = nopa_a();
        let (f, report) = admissible_basis_search(&a, &SearchOptions::default()).unwrap();
        assert!(report.admissible);
        assert!(report.attempts > 1);
        let first_pair: Vec<f64> = f.blocks[..2]
            .iter()
            .map(|b| match b {
                JordanBlock::RealEigen(l) => *l,
                _ => unreachable!(),
            })
            .collect();
        assert!((first_pair[0] - first_pair[1]).abs() > 1e7);
        assert!(max_abs(&(f.reconstruct().unwrap() - &a)) <= 1e-8 * max_abs(&a));
    }

    #[test]
    fn diagonal_search_succeeds_first_time() {
        let a = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let (_, report) = admissible_basis_search(&a, &SearchOptions::default()).unwrap();
        assert_eq!(report.attempts, 1);
    }

    #[test]
    fn random_reconstruction_and_ordering() {
        for seed in 0..20 {
            let a = random(6, seed);
            let f = real_jordan_simple(&a, DEFAULT_CLUSTER_TOL).unwrap();
            let rec = f.reconstruct().unwrap();
            assert!(max_abs(&(rec - &a)) <= 1e-8 * max_abs(&a), "seed {seed}");
            let first_complex = f.blocks.iter().position(|b| !b.is_real());
            if let Some(k) = first_complex {
                assert!(f.blocks[k..].iter().all(|b| !b.is_real()));
            }
            for b in &f.blocks {
                if let JordanBlock::ComplexPair { im, .. } = b {
                    assert!(*im > 0.0);
                }
            }
            assert!(is_upper_block_triangular(&f.j));
            for c in 0..6 {
                assert!((f.v.column(c).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = RealMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0,
                -1.0,
            ],
        );
        assert!(matches!(
            real_jordan_simple(&a, DEFAULT_CLUSTER_TOL),
            Err(Error::DefectiveMatrix { .. })
        ));
        assert!(matches!(
            admissible_basis_search(&a, &SearchOptions::default()),
            Err(Error::DefectiveMatrix { .. })
        ));
    }

    #[test]
    fn search_is_deterministic() {
        let a = nopa_a();
        let opts = SearchOptions {
            seed: 17,
            ..Default::default()
        };
        let (f1, r1) = admissible_basis_search(&a, &opts).unwrap();
        let (f2, r2) = admissible_basis_search(&a, &opts).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn identity_basis_with_distinct_diagonal_is_admissible() {
        let v = RealMatrix::identity(4, 4);
        let j = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let r = check_admissibility(&v, &j, None, default_rank_tol(4)).unwrap();
        assert!(r.admissible);
        assert_eq!(r.failing_prefix, None);
    }

    #[test]
    fn shape_mismatch_reported() {
        let v = RealMatrix::identity(4, 4);
        let j = RealMatrix::identity(2, 2);
        assert!(matches!(
            check_admissibility(&v, &j, None, 1e-10),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
