//! C ABI for `sympcascade`.
//!
//! Matrices, systems and cascades are opaque heap handles released with
//! their `*_free` function. Every fallible call returns an [`SqStatus`];
//! on failure [`sq_last_error`] describes the problem for the calling
//! thread. Dense buffers are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use sympcascade::linalg::{is_symplectic, symplectic_form};
use sympcascade::qsys::{
    cascade_realize, check_physical_realizability, transfer_function, CascadeOptions,
    CascadeRealization, QuadSystem,
};
use sympcascade::realjordan::SearchOptions;
use sympcascade::sympqr::symplectic_qr;
use sympcascade::sympschur::symplectic_schur;
use sympcascade::{Error, RealMatrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    RankDeficientPrefix = 5,
    SingularInput = 6,
    DefectiveMatrix = 7,
    NotAdmissible = 8,
    TriangularizationResidual = 9,
    NotRealizable = 10,
    NotSymplectic = 11,
    ResolventSingular = 12,
    VerificationFailed = 13,
    BufferTooSmall = 14,
    Internal = 15,
}

impl From<&Error> for SqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionOdd(_)
            | Error::DimensionMismatch(_)
            | Error::ChannelMismatch(..)
            | Error::FewerOutputsThanInputs => SqStatus::DimensionMismatch,
            Error::NonFinite => SqStatus::NonFinite,
            Error::RankDeficientPrefix(_) => SqStatus::RankDeficientPrefix,
            Error::SingularInput => SqStatus::SingularInput,
            Error::DefectiveMatrix { .. } | Error::EigenSolverFailed => SqStatus::DefectiveMatrix,
            Error::NotAdmissible { .. } => SqStatus::NotAdmissible,
            Error::TriangularizationResidual { .. } => SqStatus::TriangularizationResidual,
            Error::NotRealizable(_) | Error::NonUnitaryScattering { .. } => SqStatus::NotRealizable,
            Error::NotSymplectic { .. } | Error::NotSkewSymmetric { .. } => SqStatus::NotSymplectic,
            Error::ResolventSingular { .. } => SqStatus::ResolventSingular,
            Error::VerificationFailed(_) => SqStatus::VerificationFailed,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SqStatus, msg: impl Into<String>) -> SqStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SqStatus {
    let status = SqStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`SqStatus::Internal`].
fn guard(f: impl FnOnce() -> SqStatus) -> SqStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SqStatus::Internal, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Opaque real matrix.
pub struct SqMatrix(RealMatrix);

/// Opaque `(A, B, C, D)` system.
pub struct SqQuadSystem(QuadSystem);

/// Opaque cascade realization.
pub struct SqCascade(CascadeRealization);

/// Basis-search settings. Non-positive tolerances select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SqSearchOptions {
    pub max_attempts: usize,
    pub seed: u64,
    pub rank_tol: f64,
    pub zero_tol: f64,
}

impl SqSearchOptions {
    fn to_options(self) -> SearchOptions {
        let d = SearchOptions::default();
        SearchOptions {
            max_attempts: if self.max_attempts == 0 {
                d.max_attempts
            } else {
                self.max_attempts
            },
            seed: self.seed,
            rank_tol: (self.rank_tol > 0.0).then_some(self.rank_tol),
            zero_tol: if self.zero_tol > 0.0 {
                self.zero_tol
            } else {
                d.zero_tol
            },
            ..d
        }
    }
}

#[no_mangle]
pub extern "C" fn sq_search_options_default() -> SqSearchOptions {
    let d = SearchOptions::default();
    SqSearchOptions {
        max_attempts: d.max_attempts,
        seed: d.seed,
        rank_tol: 0.0,
        zero_tol: d.zero_tol,
    }
}

fn out_handle<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before reaching here.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

unsafe fn matrix_ref<'a>(m: *const SqMatrix) -> Option<&'a RealMatrix> {
    m.as_ref().map(|m| &m.0)
}

/// Copies a `rows x cols` row-major buffer into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut SqMatrix,
) -> SqStatus {
    guard(|| {
        let Some(len) = rows.checked_mul(cols) else {
            return fail(SqStatus::InvalidArgument, "dimensions overflow");
        };
        if out.is_null() || (data.is_null() && len > 0) {
            return fail(SqStatus::NullPointer, "null argument");
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(data, len)
        };
        out_handle(out, SqMatrix(RealMatrix::from_row_slice(rows, cols, slice)));
        SqStatus::Ok
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_free(m: *mut SqMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_rows(m: *const SqMatrix) -> usize {
    matrix_ref(m).map_or(0, |m| m.nrows())
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_cols(m: *const SqMatrix) -> usize {
    matrix_ref(m).map_or(0, |m| m.ncols())
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_get(
    m: *const SqMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let (Some(m), false) = (matrix_ref(m), out.is_null()) else {
            return fail(SqStatus::NullPointer, "null argument");
        };
        if row >= m.nrows() || col >= m.ncols() {
            return fail(
                SqStatus::InvalidArgument,
                format!("index ({row}, {col}) out of range"),
            );
        }
        *out = m[(row, col)];
        SqStatus::Ok
    })
}

/// Copies the matrix row-major into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sq_matrix_copy(m: *const SqMatrix, buf: *mut f64, len: usize) -> SqStatus {
    guard(|| {
        let (Some(m), false) = (matrix_ref(m), buf.is_null()) else {
            return fail(SqStatus::NullPointer, "null argument");
        };
        let need = m.nrows() * m.ncols();
        if len < need {
            return fail(
                SqStatus::BufferTooSmall,
                format!("buffer holds {len}, need {need}"),
            );
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[i * m.ncols() + j] = m[(i, j)];
            }
        }
        SqStatus::Ok
    })
}

/// The `2n x 2n` symplectic form.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_symplectic_form(n: usize, out: *mut *mut SqMatrix) -> SqStatus {
    guard(|| {
        if out.is_null() {
            return fail(SqStatus::NullPointer, "null argument");
        }
        out_handle(out, SqMatrix(symplectic_form(n).into_matrix()));
        SqStatus::Ok
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_is_symplectic(
    m: *const SqMatrix,
    tol: f64,
    out: *mut bool,
) -> SqStatus {
    guard(|| {
        let (Some(m), false) = (matrix_ref(m), out.is_null()) else {
            return fail(SqStatus::NullPointer, "null argument");
        };
        match is_symplectic(m, tol) {
            Ok(b) => {
                *out = b;
                SqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// `V = S Y`. A non-positive `tol` selects the default. On
/// [`SqStatus::RankDeficientPrefix`], `failing_prefix` (if non-null)
/// receives the 1-based prefix index.
///
/// # Safety
/// `v` must be a live handle; `out_s` and `out_y` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_symplectic_qr(
    v: *const SqMatrix,
    tol: f64,
    out_s: *mut *mut SqMatrix,
    out_y: *mut *mut SqMatrix,
    failing_prefix: *mut usize,
) -> SqStatus {
    guard(|| {
        let Some(v) = matrix_ref(v) else {
            return fail(SqStatus::NullPointer, "null matrix");
        };
        if out_s.is_null() || out_y.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let tol = if tol > 0.0 {
            tol
        } else {
            sympcascade::linalg::default_rank_tol(v.nrows())
        };
        match symplectic_qr(v, tol) {
            Ok(qr) => {
                out_handle(out_s, SqMatrix(qr.s));
                out_handle(out_y, SqMatrix(qr.y));
                SqStatus::Ok
            }
            Err(e) => {
                if let (Error::RankDeficientPrefix(k), false) = (&e, failing_prefix.is_null()) {
                    *failing_prefix = *k;
                }
                from_error(e)
            }
        }
    })
}

/// `A = S⁻¹ U S`. `opts` and `basis_override` may be null.
///
/// # Safety
/// Handles must be live or null where allowed; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sq_symplectic_schur(
    a: *const SqMatrix,
    opts: *const SqSearchOptions,
    basis_override: *const SqMatrix,
    out_s: *mut *mut SqMatrix,
    out_u: *mut *mut SqMatrix,
) -> SqStatus {
    guard(|| {
        let Some(a) = matrix_ref(a) else {
            return fail(SqStatus::NullPointer, "null matrix");
        };
        if out_s.is_null() || out_u.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let mut search = opts
            .as_ref()
            .map_or_else(SearchOptions::default, |o| o.to_options());
        search.basis_override = matrix_ref(basis_override).cloned();
        match symplectic_schur(a, &search) {
            Ok(r) => {
                out_handle(out_s, SqMatrix(r.s));
                out_handle(out_u, SqMatrix(r.u));
                SqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a system from copies of the four matrices.
///
/// # Safety
/// All handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_quad_system_new(
    a: *const SqMatrix,
    b: *const SqMatrix,
    c: *const SqMatrix,
    d: *const SqMatrix,
    out: *mut *mut SqQuadSystem,
) -> SqStatus {
    guard(|| {
        let (Some(a), Some(b), Some(c), Some(d)) =
            (matrix_ref(a), matrix_ref(b), matrix_ref(c), matrix_ref(d))
        else {
            return fail(SqStatus::NullPointer, "null matrix");
        };
        if out.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        match QuadSystem::new(a.clone(), b.clone(), c.clone(), d.clone()) {
            Ok(g) => {
                out_handle(out, SqQuadSystem(g));
                SqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_quad_system_free(g: *mut SqQuadSystem) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the three relative realizability residuals and whether all are
/// within `tol`.
///
/// # Safety
/// `g` must be live; `residuals` valid for 3 writes; `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_check_realizability(
    g: *const SqQuadSystem,
    tol: f64,
    residuals: *mut f64,
    pass: *mut bool,
) -> SqStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return fail(SqStatus::NullPointer, "null system");
        };
        if residuals.is_null() || pass.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let r = check_physical_realizability(&g.0, tol);
        std::slice::from_raw_parts_mut(residuals, 3).copy_from_slice(&r.residuals);
        *pass = r.passes();
        SqStatus::Ok
    })
}

/// Evaluates the `2m x 2m` transfer function at `re + i·im` into
/// row-major real and imaginary buffers of `len` doubles each.
///
/// # Safety
/// `g` must be live; buffers valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sq_transfer_function(
    g: *const SqQuadSystem,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> SqStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return fail(SqStatus::NullPointer, "null system");
        };
        if out_re.is_null() || out_im.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let x = match transfer_function(&g.0, Complex64::new(re, im)) {
            Ok(x) => x,
            Err(e) => return from_error(e),
        };
        let need = x.nrows() * x.ncols();
        if len < need {
            return fail(
                SqStatus::BufferTooSmall,
                format!("buffer holds {len}, need {need}"),
            );
        }
        let (bre, bim) = (
            std::slice::from_raw_parts_mut(out_re, need),
            std::slice::from_raw_parts_mut(out_im, need),
        );
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                bre[i * x.ncols() + j] = x[(i, j)].re;
                bim[i * x.ncols() + j] = x[(i, j)].im;
            }
        }
        SqStatus::Ok
    })
}

/// Pure cascade realization. `opts` and `basis_override` may be null.
///
/// # Safety
/// Handles must be live or null where allowed; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_realize(
    g: *const SqQuadSystem,
    opts: *const SqSearchOptions,
    basis_override: *const SqMatrix,
    out: *mut *mut SqCascade,
) -> SqStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return fail(SqStatus::NullPointer, "null system");
        };
        if out.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let mut search = opts
            .as_ref()
            .map_or_else(SearchOptions::default, |o| o.to_options());
        search.basis_override = matrix_ref(basis_override).cloned();
        let options = CascadeOptions {
            search,
            ..Default::default()
        };
        match cascade_realize(&g.0, &options) {
            Ok(c) => {
                out_handle(out, SqCascade(c));
                SqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_free(c: *mut SqCascade) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of one-mode stages, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_len(c: *const SqCascade) -> usize {
    c.as_ref().map_or(0, |c| c.0.subsystems.len())
}

/// # Safety
/// `c` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_transform(
    c: *const SqCascade,
    out: *mut *mut SqMatrix,
) -> SqStatus {
    guard(|| {
        let (Some(c), false) = (c.as_ref(), out.is_null()) else {
            return fail(SqStatus::NullPointer, "null argument");
        };
        out_handle(out, SqMatrix(c.0.transform.clone()));
        SqStatus::Ok
    })
}

unsafe fn stage<'a>(
    c: *const SqCascade,
    k: usize,
) -> Result<&'a sympcascade::qsys::OneDofSystem, SqStatus> {
    let c = c
        .as_ref()
        .ok_or_else(|| fail(SqStatus::NullPointer, "null cascade"))?;
    c.0.subsystems.get(k).ok_or_else(|| {
        fail(
            SqStatus::InvalidArgument,
            format!("stage {k} out of range ({} stages)", c.0.subsystems.len()),
        )
    })
}

/// The symmetric `2 x 2` Hamiltonian block of stage `k` (0-based).
///
/// # Safety
/// `c` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_hamiltonian(
    c: *const SqCascade,
    k: usize,
    out: *mut *mut SqMatrix,
) -> SqStatus {
    guard(|| {
        if out.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        match stage(c, k) {
            Ok(s) => {
                out_handle(out, SqMatrix(s.hamiltonian.clone()));
                SqStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// The `m x 2` coupling of stage `k` as row-major real and imaginary parts.
///
/// # Safety
/// `c` must be live; buffers valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_coupling(
    c: *const SqCascade,
    k: usize,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> SqStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return fail(SqStatus::NullPointer, "null output");
        }
        let s = match stage(c, k) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let kmat = &s.coupling;
        let need = kmat.nrows() * kmat.ncols();
        if len < need {
            return fail(
                SqStatus::BufferTooSmall,
                format!("buffer holds {len}, need {need}"),
            );
        }
        let (bre, bim) = (
            std::slice::from_raw_parts_mut(out_re, need),
            std::slice::from_raw_parts_mut(out_im, need),
        );
        for i in 0..kmat.nrows() {
            for j in 0..kmat.ncols() {
                bre[i * kmat.ncols() + j] = kmat[(i, j)].re;
                bim[i * kmat.ncols() + j] = kmat[(i, j)].im;
            }
        }
        SqStatus::Ok
    })
}

/// Largest relative transfer-function deviation found during verification.
///
/// # Safety
/// `c` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sq_cascade_max_deviation(c: *const SqCascade, out: *mut f64) -> SqStatus {
    guard(|| {
        let (Some(c), false) = (c.as_ref(), out.is_null()) else {
            return fail(SqStatus::NullPointer, "null argument");
        };
        *out = c.0.verification.max_deviation;
        SqStatus::Ok
    })
}
