use thiserror::Error;

use crate::qsys::RealizabilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {0} is odd; a 2n x 2n matrix is required")]
    DimensionOdd(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not skew-symmetric (residual {residual:.3e})")]
    NotSkewSymmetric { residual: f64 },

    /// `prefix` is 1-based: `RankDeficientPrefix(1)` means the leading
    /// column pair is skew-orthogonal.
    #[error("skew-Gram prefix N_{0} is rank deficient; no symplectic QR decomposition exists")]
    RankDeficientPrefix(usize),

    #[error("input matrix is numerically singular")]
    SingularInput,

    #[error(
        "matrix is not diagonalizable within tolerance (eigenvector condition {condition:.3e})"
    )]
    DefectiveMatrix { condition: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenSolverFailed,

    #[error("no admissible real Jordan basis found after {attempts} attempts")]
    NotAdmissible { attempts: usize },

    #[error("entry above the 2x2 block diagonal is {max_entry:.3e}, exceeding zero tolerance {zero_tol:.3e}")]
    TriangularizationResidual { max_entry: f64, zero_tol: f64 },

    #[error("scattering matrix is not unitary (residual {residual:.3e})")]
    NonUnitaryScattering { residual: f64 },

    #[error("system is not physically realizable: {0}")]
    NotRealizable(RealizabilityReport),

    #[error("transformation is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("resolvent (sI - A) is singular at s = {re} + {im}i")]
    ResolventSingular { re: f64, im: f64 },

    #[error("channel count mismatch: {0} vs {1}")]
    ChannelMismatch(usize, usize),

    #[error("systems with fewer outputs than inputs are not supported")]
    FewerOutputsThanInputs,

    #[error("cascade verification failed: max relative transfer deviation {0:.3e}")]
    VerificationFailed(f64),
}
