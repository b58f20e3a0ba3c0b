use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite, ensure_square_even, jn, max_abs, max_abs_complex, symplectic_inverse,
    symplectic_residual, ComplexMatrix, RealMatrix,
};

/// Default tolerance for unitarity of the scattering matrix.
pub const UNITARY_TOL: f64 = 1e-9;

/// System given by scattering `S`, coupling `L = K x` and Hamiltonian
/// `H = ½ xᵀ R x` over quadratures `x = (q₁, p₁, …, q_n, p_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdhSystem {
    scattering: ComplexMatrix,
    coupling: ComplexMatrix,
    hamiltonian: RealMatrix,
}

impl SdhSystem {
    /// Validates shapes and unitarity; `hamiltonian` is symmetrized.
    pub fn new(
        scattering: ComplexMatrix,
        coupling: ComplexMatrix,
        hamiltonian: RealMatrix,
        tol: f64,
    ) -> Result<Self> {
        let m = scattering.nrows();
        if scattering.ncols() != m {
            return Err(Error::DimensionMismatch(
                "scattering matrix must be square".into(),
            ));
        }
        let n = ensure_square_even(&hamiltonian)?;
        if coupling.shape() != (m, 2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "coupling must be {}x{}, got {}x{}",
                m,
                2 * n,
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        ensure_finite(&hamiltonian)?;
        if coupling
            .iter()
            .chain(scattering.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let residual =
            max_abs_complex(&(scattering.adjoint() * &scattering - ComplexMatrix::identity(m, m)));
        if residual > tol {
            return Err(Error::NonUnitaryScattering { residual });
        }
        let hamiltonian = (&hamiltonian + hamiltonian.transpose()) * 0.5;
        Ok(Self {
            scattering,
            coupling,
            hamiltonian,
        })
    }

    pub(crate) fn from_parts_unchecked(
        scattering: ComplexMatrix,
        coupling: ComplexMatrix,
        hamiltonian: RealMatrix,
    ) -> Self {
        let hamiltonian = (&hamiltonian + hamiltonian.transpose()) * 0.5;
        Self {
            scattering,
            coupling,
            hamiltonian,
        }
    }

    pub fn n(&self) -> usize {
        self.hamiltonian.nrows() / 2
    }

    pub fn m(&self) -> usize {
        self.scattering.nrows()
    }

    pub fn scattering(&self) -> &ComplexMatrix {
        &self.scattering
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    pub fn hamiltonian(&self) -> &RealMatrix {
        &self.hamiltonian
    }
}

/// Quadrature form `dx = A x dt + B dw`, `dy = C x dt + D dw`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSystem {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

impl QuadSystem {
    pub fn new(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: RealMatrix) -> Result<Self> {
        let n = ensure_square_even(&a)?;
        if d.nrows() < d.ncols() {
            return Err(Error::FewerOutputsThanInputs);
        }
        let m = ensure_square_even(&d)?;
        if b.shape() != (2 * n, 2 * m) || c.shape() != (2 * m, 2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "with n = {n}, m = {m}: B must be {}x{} (got {}x{}), C must be {}x{} (got {}x{})",
                2 * n,
                2 * m,
                b.nrows(),
                b.ncols(),
                2 * m,
                2 * n,
                c.nrows(),
                c.ncols()
            )));
        }
        for mat in [&a, &b, &c, &d] {
            ensure_finite(mat)?;
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn m(&self) -> usize {
        self.d.nrows() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizabilityReport {
    /// Relative residuals of `AJ + JAᵀ + BJBᵀ = 0`, `JCᵀ + BJDᵀ = 0` and
    /// `DJDᵀ = J`.
    pub residuals: [f64; 3],
    pub pass: [bool; 3],
    pub tol: f64,
}

impl RealizabilityReport {
    pub fn passes(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

impl fmt::Display for RealizabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "residuals r1={:.3e} r2={:.3e} r3={:.3e} (tol {:.1e})",
            self.residuals[0], self.residuals[1], self.residuals[2], self.tol
        )
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else {
        residual / scale.max(f64::MIN_POSITIVE)
    }
}

pub fn check_physical_realizability(g: &QuadSystem, tol: f64) -> RealizabilityReport {
    let jn_ = jn(g.n());
    let jm = jn(g.m());
    let (na, nb, nc, nd) = (max_abs(&g.a), max_abs(&g.b), max_abs(&g.c), max_abs(&g.d));

    let e1 = &g.a * &jn_ + &jn_ * g.a.transpose() + &g.b * &jm * g.b.transpose();
    let e2 = &jn_ * g.c.transpose() + &g.b * &jm * g.d.transpose();
    let e3 = &g.d * &jm * g.d.transpose() - &jm;

    let residuals = [
        relative(max_abs(&e1), na.max(nb * nb)),
        relative(max_abs(&e2), nc.max(nb * nd)),
        relative(max_abs(&e3), (nd * nd).max(1.0)),
    ];
    RealizabilityReport {
        residuals,
        pass: residuals.map(|r| r <= tol),
        tol,
    }
}

/// Real 2x2 block `[[Re z, −Im z], [Im z, Re z]]` per complex entry.
pub(crate) fn complex_to_real_blocks(s: &ComplexMatrix) -> RealMatrix {
    let (r, c) = s.shape();
    let mut d = RealMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for k in 0..c {
            let z = s[(i, k)];
            d[(2 * i, 2 * k)] = z.re;
            d[(2 * i, 2 * k + 1)] = -z.im;
            d[(2 * i + 1, 2 * k)] = z.im;
            d[(2 * i + 1, 2 * k + 1)] = z.re;
        }
    }
    d
}

pub(crate) fn im_of_gram(k: &ComplexMatrix) -> RealMatrix {
    (k.adjoint() * k).map(|z| z.im)
}

pub fn sdh_to_quadrature(g: &SdhSystem) -> QuadSystem {
    let (n, m) = (g.n(), g.m());
    let j = jn(n);
    let k = g.coupling();
    let s = g.scattering();

    let a = (&j * (g.hamiltonian() + im_of_gram(k))) * 2.0;

    // B₀ = 2i J [−K†S, KᵀS#], acting on (dA; dA#) with
    // dA_j = ½(dw_{2j−1} + i dw_{2j}).
    let jc = j.map(|x| Complex64::new(x, 0.0));
    let left = -(k.adjoint() * s);
    let right = k.transpose() * s.map(|z| z.conj());
    let mut stacked = ComplexMatrix::zeros(2 * n, 2 * m);
    stacked.columns_mut(0, m).copy_from(&left);
    stacked.columns_mut(m, m).copy_from(&right);
    let b0 = jc * stacked * Complex64::new(0.0, 2.0);
    let mut channel_map = ComplexMatrix::zeros(2 * m, 2 * m);
    for ch in 0..m {
        channel_map[(ch, 2 * ch)] = Complex64::new(0.5, 0.0);
        channel_map[(ch, 2 * ch + 1)] = Complex64::new(0.0, 0.5);
        channel_map[(m + ch, 2 * ch)] = Complex64::new(0.5, 0.0);
        channel_map[(m + ch, 2 * ch + 1)] = Complex64::new(0.0, -0.5);
    }
    let b = (b0 * channel_map).map(|z| z.re);

    let mut c = RealMatrix::zeros(2 * m, 2 * n);
    for ch in 0..m {
        for col in 0..2 * n {
            c[(2 * ch, col)] = 2.0 * k[(ch, col)].re;
            c[(2 * ch + 1, col)] = 2.0 * k[(ch, col)].im;
        }
    }
    let d = complex_to_real_blocks(s);
    QuadSystem { a, b, c, d }
}

pub fn quadrature_to_sdh(g: &QuadSystem, tol: f64) -> Result<SdhSystem> {
    let report = check_physical_realizability(g, tol);
    if !report.passes() {
        return Err(Error::NotRealizable(report));
    }
    let (n, m) = (g.n(), g.m());

    let mut s = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for k in 0..m {
            s[(i, k)] = Complex64::new(g.d[(2 * i, 2 * k)], g.d[(2 * i + 1, 2 * k)]);
        }
    }
    let back = complex_to_real_blocks(&s);
    let residual = max_abs(&(&back - &g.d));
    if residual > tol * max_abs(&g.d).max(1.0) {
        return Err(Error::NonUnitaryScattering { residual });
    }

    let mut k = ComplexMatrix::zeros(m, 2 * n);
    for ch in 0..m {
        for col in 0..2 * n {
            k[(ch, col)] = Complex64::new(g.c[(2 * ch, col)], g.c[(2 * ch + 1, col)]) * 0.5;
        }
    }
    // −½ J A = R + Im{K†K}; the antisymmetric part is fixed by realizability.
    let r = jn(n) * &g.a * -0.5 - im_of_gram(&k);
    SdhSystem::new(s, k, r, tol.max(UNITARY_TOL))
}

/// `(T A T⁻¹, T B, C T⁻¹, D)` for symplectic `T`.
pub fn transform(g: &QuadSystem, t: &RealMatrix, tol: f64) -> Result<QuadSystem> {
    if t.shape() != g.a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "transform is {}x{} but A is {}x{}",
            t.nrows(),
            t.ncols(),
            g.a.nrows(),
            g.a.ncols()
        )));
    }
    let residual = symplectic_residual(t)?;
    if residual > tol * max_abs(t).powi(2).max(1.0) {
        return Err(Error::NotSymplectic { residual });
    }
    let t_inv = symplectic_inverse(t);
    Ok(QuadSystem {
        a: t * &g.a * &t_inv,
        b: t * &g.b,
        c: &g.c * &t_inv,
        d: g.d.clone(),
    })
}
