use nalgebra::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RealMatrix};

use super::model::QuadSystem;

fn complexify(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `Ξ(s) = C (sI − A)⁻¹ B + D` via an LU solve.
pub fn transfer_function(g: &QuadSystem, s: Complex64) -> Result<ComplexMatrix> {
    let dim = g.a.nrows();
    let resolvent = ComplexMatrix::identity(dim, dim) * s - complexify(&g.a);
    let singular = || Error::ResolventSingular { re: s.re, im: s.im };

    let lu = resolvent.lu();
    let u = lu.u();
    let (mut umin, mut umax) = (f64::INFINITY, 0.0_f64);
    for k in 0..dim {
        let d = u[(k, k)].norm();
        umin = umin.min(d);
        umax = umax.max(d);
    }
    if dim > 0 && (umin == 0.0 || umin <= 1e3 * f64::EPSILON * umax) {
        return Err(singular());
    }
    let x = lu.solve(&complexify(&g.b)).ok_or_else(singular)?;
    Ok(complexify(&g.c) * x + complexify(&g.d))
}

/// Largest modulus among the eigenvalues of `a`, bounded below by the
/// smallest singular value so that nilpotent matrices still get a scale.
pub fn spectral_radius(a: &RealMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let eigs = a.clone().complex_eigenvalues();
    let rho = eigs.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if rho.is_finite() {
        rho
    } else {
        SVD::new(a.clone(), false, false).singular_values[0]
    }
}

/// Eight points `s = iω` with `ω` log-spaced over `[0.01, 100] · ρ(A)`,
/// followed by the off-axis probe `s = 1 + i`.
pub fn default_frequency_grid(a: &RealMatrix) -> Vec<Complex64> {
    let rho = spectral_radius(a);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let mut grid: Vec<Complex64> = (0..8)
        .map(|k| {
            let exponent = -2.0 + 4.0 * k as f64 / 7.0;
            Complex64::new(0.0, rho * 10f64.powf(exponent))
        })
        .collect();
    grid.push(Complex64::new(1.0, 1.0));
    grid
}

/// `‖Ξ₁ − Ξ₂‖_F / ‖Ξ₂‖_F`, or the absolute difference when `Ξ₂ = 0`.
pub fn relative_deviation(x1: &ComplexMatrix, x2: &ComplexMatrix) -> f64 {
    let diff = (x1 - x2).norm();
    let scale = x2.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_system_returns_feedthrough() {
        let g = QuadSystem::new(
            RealMatrix::zeros(2, 2) - RealMatrix::identity(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::identity(2, 2),
        )
        .unwrap();
        let x = transfer_function(&g, Complex64::new(0.0, 3.0)).unwrap();
        assert_eq!(x, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn pole_is_singular() {
        let g = QuadSystem::new(
            -RealMatrix::identity(2, 2),
            RealMatrix::identity(2, 2),
            RealMatrix::identity(2, 2),
            RealMatrix::identity(2, 2),
        )
        .unwrap();
        assert!(matches!(
            transfer_function(&g, Complex64::new(-1.0, 0.0)),
            Err(Error::ResolventSingular { .. })
        ));
    }

    #[test]
    fn grid_shape() {
        let a = -RealMatrix::identity(2, 2) * 10.0;
        let grid = default_frequency_grid(&a);
        assert_eq!(grid.len(), 9);
        assert!((grid[0].im - 0.1).abs() < 1e-12);
        assert!((grid[7].im - 1000.0).abs() < 1e-9);
        assert_eq!(grid[8], Complex64::new(1.0, 1.0));
    }
}
