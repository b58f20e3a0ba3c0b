//! Series product and cascade realization.
//!
//! A lower 2x2 block triangular `A` means mode `k` only drives modes after
//! it, so the system splits into one-degree-of-freedom oscillators
//! `G_n ◁ … ◁ G_1` with `G_1` carrying the scattering matrix.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    max_above_block_diagonal, symplectic_inverse, zero_above_block_diagonal, ComplexMatrix,
    RealMatrix,
};
use crate::realjordan::SearchOptions;
use crate::sympschur::{symplectic_schur, SchurResult};

use super::model::{
    check_physical_realizability, quadrature_to_sdh, sdh_to_quadrature, transform, QuadSystem,
    SdhSystem,
};
use super::transfer::{default_frequency_grid, relative_deviation, transfer_function};

/// `G₂ ◁ G₁ = (S₂S₁, L₂ + S₂L₁, H₁ + H₂ + Im{L₂† S₂ L₁})` on a shared
/// quadrature space.
///
/// As an operator, `Im{L₂†S₂L₁} = xᵀ M x` with `M = sym(Im{K₂†S₂K₁})` up to a
/// c-number commutator constant, which is dropped. Matching `½ xᵀ R x`
/// gives the Hamiltonian increment `2M = Im{K₂†S₂K₁} + Im{K₂†S₂K₁}ᵀ`.
pub fn series_product(g2: &SdhSystem, g1: &SdhSystem) -> Result<SdhSystem> {
    if g2.m() != g1.m() {
        return Err(Error::ChannelMismatch(g2.m(), g1.m()));
    }
    if g2.n() != g1.n() {
        return Err(Error::DimensionMismatch(format!(
            "series product needs a shared quadrature space; got n = {} and n = {}",
            g2.n(),
            g1.n()
        )));
    }
    let s2 = g2.scattering();
    let s = s2 * g1.scattering();
    let k = g2.coupling() + s2 * g1.coupling();
    let cross = (g2.coupling().adjoint() * s2 * g1.coupling()).map(|z| z.im);
    let r = g1.hamiltonian() + g2.hamiltonian() + &cross + cross.transpose();
    Ok(SdhSystem::from_parts_unchecked(s, k, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneDofSystem {
    pub scattering: ComplexMatrix,
    /// `m x 2` coupling on this oscillator's `(q, p)`.
    pub coupling: ComplexMatrix,
    /// Symmetric `2 x 2` Hamiltonian block.
    pub hamiltonian: RealMatrix,
}

impl OneDofSystem {
    /// Coefficient `c` in `H = c (q p + p q)` plus diagonal terms; equals
    /// half the off-diagonal Hamiltonian entry.
    pub fn qp_coefficient(&self) -> f64 {
        0.5 * self.hamiltonian[(0, 1)]
    }

    /// Places this oscillator at pair `slot` of an `n`-mode space.
    pub fn embed(&self, slot: usize, n: usize) -> SdhSystem {
        let m = self.scattering.nrows();
        let mut k = ComplexMatrix::zeros(m, 2 * n);
        k.columns_mut(2 * slot, 2).copy_from(&self.coupling);
        let mut r = RealMatrix::zeros(2 * n, 2 * n);
        r.view_mut((2 * slot, 2 * slot), (2, 2))
            .copy_from(&self.hamiltonian);
        SdhSystem::from_parts_unchecked(self.scattering.clone(), k, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRealization {
    /// `G₁ … G_n` in signal order: the output of `G_k` feeds `G_{k+1}`.
    pub subsystems: Vec<OneDofSystem>,
    /// Symplectic `T` with `z = T x`.
    pub transform: RealMatrix,
    /// The transformed system `(TAT⁻¹, TB, CT⁻¹, D)`.
    pub transformed: QuadSystem,
    /// `None` for single-mode systems, which need no triangularization.
    pub schur: Option<SchurResult>,
    /// Original pair index of each cascade stage in the transformed
    /// coordinates; identity because the reversal is folded into `T`.
    pub pair_order: Vec<usize>,
    pub verification: VerificationReport,
}

impl CascadeRealization {
    /// `G_n ◁ … ◁ G_1` on the transformed coordinates.
    pub fn compose(&self) -> Result<SdhSystem> {
        let n = self.subsystems.len();
        let mut acc: Option<SdhSystem> = None;
        for (slot, sub) in self.subsystems.iter().enumerate() {
            let g = sub.embed(slot, n);
            acc = Some(match acc {
                None => g,
                Some(prev) => series_product(&g, &prev)?,
            });
        }
        acc.ok_or_else(|| Error::DimensionMismatch("empty cascade".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOptions {
    pub search: SearchOptions,
    pub realizability_tol: f64,
    pub verify_tol: f64,
    /// Verification frequencies; `None` uses [`default_frequency_grid`].
    pub freqs: Option<Vec<Complex64>>,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            realizability_tol: 1e-8,
            verify_tol: 1e-6,
            freqs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyCheck {
    pub s: [f64; 2],
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<FrequencyCheck>,
    /// Frequencies at which either resolvent was singular.
    pub skipped: Vec<[f64; 2]>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares `Ξ` of two systems over `freqs`.
pub fn verify_transfer_equivalence(
    original: &QuadSystem,
    candidate: &QuadSystem,
    freqs: &[Complex64],
    tol: f64,
) -> Result<VerificationReport> {
    if original.m() != candidate.m() {
        return Err(Error::ChannelMismatch(original.m(), candidate.m()));
    }
    let mut checks = Vec::with_capacity(freqs.len());
    let mut skipped = Vec::new();
    for &s in freqs {
        match (
            transfer_function(original, s),
            transfer_function(candidate, s),
        ) {
            (Ok(x0), Ok(x1)) => checks.push(FrequencyCheck {
                s: [s.re, s.im],
                deviation: relative_deviation(&x1, &x0),
            }),
            (Err(Error::ResolventSingular { .. }), _)
            | (_, Err(Error::ResolventSingular { .. })) => skipped.push([s.re, s.im]),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let max_deviation = checks.iter().fold(0.0_f64, |acc, c| acc.max(c.deviation));
    let pass = !checks.is_empty() && max_deviation <= tol;
    Ok(VerificationReport {
        checks,
        skipped,
        max_deviation,
        tol,
        pass,
    })
}

/// Composes the cascade by series products and compares its transfer
/// function with `original`.
pub fn verify_cascade(
    original: &QuadSystem,
    casc: &CascadeRealization,
    freqs: &[Complex64],
    tol: f64,
) -> Result<VerificationReport> {
    let composite = sdh_to_quadrature(&casc.compose()?);
    verify_transfer_equivalence(original, &composite, freqs, tol)
}

pub fn cascade_realize(g: &QuadSystem, opts: &CascadeOptions) -> Result<CascadeRealization> {
    let report = check_physical_realizability(g, opts.realizability_tol);
    if !report.passes() {
        return Err(Error::NotRealizable(report));
    }
    let n = g.n();
    let sdh = quadrature_to_sdh(g, opts.realizability_tol)?;

    let (t, schur) = if n == 1 {
        (RealMatrix::identity(2, 2), None)
    } else {
        let schur = symplectic_schur(&g.a, &opts.search)?;
        (schur.s.clone(), Some(schur))
    };

    let mut transformed = transform(g, &t, 1e-8)?;
    if let Some(schur) = &schur {
        transformed.a = schur.u.clone();
    }
    // Structural zeros are already exact when `u` came from the Schur step.
    if max_above_block_diagonal(&transformed.a) != 0.0 {
        zero_above_block_diagonal(&mut transformed.a);
    }

    let t_inv = symplectic_inverse(&t);
    let k_t = sdh.coupling() * t_inv.map(|x| Complex64::new(x, 0.0));
    let r_t = t_inv.transpose() * sdh.hamiltonian() * &t_inv;
    let r_t = (&r_t + r_t.transpose()) * 0.5;

    let m = g.m();
    let subsystems: Vec<OneDofSystem> = (0..n)
        .map(|k| OneDofSystem {
            scattering: if k == 0 {
                sdh.scattering().clone()
            } else {
                ComplexMatrix::identity(m, m)
            },
            coupling: k_t.columns(2 * k, 2).into_owned(),
            hamiltonian: r_t.view((2 * k, 2 * k), (2, 2)).into_owned(),
        })
        .collect();

    let freqs = opts
        .freqs
        .clone()
        .unwrap_or_else(|| default_frequency_grid(&g.a));
    let mut casc = CascadeRealization {
        subsystems,
        transform: t,
        transformed,
        schur,
        pair_order: (0..n).collect(),
        verification: VerificationReport {
            checks: Vec::new(),
            skipped: Vec::new(),
            max_deviation: 0.0,
            tol: opts.verify_tol,
            pass: false,
        },
    };
    let verification = verify_cascade(g, &casc, &freqs, opts.verify_tol)?;
    if !verification.pass {
        return Err(Error::VerificationFailed(verification.max_deviation));
    }
    casc.verification = verification;
    Ok(casc)
}
