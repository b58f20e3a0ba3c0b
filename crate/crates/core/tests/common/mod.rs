#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use sympcascade::io::Document;
use sympcascade::linalg::{jn, ComplexMatrix, RealMatrix};
use sympcascade::qsys::{QuadSystem, SdhSystem, UNITARY_TOL};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_matrix(name: &str) -> RealMatrix {
    let (doc, _) = Document::load(&fixture_path(name)).expect("fixture loads");
    doc.into_matrix().expect("fixture is a matrix")
}

pub fn fixture_system(name: &str) -> QuadSystem {
    let (doc, _) = Document::load(&fixture_path(name)).expect("fixture loads");
    doc.into_system()
        .expect("fixture is a system")
        .to_quadrature()
        .expect("fixture converts")
}

pub fn expected() -> Value {
    let text = std::fs::read_to_string(fixture_path("reference_values.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn expected_matrix(key: &str) -> RealMatrix {
    let rows: Vec<Vec<f64>> = serde_json::from_value(expected()[key].clone()).unwrap();
    RealMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn expected_complex(key: &str) -> ComplexMatrix {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(expected()[key].clone()).unwrap();
    ComplexMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, r: usize, c: usize) -> RealMatrix {
    RealMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn complex_gaussian(rng: &mut impl Rng, r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(r, c, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

pub fn random_unitary(rng: &mut impl Rng, m: usize) -> ComplexMatrix {
    complex_gaussian(rng, m, m).qr().q()
}

/// `exp(J H)` with `H` random symmetric, scaled so that `‖JH‖₂ ≈ scale`.
pub fn random_symplectic(rng: &mut impl Rng, n: usize, scale: f64) -> RealMatrix {
    let g = gaussian(rng, 2 * n, 2 * n);
    let h = (&g + g.transpose()) * 0.5;
    let x = jn(n) * h;
    let norm = x.norm().max(1e-12);
    (x * (scale / norm)).exp()
}

pub fn random_sdh(rng: &mut impl Rng, n: usize, m: usize) -> SdhSystem {
    let s = random_unitary(rng, m);
    let k = complex_gaussian(rng, m, 2 * n);
    let r = gaussian(rng, 2 * n, 2 * n);
    SdhSystem::new(s, k, (&r + r.transpose()) * 0.5, UNITARY_TOL).unwrap()
}

pub fn relative_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}

/// Overwrites the last column of prefix `k` (1-based) so that it is
/// skew-orthogonal to every earlier column and to itself, which makes
/// `N_k` singular.
pub fn break_prefix(v: &mut RealMatrix, k: usize, rng: &mut impl Rng) {
    let n = v.nrows() / 2;
    let col = 2 * k - 1;
    let j = jn(n);
    // Constraints v_iᵀ J c = 0 for i < col.
    let cons = v.columns(0, col).transpose() * &j;
    let svd = cons.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    // Rows of vt beyond rank span the null space (full SVD needed).
    let full = if vt.nrows() < 2 * n {
        let mut padded = cons.clone();
        padded = padded.insert_rows(col, 2 * n - col, 0.0);
        padded.svd(false, true).v_t.unwrap()
    } else {
        vt
    };
    let mut c = nalgebra::DVector::zeros(2 * n);
    for r in col..2 * n {
        let w: f64 = StandardNormal.sample(rng);
        c += full.row(r).transpose() * w;
    }
    v.set_column(col, &c);
}
