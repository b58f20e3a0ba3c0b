//! JSON documents for matrices, systems and cascades.
//!
//! Every document carries `schema_version` and a `mode` tag:
//!
//! ```json
//! {"schema_version": 1, "mode": "matrix", "data": [[1.0, 0.0], [0.0, 1.0]]}
//! {"schema_version": 1, "mode": "quadrature", "n": 1, "m": 1, "A": [[..]], "B": .., "C": .., "D": ..}
//! {"schema_version": 1, "mode": "sdh", "n": 1, "m": 1, "S": [[[1, 0]]], "K": [[[re, im], ..]], "R": [[..]]}
//! {"schema_version": 1, "mode": "cascade", "n": 2, "m": 2, "subsystems": [{"S": .., "K": .., "R": ..}, ..]}
//! ```
//!
//! Complex entries are `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, RealMatrix};
use crate::qsys::{
    sdh_to_quadrature, CascadeRealization, OneDofSystem, QuadSystem, SdhSystem, UNITARY_TOL,
};

pub const SCHEMA_VERSION: u32 = 1;

pub type Rows = Vec<Vec<f64>>;
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemDoc {
    #[serde(rename = "S")]
    pub scattering: ComplexRows,
    #[serde(rename = "K")]
    pub coupling: ComplexRows,
    #[serde(rename = "R")]
    pub hamiltonian: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Document {
    Matrix {
        schema_version: u32,
        data: Rows,
    },
    Quadrature {
        schema_version: u32,
        n: usize,
        m: usize,
        #[serde(rename = "A")]
        a: Rows,
        #[serde(rename = "B")]
        b: Rows,
        #[serde(rename = "C")]
        c: Rows,
        #[serde(rename = "D")]
        d: Rows,
    },
    Sdh {
        schema_version: u32,
        n: usize,
        m: usize,
        #[serde(rename = "S")]
        scattering: ComplexRows,
        #[serde(rename = "K")]
        coupling: ComplexRows,
        #[serde(rename = "R")]
        hamiltonian: Rows,
    },
    Cascade {
        schema_version: u32,
        n: usize,
        m: usize,
        subsystems: Vec<SubsystemDoc>,
    },
}

pub fn rows_of(m: &RealMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn complex_rows_of(m: &ComplexMatrix) -> ComplexRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_rows(rows: &Rows, what: &str) -> Result<RealMatrix, FileError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(FileError::Schema(format!("{what}: ragged rows")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(FileError::Schema(format!("{what}: non-finite entry")));
    }
    Ok(RealMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn complex_matrix_from_rows(
    rows: &ComplexRows,
    what: &str,
) -> Result<ComplexMatrix, FileError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(FileError::Schema(format!("{what}: ragged rows")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(FileError::Schema(format!("{what}: non-finite entry")));
    }
    Ok(ComplexMatrix::from_fn(r, c, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn check_shape(m: &RealMatrix, rows: usize, cols: usize, what: &str) -> Result<(), FileError> {
    if m.shape() != (rows, cols) {
        return Err(FileError::Schema(format!(
            "{what} must be {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_version(v: u32) -> Result<(), FileError> {
    if v != SCHEMA_VERSION {
        return Err(FileError::Schema(format!(
            "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// A system document, resolved to its parameterizations.
#[derive(Debug, Clone)]
pub enum SystemInput {
    Quadrature(QuadSystem),
    Sdh(SdhSystem),
    Cascade(Vec<OneDofSystem>),
}

impl SystemInput {
    /// Quadrature form; cascades are composed by series products first.
    pub fn to_quadrature(&self) -> Result<QuadSystem, FileError> {
        Ok(match self {
            SystemInput::Quadrature(q) => q.clone(),
            SystemInput::Sdh(g) => sdh_to_quadrature(g),
            SystemInput::Cascade(subs) => {
                let n = subs.len();
                let mut acc: Option<SdhSystem> = None;
                for (slot, sub) in subs.iter().enumerate() {
                    let g = sub.embed(slot, n);
                    acc = Some(match acc {
                        None => g,
                        Some(prev) => crate::qsys::series_product(&g, &prev)?,
                    });
                }
                let g = acc.ok_or_else(|| FileError::Schema("empty cascade".into()))?;
                sdh_to_quadrature(&g)
            }
        })
    }
}

impl Document {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), FileError> {
        let bytes = std::fs::read(path).map_err(|source| FileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| FileError::Schema(format!("not UTF-8: {e}")))?;
        Ok((Self::from_json(text)?, bytes))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn matrix(m: &RealMatrix) -> Self {
        Document::Matrix {
            schema_version: SCHEMA_VERSION,
            data: rows_of(m),
        }
    }

    pub fn quadrature(g: &QuadSystem) -> Self {
        Document::Quadrature {
            schema_version: SCHEMA_VERSION,
            n: g.n(),
            m: g.m(),
            a: rows_of(&g.a),
            b: rows_of(&g.b),
            c: rows_of(&g.c),
            d: rows_of(&g.d),
        }
    }

    pub fn sdh(g: &SdhSystem) -> Self {
        Document::Sdh {
            schema_version: SCHEMA_VERSION,
            n: g.n(),
            m: g.m(),
            scattering: complex_rows_of(g.scattering()),
            coupling: complex_rows_of(g.coupling()),
            hamiltonian: rows_of(g.hamiltonian()),
        }
    }

    pub fn cascade(c: &CascadeRealization) -> Self {
        Document::Cascade {
            schema_version: SCHEMA_VERSION,
            n: c.subsystems.len(),
            m: c.transformed.m(),
            subsystems: c
                .subsystems
                .iter()
                .map(|s| SubsystemDoc {
                    scattering: complex_rows_of(&s.scattering),
                    coupling: complex_rows_of(&s.coupling),
                    hamiltonian: rows_of(&s.hamiltonian),
                })
                .collect(),
        }
    }

    pub fn into_matrix(self) -> Result<RealMatrix, FileError> {
        match self {
            Document::Matrix {
                schema_version,
                data,
            } => {
                check_version(schema_version)?;
                matrix_from_rows(&data, "data")
            }
            _ => Err(FileError::Schema(
                "expected a document with mode \"matrix\"".into(),
            )),
        }
    }

    pub fn into_system(self) -> Result<SystemInput, FileError> {
        match self {
            Document::Matrix { .. } => Err(FileError::Schema(
                "expected a system document (quadrature, sdh or cascade)".into(),
            )),
            Document::Quadrature {
                schema_version,
                n,
                m,
                a,
                b,
                c,
                d,
            } => {
                check_version(schema_version)?;
                let a = matrix_from_rows(&a, "A")?;
                let b = matrix_from_rows(&b, "B")?;
                let c = matrix_from_rows(&c, "C")?;
                let d = matrix_from_rows(&d, "D")?;
                check_shape(&a, 2 * n, 2 * n, "A")?;
                check_shape(&b, 2 * n, 2 * m, "B")?;
                check_shape(&c, 2 * m, 2 * n, "C")?;
                check_shape(&d, 2 * m, 2 * m, "D")?;
                Ok(SystemInput::Quadrature(QuadSystem::new(a, b, c, d)?))
            }
            Document::Sdh {
                schema_version,
                n,
                m,
                scattering,
                coupling,
                hamiltonian,
            } => {
                check_version(schema_version)?;
                let s = complex_matrix_from_rows(&scattering, "S")?;
                let k = complex_matrix_from_rows(&coupling, "K")?;
                let r = matrix_from_rows(&hamiltonian, "R")?;
                if s.shape() != (m, m) || k.shape() != (m, 2 * n) {
                    return Err(FileError::Schema(format!(
                        "S must be {m}x{m} and K must be {m}x{}",
                        2 * n
                    )));
                }
                check_shape(&r, 2 * n, 2 * n, "R")?;
                Ok(SystemInput::Sdh(SdhSystem::new(s, k, r, UNITARY_TOL)?))
            }
            Document::Cascade {
                schema_version,
                n,
                m,
                subsystems,
            } => {
                check_version(schema_version)?;
                if subsystems.len() != n || n == 0 {
                    return Err(FileError::Schema(format!(
                        "cascade declares n = {n} but lists {} subsystems",
                        subsystems.len()
                    )));
                }
                let mut out = Vec::with_capacity(n);
                for (k, sub) in subsystems.iter().enumerate() {
                    let scattering = complex_matrix_from_rows(&sub.scattering, "S")?;
                    let coupling = complex_matrix_from_rows(&sub.coupling, "K")?;
                    let hamiltonian = matrix_from_rows(&sub.hamiltonian, "R")?;
                    if scattering.shape() != (m, m)
                        || coupling.shape() != (m, 2)
                        || hamiltonian.shape() != (2, 2)
                    {
                        return Err(FileError::Schema(format!(
                            "subsystem {k}: expected S {m}x{m}, K {m}x2, R 2x2"
                        )));
                    }
                    // Validates unitarity.
                    SdhSystem::new(
                        scattering.clone(),
                        coupling.clone(),
                        hamiltonian.clone(),
                        UNITARY_TOL,
                    )?;
                    out.push(OneDofSystem {
                        scattering,
                        coupling,
                        hamiltonian: (&hamiltonian + hamiltonian.transpose()) * 0.5,
                    });
                }
                Ok(SystemInput::Cascade(out))
            }
        }
    }
}
