//! JSON file formats for matrices and states.
//!
//! Matrices: `{"d": 2, "rows": [[[re, im], [re, im]], …]}`.
//! States: `{"d": 2, "coeffs": [[re, im], …]}`.
//! Doubles are written in shortest round-trip form, so reading a file back
//! reproduces every bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, StateVector, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub d: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        MatrixFile {
            d,
            rows: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let z = m.get(i, j);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;
    fn try_from(f: MatrixFile) -> Result<Self> {
        if f.rows.len() != f.d {
            return Err(Error::Format(format!(
                "declared d = {} but found {} rows",
                f.d,
                f.rows.len()
            )));
        }
        let rows: Vec<Vec<C64>> = f
            .rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }
}

impl From<&StateVector> for StateFile {
    fn from(s: &StateVector) -> Self {
        StateFile {
            d: s.dim(),
            coeffs: s.coeffs().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<StateFile> for StateVector {
    type Error = Error;
    fn try_from(f: StateFile) -> Result<Self> {
        if f.coeffs.len() != f.d {
            return Err(Error::Format(format!(
                "declared d = {} but found {} coefficients",
                f.d,
                f.coeffs.len()
            )));
        }
        StateVector::new(f.coeffs.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(m)).expect("matrix serializes")
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    let f: MatrixFile = serde_json::from_str(s)?;
    f.try_into()
}

pub fn state_to_json(s: &StateVector) -> String {
    serde_json::to_string(&StateFile::from(s)).expect("state serializes")
}

pub fn state_from_json(s: &str) -> Result<StateVector> {
    let f: StateFile = serde_json::from_str(s)?;
    f.try_into()
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let s = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    matrix_from_json(&s)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(m)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_state(path: &Path) -> Result<StateVector> {
    let s = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    state_from_json(&s)
}
