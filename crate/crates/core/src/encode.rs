//! JSON encodings shared by the file formats: complex matrices are nested
//! arrays of `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::CMat;

/// JSON form of a complex matrix: rows of `[re, im]` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexMatJson(pub Vec<Vec<[f64; 2]>>);

impl ComplexMatJson {
    pub fn from_mat(m: &CMat) -> Self {
        ComplexMatJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_mat(&self) -> Result<CMat, Error> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Parse("empty complex matrix".into()));
        }
        let cols = self.0[0].len();
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged complex matrix".into()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            Complex64::new(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

/// JSON form of a real matrix: nested rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealMatJson(pub Vec<Vec<f64>>);

impl RealMatJson {
    pub fn from_mat(m: &crate::linalg::RMat) -> Self {
        RealMatJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        )
    }

    pub fn to_mat(&self) -> Result<crate::linalg::RMat, Error> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        let cols = self.0[0].len();
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix".into()));
        }
        let flat: Vec<f64> = self.0.iter().flatten().cloned().collect();
        Ok(crate::linalg::RMat::from_row_slice(rows, cols, &flat))
    }
}
