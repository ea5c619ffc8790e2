use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{c, CMatrix};
use crate::error::{Error, Result};

/// On-disk matrix: `{ "d": int, "entries": [[re, im], ...] }`, row-major, `d²` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "matrix file holds square matrices, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Ok(Self { d, entries })
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.d * self.d {
            return Err(Error::Shape(format!(
                "field `entries` has length {}, expected d² = {}",
                self.entries.len(),
                self.d * self.d
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "field `entries` has non-finite values".into(),
            ));
        }
        Ok(CMatrix::from_fn(self.d, self.d, |i, j| {
            let [re, im] = self.entries[i * self.d + j];
            c(re, im)
        }))
    }
}

/// Serialise with shortest round-trip float formatting (bit-exact on reload).
pub fn matrix_to_json(m: &CMatrix) -> Result<String> {
    let file = MatrixFile::from_matrix(m)?;
    serde_json::to_string(&file).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    let file: MatrixFile = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("malformed matrix JSON: {e}")))?;
    file.to_matrix()
}

pub fn read_matrix_file(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text)
}

pub fn write_matrix_file(path: &Path, m: &CMatrix) -> Result<()> {
    let text = matrix_to_json(m)?;
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
