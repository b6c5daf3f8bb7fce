use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spectral_means::{Complex64, HermitianMatrix, SpdMatrix};

use crate::CliError;

/// Absolute tolerance on `|a_ij - conj(a_ji)|` when reading a file.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// On-disk matrix: `{"dim": m, "entries": [[re, im], ...]}` in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix, CliError> {
        if self.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Validation("matrix entries must be finite".into()));
        }
        let entries: Vec<Complex64> = self.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        HermitianMatrix::from_entries(self.dim, &entries, HERMITIAN_TOL).map_err(CliError::from_input)
    }

    pub fn to_spd(&self) -> Result<SpdMatrix, CliError> {
        SpdMatrix::new(self.to_hermitian()?).map_err(CliError::from_input)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed matrix file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix files always serialize")
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json() + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}
