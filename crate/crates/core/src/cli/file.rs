use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::ComplexMatrix;

/// On-disk matrix: `{"n": 2, "re": [[..]], "im": [[..]], "label": ".."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("invalid matrix in {path}: {source}")]
    Shape { path: String, source: Error },
}

impl HamiltonianFile {
    pub fn from_matrix(m: &ComplexMatrix, label: Option<String>) -> Self {
        Self { n: m.dim(), re: m.re_parts(), im: m.im_parts(), label }
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn load(path: &Path) -> Result<Self, FileError> {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FileError::Io { path: shown.clone(), source })?;
        let file = Self::parse(&text).map_err(|source| FileError::Json { path: shown.clone(), source })?;
        file.validate().map_err(|source| FileError::Shape { path: shown, source })?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), Error> {
        for parts in [&self.re, &self.im] {
            if parts.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: parts.len() });
            }
            if let Some(row) = parts.iter().find(|r| r.len() != self.n) {
                return Err(Error::NotSquare { rows: self.n, cols: row.len() });
            }
        }
        if self.n == 0 {
            return Err(Error::Empty);
        }
        Ok(())
    }

    pub fn matrix(&self) -> Result<ComplexMatrix, Error> {
        self.validate()?;
        ComplexMatrix::from_parts(&self.re, &self.im)
    }
}
