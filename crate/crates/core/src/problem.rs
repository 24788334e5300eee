//! JSON problem files.
//!
//! ```json
//! { "dim": 2,
//!   "L": [[[0, 0], [0, -1]], [[1, 1], [0, 0]]],
//!   "Q": [[1, 0]], "Qdag": [[2, 1]],
//!   "dL": [[[0, 0], [1, 1]]],
//!   "R0": 1.0, "bracket": [-3.5, -0.5] }
//! ```
//!
//! `L`, `Q`, `Qdag` list the coefficients of `z⁰, z¹, …`; `dL`, `dQ`,
//! `dQdag` do the same for the perturbation direction and default to zero.
//! A matrix may be given as nested rows or as a flat row-major list.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{CombinedFamily, GaugeReference, PolyMatrix, PolyVector, SystemParams};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed problem file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid problem: {0}")]
    Schema(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixRepr {
    fn to_matrix(&self, dim: usize, what: &str) -> Result<DMatrix<f64>, ProblemError> {
        let flat: Vec<f64> = match self {
            MatrixRepr::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(ProblemError::Schema(format!("{what}: expected {dim}x{dim} rows")));
                }
                rows.iter().flatten().copied().collect()
            }
            MatrixRepr::Flat(v) => v.clone(),
        };
        if flat.len() != dim * dim {
            return Err(ProblemError::Schema(format!("{what}: expected {} entries, got {}", dim * dim, flat.len())));
        }
        Ok(DMatrix::from_row_slice(dim, dim, &flat))
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixRepr::Rows(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }
}

fn default_r0() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(rename = "L")]
    pub l: Vec<MatrixRepr>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "Qdag")]
    pub qdag: Vec<Vec<f64>>,
    #[serde(rename = "dL", default, skip_serializing_if = "Vec::is_empty")]
    pub dl: Vec<MatrixRepr>,
    #[serde(rename = "dQ", default, skip_serializing_if = "Vec::is_empty")]
    pub dq: Vec<Vec<f64>>,
    #[serde(rename = "dQdag", default, skip_serializing_if = "Vec::is_empty")]
    pub dqdag: Vec<Vec<f64>>,
    #[serde(rename = "R0", default = "default_r0")]
    pub r0: f64,
    pub bracket: [f64; 2],
}

/// A loaded problem: the combined family, gauge reference and bracket, in
/// the file's own (unshifted, unnormalized) variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub family: CombinedFamily<f64>,
    pub r0: GaugeReference<f64>,
    pub bracket: (f64, f64),
}

fn vectors(list: &[Vec<f64>], dim: usize, what: &str) -> Result<PolyVector<f64>, ProblemError> {
    let coeffs = list
        .iter()
        .map(|v| {
            if v.len() == dim {
                Ok(DVector::from_column_slice(v))
            } else {
                Err(ProblemError::Schema(format!("{what}: expected length {dim}, got {}", v.len())))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    PolyVector::new(dim, coeffs).map_err(|e| ProblemError::Schema(e.to_string()))
}

fn matrices(list: &[MatrixRepr], dim: usize, what: &str) -> Result<PolyMatrix<f64>, ProblemError> {
    let coeffs = list.iter().map(|m| m.to_matrix(dim, what)).collect::<Result<Vec<_>, _>>()?;
    PolyMatrix::new(dim, coeffs).map_err(|e| ProblemError::Schema(e.to_string()))
}

impl ProblemFile {
    pub fn into_problem(&self) -> Result<Problem, ProblemError> {
        let dim = self.dim;
        if dim == 0 {
            return Err(ProblemError::Schema("dim must be positive".into()));
        }
        if self.l.is_empty() || self.q.is_empty() || self.qdag.is_empty() {
            return Err(ProblemError::Schema("L, Q and Qdag need at least one coefficient".into()));
        }
        let all_finite = self.r0.is_finite()
            && self.bracket.iter().all(|x| x.is_finite())
            && [&self.q, &self.qdag, &self.dq, &self.dqdag].iter().all(|l| l.iter().flatten().all(|x| x.is_finite()))
            && self.l.iter().chain(self.dl.iter()).all(|m| match m {
                MatrixRepr::Rows(r) => r.iter().flatten().all(|x| x.is_finite()),
                MatrixRepr::Flat(v) => v.iter().all(|x| x.is_finite()),
            });
        if !all_finite {
            return Err(ProblemError::Schema("all numbers must be finite".into()));
        }
        if self.bracket[0] >= self.bracket[1] {
            return Err(ProblemError::Schema("bracket must satisfy lo < hi".into()));
        }
        let base = SystemParams::new(
            matrices(&self.l, dim, "L")?,
            vectors(&self.q, dim, "Q")?,
            vectors(&self.qdag, dim, "Qdag")?,
        )
        .map_err(|e| ProblemError::Schema(e.to_string()))?;
        let pert = SystemParams::new(
            matrices(&self.dl, dim, "dL")?,
            vectors(&self.dq, dim, "dQ")?,
            vectors(&self.dqdag, dim, "dQdag")?,
        )
        .map_err(|e| ProblemError::Schema(e.to_string()))?;
        let family = CombinedFamily::new(base, pert).map_err(|e| ProblemError::Schema(e.to_string()))?;
        let r0 = GaugeReference::new(self.r0).map_err(|e| ProblemError::Schema(e.to_string()))?;
        Ok(Problem { family, r0, bracket: (self.bracket[0], self.bracket[1]) })
    }

    pub fn from_problem(p: &Problem) -> Self {
        let mats = |m: &PolyMatrix<f64>| {
            if m.is_zero() {
                Vec::new()
            } else {
                m.coeffs().iter().map(MatrixRepr::from_matrix).collect()
            }
        };
        let vecs = |v: &PolyVector<f64>| {
            if v.is_zero() {
                Vec::new()
            } else {
                v.coeffs().iter().map(|c| c.iter().copied().collect()).collect()
            }
        };
        let (base, pert) = (&p.family.base, &p.family.pert);
        Self {
            dim: p.family.dim(),
            l: base.l.coeffs().iter().map(MatrixRepr::from_matrix).collect(),
            q: base.q.coeffs().iter().map(|c| c.iter().copied().collect()).collect(),
            qdag: base.qdag.coeffs().iter().map(|c| c.iter().copied().collect()).collect(),
            dl: mats(&pert.l),
            dq: vecs(&pert.q),
            dqdag: vecs(&pert.qdag),
            r0: p.r0.value(),
            bracket: [p.bracket.0, p.bracket.1],
        }
    }
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        serde_json::from_str::<ProblemFile>(text)?.into_problem()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from_problem(self)).expect("problem files always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"{
        "dim": 2,
        "L": [[[0, 0], [0, -1]], [1, 1, 0, 0]],
        "Q": [[1, 0]], "Qdag": [[2, 1]],
        "dL": [[[0, 0], [1, 1]]],
        "bracket": [-3.5, -0.5]
    }"#;

    #[test]
    fn parses_nested_and_flat_matrices() {
        let p = Problem::from_json(WORKED).unwrap();
        assert_eq!(p.r0.value(), 1.0);
        assert_eq!(p.family.base.l.degree(), 1);
        assert_eq!(p.family.base.l.coeff(1), DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]));
        assert!(p.family.pert.q.is_zero());
        assert_eq!(p.family.eval(0.0, 0.0).l, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]));
    }

    #[test]
    fn json_round_trip() {
        let p = Problem::from_json(WORKED).unwrap();
        assert_eq!(Problem::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn schema_errors() {
        let bad_dim = WORKED.replace("\"dim\": 2", "\"dim\": 3");
        assert!(matches!(Problem::from_json(&bad_dim), Err(ProblemError::Schema(_))));
        let bad_r0 = WORKED.replace("\"bracket\"", "\"R0\": 0.0, \"bracket\"");
        assert!(matches!(Problem::from_json(&bad_r0), Err(ProblemError::Schema(_))));
        assert!(matches!(Problem::from_json("{"), Err(ProblemError::Parse(_))));
        let unknown = WORKED.replace("\"bracket\"", "\"extra\": 1, \"bracket\"");
        assert!(matches!(Problem::from_json(&unknown), Err(ProblemError::Parse(_))));
    }
}
