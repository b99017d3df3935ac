//! JSON serialization of systems.
//!
//! The on-disk format spells every entry as a scalar string so files stay
//! exact and human-editable:
//!
//! ```json
//! {
//!   "m": 1, "n": 2, "l": 1,
//!   "A": [["2", "1"], ["0", "2"]],
//!   "B": [["1"], ["0"]],
//!   "C": [["0", "1"]]
//! }
//! ```

use crate::matrix::ExactMatrix;
use crate::scalar::parse_scalar;
use crate::system::SystemTriple;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

/// The JSON shape of a system on disk.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SystemFile {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<String>>,
}

impl SystemFile {
    pub fn from_system(sys: &SystemTriple) -> SystemFile {
        let (m, n, l) = sys.dims();
        SystemFile {
            m,
            n,
            l,
            a: matrix_to_strings(&sys.a),
            b: matrix_to_strings(&sys.b),
            c: matrix_to_strings(&sys.c),
        }
    }

    pub fn into_system(&self) -> Result<SystemTriple, IoError> {
        let a = parse_matrix("A", &self.a, self.n, self.n)?;
        let b = parse_matrix("B", &self.b, self.n, self.m)?;
        let c = parse_matrix("C", &self.c, self.l, self.n)?;
        SystemTriple::new(a, b, c).map_err(|e| IoError::Malformed(e.to_string()))
    }
}

fn matrix_to_strings(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_string()).collect())
        .collect()
}

fn parse_matrix(
    name: &str,
    rows: &[Vec<String>],
    expect_rows: usize,
    expect_cols: usize,
) -> Result<ExactMatrix, IoError> {
    if rows.len() != expect_rows {
        return Err(IoError::Malformed(format!(
            "{} must have {} rows, got {}",
            name,
            expect_rows,
            rows.len()
        )));
    }
    let mut out = ExactMatrix::zeros(expect_rows, expect_cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expect_cols {
            return Err(IoError::Malformed(format!(
                "{} row {} must have {} entries, got {}",
                name,
                i,
                expect_cols,
                row.len()
            )));
        }
        for (j, text) in row.iter().enumerate() {
            let value = parse_scalar(text).map_err(|e| {
                IoError::Malformed(format!("{}[{}][{}]: {}", name, i, j, e))
            })?;
            out.set(i, j, value);
        }
    }
    Ok(out)
}

/// Parse a system from JSON text.
pub fn system_from_json(text: &str) -> Result<SystemTriple, IoError> {
    let file: SystemFile =
        serde_json::from_str(text).map_err(|e| IoError::Malformed(e.to_string()))?;
    file.into_system()
}

/// Render a system as deterministic, pretty-printed JSON (trailing newline).
pub fn system_to_json(sys: &SystemTriple) -> String {
    let file = SystemFile::from_system(sys);
    let mut text = serde_json::to_string_pretty(&file).expect("system serializes");
    text.push('\n');
    text
}

pub fn read_system(path: &Path) -> Result<SystemTriple, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    system_from_json(&text)
}

pub fn write_system(path: &Path, sys: &SystemTriple) -> Result<(), IoError> {
    std::fs::write(path, system_to_json(sys)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat;
    use crate::matrix::ExactMatrix;
    use crate::system::SystemTriple;

    fn example() -> SystemTriple {
        SystemTriple::new(mat![[2, 1], [0, 2]], mat![[1], [0]], mat![[0, 1]]).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let text = system_to_json(&example());
        let back = system_from_json(&text).unwrap();
        assert_eq!(back, example());
        // Deterministic bytes.
        assert_eq!(system_to_json(&back), text);
    }

    #[test]
    fn zero_dimension_round_trip() {
        let sys = SystemTriple::new(
            mat![[3]],
            ExactMatrix::zeros(1, 0),
            ExactMatrix::zeros(0, 1),
        )
        .unwrap();
        let back = system_from_json(&system_to_json(&sys)).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn gaussian_rational_entries_round_trip() {
        let sys = SystemTriple::new(
            ExactMatrix::parse_rows(&[vec!["1/2+i", "-3"], vec!["0", "2-5i"]]).unwrap(),
            ExactMatrix::parse_rows(&[vec!["i"], vec!["7/3"]]).unwrap(),
            ExactMatrix::parse_rows(&[vec!["0", "-1/2i"]]).unwrap(),
        )
        .unwrap();
        let back = system_from_json(&system_to_json(&sys)).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn dimension_mismatch_is_malformed() {
        let text = r#"{"m":1,"n":2,"l":1,"A":[["0","0"],["0","0"]],"B":[["1"]],"C":[["0","1"]]}"#;
        let err = system_from_json(text).unwrap_err();
        assert!(matches!(err, IoError::Malformed(_)));
        assert!(err.to_string().contains("B"));
    }

    #[test]
    fn bad_scalar_is_malformed_with_location() {
        let text = r#"{"m":0,"n":1,"l":0,"A":[["1/0"]],"B":[[]],"C":[]}"#;
        let err = system_from_json(text).unwrap_err();
        assert!(err.to_string().contains("A[0][0]"));
    }

    #[test]
    fn bad_json_is_malformed() {
        assert!(matches!(
            system_from_json("not json").unwrap_err(),
            IoError::Malformed(_)
        ));
    }
}
