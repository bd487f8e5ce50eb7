//! JSON file formats.
//!
//! A matrix is `{"rows": m, "cols": n, "data": [[re, im], ...]}` with `data`
//! row-major and of length `m·n`. Block instances, scalar pairs and
//! rectangular pairs embed that schema; see [`crate::blocks::BlockInstance`],
//! [`PairInstance`] and [`RectPair`].

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = String;

    fn try_from(repr: MatrixRepr) -> std::result::Result<Self, String> {
        if repr.data.len() != repr.rows * repr.cols {
            return Err(format!(
                "matrix data has {} entries, expected rows*cols = {}",
                repr.data.len(),
                repr.rows * repr.cols
            ));
        }
        if let Some(k) = repr.data.iter().position(|[re, im]| !(re.is_finite() && im.is_finite())) {
            return Err(format!("non-finite entry at data[{k}]"));
        }
        let data = repr.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(repr.rows, repr.cols, data).map_err(|e| e.to_string())
    }
}

impl From<&ComplexMatrix> for MatrixRepr {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        ComplexMatrix::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// Two square matrices of equal size with optional scalars, the input of
/// the additive formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInstance {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Complex64>,
}

/// `B: m×n`, `C: n×m`, the input of Cline's transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectPair {
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

/// Parses JSON, reporting the location of the first problem.
pub fn from_json_str<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        // serde_json appends "at line L column C" when it knows the position
        if path == "?" {
            Error::Parse(format!("invalid {what}: {inner}"))
        } else {
            Error::Parse(format!("invalid {what} at `{path}`: {inner}"))
        }
    })?;
    de.end()
        .map_err(|e| Error::Parse(format!("invalid {what}: {e}")))?;
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    from_json_str(&text, what).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("in-memory values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix() {
        let m: ComplexMatrix =
            from_json_str(r#"{"rows": 1, "cols": 2, "data": [[1, 0], [0.5, -2]]}"#, "matrix").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.5, -2.0));
    }

    #[test]
    fn rejects_length_mismatch_with_location() {
        let err = from_json_str::<ComplexMatrix>(
            "{\"rows\": 2,\n \"cols\": 2,\n \"data\": [[1, 0]]}",
            "matrix",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected rows*cols = 4"), "{msg}");
        assert!(msg.contains("at `.`"), "{msg}");

        let msg = from_json_str::<ComplexMatrix>("{\"rows\": 1,\n \"cols\": x}", "matrix")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 2"), "{msg}");

        let nested = r#"{"a": {"rows":1,"cols":1,"data":[[1,0]]},
                         "b": {"rows":1,"cols":2,"data":[[1,0]]}}"#;
        let msg = from_json_str::<PairInstance>(nested, "pair").unwrap_err().to_string();
        assert!(msg.contains("at `b`"), "{msg}");
    }

    #[test]
    fn rejects_non_finite() {
        assert!(from_json_str::<ComplexMatrix>(r#"{"rows":1,"cols":1,"data":[[1e999,0]]}"#, "matrix").is_err());
        assert!(from_json_str::<ComplexMatrix>(r#"{"rows":1,"cols":1,"data":[[NaN,0]]}"#, "matrix").is_err());
    }

    #[test]
    fn pair_lambda_is_optional() {
        let text = r#"{"a": {"rows":1,"cols":1,"data":[[1,0]]},
                       "b": {"rows":1,"cols":1,"data":[[2,0]]},
                       "lambda": [0, 1]}"#;
        let p: PairInstance = from_json_str(text, "pair").unwrap();
        assert_eq!(p.lambda, Some(Complex64::new(0.0, 1.0)));
        assert_eq!(p.mu, None);
        let again: PairInstance = from_json_str(&to_json_string(&p), "pair").unwrap();
        assert_eq!(again, p);
    }
}
