//! JSON file format: `{"dim": d, "effects": [matrix, ...], "labels": [...]}` where each
//! matrix is a row-major list of rows and each entry is `[re, im]`.

use serde::{Deserialize, Serialize};

use super::Povm;
use crate::error::{Error, Result};
use crate::hermitian::{c64, ComplexMatrix};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PovmFile {
    pub dim: usize,
    pub effects: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let data: Vec<Vec<_>> = rows
        .iter()
        .map(|r| r.iter().map(|&[a, b]| c64(a, b)).collect())
        .collect();
    let m = ComplexMatrix::from_rows(&data)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            effects: p.effects().iter().map(|e| matrix_to_json(e)).collect(),
            labels: Some(p.labels().to_vec()),
        }
    }

    /// Parses every matrix and validates the measurement.
    pub fn to_povm(&self) -> Result<Povm> {
        let raw = self
            .effects
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let m = matrix_from_json(m)
                    .map_err(|e| Error::Parse(format!("effect {k}: {e}")))?;
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::Parse(format!(
                        "effect {k}: shape {}x{} but dim is {}",
                        m.rows(),
                        m.cols(),
                        self.dim
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::from_matrices(raw, self.labels.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::make_sic_qubit;

    #[test]
    fn round_trip() {
        let p = make_sic_qubit();
        let text = PovmFile::from_povm(&p).to_json();
        let back = PovmFile::from_json(&text).unwrap().to_povm().unwrap();
        assert_eq!(back.labels(), p.labels());
        for (a, b) in back.effects().iter().zip(p.effects()) {
            assert!(a.max_abs_diff(b) == 0.0);
        }
    }

    #[test]
    fn reports_bad_shape() {
        let text = r#"{"dim": 2, "effects": [[[[1,0]]]]}"#;
        let err = PovmFile::from_json(text).unwrap().to_povm().unwrap_err();
        assert!(matches!(err, Error::Parse(msg) if msg.starts_with("effect 0")));
    }
}
