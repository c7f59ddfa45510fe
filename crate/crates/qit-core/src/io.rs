//! JSON file formats for states, channels and matrices.
//!
//! A matrix is a row-major nested array of `[re, im]` pairs. A state file is
//! `{"dims": [..], "labels": [..], "classical": [..], "matrix": ..}` with
//! `classical` optional; a channel file is
//! `{"kraus": [matrix, ..], "dim_in": n, "dim_out": m}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, zeros, CMat};
use crate::states::{Channel, DensityOperator};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat> {
    let r = rows.len();
    let cols = rows.first().map(|x| x.len()).unwrap_or(0);
    if rows.iter().any(|x| x.len() != cols) {
        return Err(Error::Parse("matrix rows have different lengths".into()));
    }
    let mut m = zeros(r, cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::NonFinite);
            }
            m[(i, j)] = c(z[0], z[1]);
        }
    }
    Ok(m)
}

/// Serde adapter for `CMat` fields.
pub mod cmat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = MatrixJson::deserialize(d)?;
        matrix_from_json(&rows).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<CMat>` fields.
pub mod cmat_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let all = Vec::<MatrixJson>::deserialize(d)?;
        all.iter().map(|r| matrix_from_json(r).map_err(serde::de::Error::custom)).collect()
    }
}

/// Serde adapter for `Option<CMat>` fields (serialized as `null` when absent).
pub mod cmat_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_json).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
        let rows = Option::<MatrixJson>::deserialize(d)?;
        rows.map(|r| matrix_from_json(&r).map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<Vec<String>>,
    pub matrix: MatrixJson,
}

impl StateFile {
    pub fn into_state(self) -> Result<DensityOperator> {
        let m = matrix_from_json(&self.matrix)?;
        let rho = match self.labels {
            Some(l) => DensityOperator::new(m, self.dims, l)?,
            None => DensityOperator::from_matrix(m, &self.dims)?,
        };
        match self.classical {
            Some(cl) => {
                let refs: Vec<&str> = cl.iter().map(String::as_str).collect();
                rho.with_classical(&refs)
            }
            None => Ok(rho),
        }
    }

    pub fn from_state(rho: &DensityOperator) -> Self {
        let classical: Vec<String> = rho
            .labels()
            .iter()
            .zip(rho.classical_mask())
            .filter(|(_, &c)| c)
            .map(|(l, _)| l.clone())
            .collect();
        StateFile {
            dims: rho.dims().to_vec(),
            labels: Some(rho.labels().to_vec()),
            classical: if classical.is_empty() { None } else { Some(classical) },
            matrix: matrix_to_json(rho.matrix()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub kraus: Vec<MatrixJson>,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<Channel> {
        let kraus: Vec<CMat> = self.kraus.iter().map(matrix_from_json).collect::<Result<_>>()?;
        if kraus.iter().any(|k| k.shape() != (self.dim_out, self.dim_in)) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators must be {}x{}",
                self.dim_out, self.dim_in
            )));
        }
        Channel::from_kraus_unreduced(kraus)
    }

    pub fn from_channel(ch: &Channel) -> Self {
        ChannelFile {
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_state(text: &str) -> Result<DensityOperator> {
    let f: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.into_state()
}

pub fn parse_channel(text: &str) -> Result<Channel> {
    let f: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.into_channel()
}

pub fn load_state(path: &Path) -> Result<DensityOperator> {
    parse_state(&read(path)?)
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    parse_channel(&read(path)?)
}

pub fn state_to_string(rho: &DensityOperator) -> String {
    serde_json::to_string(&StateFile::from_state(rho)).expect("state serializes")
}

pub fn channel_to_string(ch: &Channel) -> String {
    serde_json::to_string(&ChannelFile::from_channel(ch)).expect("channel serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Sampler;

    #[test]
    fn state_round_trip() {
        let mut s = Sampler::new(1);
        let rho = DensityOperator::from_matrix(s.full_density(4).unwrap(), &[2, 2]).unwrap();
        let back = parse_state(&state_to_string(&rho)).unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn classical_labels_survive() {
        let text = r#"{"dims":[2],"labels":["X"],"classical":["X"],"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        let rho = parse_state(text).unwrap();
        assert_eq!(rho.classical_mask(), &[true]);
        assert!(parse_state(&state_to_string(&rho)).unwrap().classical_mask()[0]);
    }

    #[test]
    fn channel_round_trip() {
        let mut s = Sampler::new(2);
        let ch = Channel::random(&mut s, 2, 3, 2).unwrap();
        let back = parse_channel(&channel_to_string(&ch)).unwrap();
        let rho = s.full_density(2).unwrap();
        assert!((back.apply(&rho).unwrap() - ch.apply(&rho).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn rejects_ragged() {
        let text = r#"{"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(matches!(parse_state(text), Err(Error::Parse(_))));
    }
}
