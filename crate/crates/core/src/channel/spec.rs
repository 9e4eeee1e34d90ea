use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, C64};

/// Complex matrix as nested rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSpec("empty matrix".into()));
    }
    if let Some(bad) = m.iter().position(|r| r.len() != cols) {
        return Err(Error::InvalidSpec(format!(
            "row {bad} has {} entries, expected {cols}",
            m[bad].len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| C64::new(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    Depolarizing,
    Pauli,
    AmplitudeDamping,
    Platypus,
    Dephrasure,
    Erasure,
    Identity,
    CustomKraus,
    Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Serializable description of a channel.
///
/// Parameter keys: `p`, `q`, `gamma`, `s`, `probs` (Pauli probability
/// vector), `dim` (identity). `kraus` is read for `custom_kraus` and
/// `children` for `tensor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub family: ChannelFamily,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<ChannelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
}

impl ChannelSpec {
    fn with_params(family: ChannelFamily, params: &[(&str, f64)]) -> Self {
        Self {
            family,
            params: params
                .iter()
                .map(|&(k, v)| (k.to_string(), ParamValue::Scalar(v)))
                .collect(),
            children: None,
            kraus: None,
        }
    }

    pub fn depolarizing(p: f64) -> Self {
        Self::with_params(ChannelFamily::Depolarizing, &[("p", p)])
    }

    pub fn pauli(probs: [f64; 4]) -> Self {
        let mut spec = Self::with_params(ChannelFamily::Pauli, &[]);
        spec.params.insert("probs".into(), ParamValue::Vector(probs.to_vec()));
        spec
    }

    pub fn amplitude_damping(gamma: f64) -> Self {
        Self::with_params(ChannelFamily::AmplitudeDamping, &[("gamma", gamma)])
    }

    pub fn platypus(s: f64) -> Self {
        Self::with_params(ChannelFamily::Platypus, &[("s", s)])
    }

    pub fn dephrasure(p: f64, q: f64) -> Self {
        Self::with_params(ChannelFamily::Dephrasure, &[("p", p), ("q", q)])
    }

    pub fn erasure(q: f64) -> Self {
        Self::with_params(ChannelFamily::Erasure, &[("q", q)])
    }

    pub fn identity(dim: usize) -> Self {
        Self::with_params(ChannelFamily::Identity, &[("dim", dim as f64)])
    }

    pub fn custom_kraus(kraus: Vec<JsonMatrix>) -> Self {
        Self {
            family: ChannelFamily::CustomKraus,
            params: BTreeMap::new(),
            children: None,
            kraus: Some(kraus),
        }
    }

    pub fn tensor(children: Vec<ChannelSpec>) -> Self {
        Self {
            family: ChannelFamily::Tensor,
            params: BTreeMap::new(),
            children: Some(children),
            kraus: None,
        }
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        match self.params.get(name) {
            Some(ParamValue::Scalar(v)) => Ok(*v),
            Some(ParamValue::Vector(_)) => Err(Error::InvalidSpec(format!("parameter `{name}` must be a number"))),
            None => Err(Error::MissingParameter(name.to_string())),
        }
    }

    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        match self.params.get(name) {
            Some(ParamValue::Vector(v)) => Ok(v),
            Some(ParamValue::Scalar(_)) => Err(Error::InvalidSpec(format!("parameter `{name}` must be a list"))),
            None => Err(Error::MissingParameter(name.to_string())),
        }
    }

    /// Copy with one scalar parameter replaced; used by parameter scans.
    pub fn with_scalar(&self, name: &str, value: f64) -> Self {
        let mut spec = self.clone();
        spec.params.insert(name.to_string(), ParamValue::Scalar(value));
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names_are_stable() {
        let spec = ChannelSpec::tensor(vec![ChannelSpec::depolarizing(0.2), ChannelSpec::platypus(0.3)]);
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["family"], "tensor");
        assert_eq!(v["children"][0]["family"], "depolarizing");
        assert_eq!(v["children"][0]["params"]["p"], 0.2);
        assert_eq!(v["children"][1]["params"]["s"], 0.3);
        let back: ChannelSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn parses_probability_vectors_and_kraus_pairs() {
        let text = r#"{"family": "pauli", "params": {"probs": [0.7, 0.1, 0.1, 0.1]}}"#;
        let spec: ChannelSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.vector("probs").unwrap(), &[0.7, 0.1, 0.1, 0.1]);

        let text = r#"{"family": "custom_kraus", "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}"#;
        let spec: ChannelSpec = serde_json::from_str(text).unwrap();
        let m = matrix_from_json(&spec.kraus.unwrap()[0]).unwrap();
        assert_eq!(m, CMatrix::identity(2, 2));
    }

    #[test]
    fn rejects_ragged_matrices_and_unknown_fields() {
        let ragged: JsonMatrix = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(matrix_from_json(&ragged).is_err());
        let text = r#"{"family": "identity", "parms": {}}"#;
        assert!(serde_json::from_str::<ChannelSpec>(text).is_err());
    }
}
