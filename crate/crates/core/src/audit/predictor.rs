use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Predictions keyed by feature id. Discrete reports are 0-based in memory
/// and 1-based on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub enum PredictorTable {
    Distributional(BTreeMap<String, SimplexPoint>),
    Scalar(BTreeMap<String, f64>),
    Discrete(BTreeMap<String, usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "predictions", rename_all = "lowercase")]
enum RawTable {
    Distributional(BTreeMap<String, SimplexPoint>),
    Scalar(BTreeMap<String, f64>),
    Discrete(BTreeMap<String, usize>),
}

impl TryFrom<RawTable> for PredictorTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        Ok(match raw {
            RawTable::Distributional(m) => Self::Distributional(m),
            RawTable::Scalar(m) => {
                if let Some((id, _)) = m.iter().find(|(_, u)| !u.is_finite()) {
                    return Err(Error::InvalidInput(format!("non-finite prediction for `{id}`")));
                }
                Self::Scalar(m)
            }
            RawTable::Discrete(m) => Self::Discrete(
                m.into_iter()
                    .map(|(id, r)| match r.checked_sub(1) {
                        Some(r) => Ok((id, r)),
                        None => Err(Error::InvalidInput(format!("report 0 for `{id}`; reports are 1-based"))),
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

impl From<PredictorTable> for RawTable {
    fn from(t: PredictorTable) -> Self {
        match t {
            PredictorTable::Distributional(m) => Self::Distributional(m),
            PredictorTable::Scalar(m) => Self::Scalar(m),
            PredictorTable::Discrete(m) => Self::Discrete(m.into_iter().map(|(id, r)| (id, r + 1)).collect()),
        }
    }
}

impl PredictorTable {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Distributional(_) => "distributional",
            Self::Scalar(_) => "scalar",
            Self::Discrete(_) => "discrete",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Distributional(m) => m.len(),
            Self::Scalar(m) => m.len(),
            Self::Discrete(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distributional(&self) -> Result<&BTreeMap<String, SimplexPoint>> {
        match self {
            Self::Distributional(m) => Ok(m),
            other => Err(Error::PredictorKind {
                expected: "distributional",
                found: other.kind(),
            }),
        }
    }

    pub fn scalar(&self) -> Result<&BTreeMap<String, f64>> {
        match self {
            Self::Scalar(m) => Ok(m),
            other => Err(Error::PredictorKind {
                expected: "scalar",
                found: other.kind(),
            }),
        }
    }

    pub fn discrete(&self) -> Result<&BTreeMap<String, usize>> {
        match self {
            Self::Discrete(m) => Ok(m),
            other => Err(Error::PredictorKind {
                expected: "discrete",
                found: other.kind(),
            }),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_wire_format_is_one_based() {
        let t = PredictorTable::Discrete([("a".to_string(), 0)].into());
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"kind":"discrete","predictions":{"a":1}}"#);
        assert_eq!(serde_json::from_str::<PredictorTable>(&s).unwrap(), t);
        assert!(serde_json::from_str::<PredictorTable>(r#"{"kind":"discrete","predictions":{"a":0}}"#).is_err());
    }

    #[test]
    fn kind_mismatch() {
        let t = PredictorTable::Scalar([("a".to_string(), 1.0)].into());
        assert!(matches!(t.distributional(), Err(Error::PredictorKind { .. })));
        assert_eq!(t.scalar().unwrap()["a"], 1.0);
    }
}
