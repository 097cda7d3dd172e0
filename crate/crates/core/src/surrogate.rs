//! Common interface over the constructed surrogates, and the exported file
//! format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::SmoothedSurrogate;
use crate::error::{Error, Result};
use crate::normals::NormalsSurrogate;
use crate::roe::LipschitzBound;
use crate::simplex::{dot, NormKind};

/// A real-valued property of distributions over `outcomes()` outcomes.
pub trait ScalarProperty: Sync {
    fn outcomes(&self) -> usize;
    fn value(&self, p: &[f64]) -> Result<f64>;
}

/// A scalar property with a threshold link to a discrete property.
pub trait LinkedProperty: ScalarProperty {
    /// Increasing link thresholds; report `r` covers `(s_r, s_{r+1}]`.
    fn thresholds(&self) -> &[f64];

    /// 0-based report for a surrogate value.
    fn link(&self, u: f64) -> usize {
        self.thresholds().iter().filter(|&&s| s < u).count()
    }

    /// The discrete property being refined, as a set of 0-based reports.
    fn discrete(&self, p: &[f64]) -> Vec<usize>;

    fn lipschitz(&self) -> LipschitzBound;

    fn range(&self) -> (f64, f64);
}

/// Reports whose link cell contains `u`, plus neighbours when `u` is within
/// `tol` of a threshold.
pub fn reports_from_thresholds(thresholds: &[f64], u: f64, tol: f64) -> Vec<usize> {
    let r = thresholds.iter().filter(|&&s| s < u).count();
    let mut out = vec![r];
    if r > 0 && (u - thresholds[r - 1]).abs() <= tol {
        out.insert(0, r - 1);
    }
    if r < thresholds.len() && (thresholds[r] - u).abs() <= tol {
        out.push(r + 1);
    }
    out
}

impl ScalarProperty for SmoothedSurrogate {
    fn outcomes(&self) -> usize {
        SmoothedSurrogate::outcomes(self)
    }
    fn value(&self, p: &[f64]) -> Result<f64> {
        self.gamma(p)
    }
}

impl LinkedProperty for SmoothedSurrogate {
    fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
    fn discrete(&self, p: &[f64]) -> Vec<usize> {
        match self.gamma_discrete(p) {
            Some(r) => r,
            None => match self.gamma(p) {
                Ok(u) => reports_from_thresholds(&self.thresholds, u, 1e-10),
                Err(_) => vec![],
            },
        }
    }
    fn lipschitz(&self) -> LipschitzBound {
        self.lipschitz
    }
    fn range(&self) -> (f64, f64) {
        self.range
    }
}

impl ScalarProperty for NormalsSurrogate {
    fn outcomes(&self) -> usize {
        NormalsSurrogate::outcomes(self)
    }
    fn value(&self, p: &[f64]) -> Result<f64> {
        self.roe_eval(p)
    }
}

impl LinkedProperty for NormalsSurrogate {
    fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
    fn link(&self, u: f64) -> usize {
        NormalsSurrogate::link(self, u)
    }
    fn discrete(&self, p: &[f64]) -> Vec<usize> {
        self.gamma_discrete(p)
    }
    fn lipschitz(&self) -> LipschitzBound {
        self.lipschitz
    }
    fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// `Gamma(p) = <w, p>` with a threshold link; the discrete property is the
/// link applied to `Gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearThreshold {
    pub weights: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl LinearThreshold {
    pub fn new(weights: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidInput("need at least two outcomes".into()));
        }
        crate::piecewise::check_increasing(&thresholds)?;
        Ok(Self { weights, thresholds })
    }
}

impl ScalarProperty for LinearThreshold {
    fn outcomes(&self) -> usize {
        self.weights.len()
    }
    fn value(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: p.len(),
            });
        }
        Ok(dot(&self.weights, p))
    }
}

impl LinkedProperty for LinearThreshold {
    fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
    fn discrete(&self, p: &[f64]) -> Vec<usize> {
        reports_from_thresholds(&self.thresholds, dot(&self.weights, p), 1e-10)
    }
    fn lipschitz(&self) -> LipschitzBound {
        LipschitzBound {
            l1: NormKind::L1.tangent_dual(&self.weights),
            l2: NormKind::L2.tangent_dual(&self.weights),
            linf: NormKind::Linf.tangent_dual(&self.weights),
            sampled: false,
        }
    }
    fn range(&self) -> (f64, f64) {
        self.weights
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)))
    }
}

/// `alpha * Gamma`, for checking how calibration quantities rescale.
pub struct Scaled<'a, P: ?Sized> {
    pub inner: &'a P,
    pub alpha: f64,
}

impl<P: ScalarProperty + ?Sized> ScalarProperty for Scaled<'_, P> {
    fn outcomes(&self) -> usize {
        self.inner.outcomes()
    }
    fn value(&self, p: &[f64]) -> Result<f64> {
        Ok(self.alpha * self.inner.value(p)?)
    }
}

/// Any exported surrogate, tagged by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Surrogate {
    Embedding(SmoothedSurrogate),
    Normals(NormalsSurrogate),
    Linear(LinearThreshold),
}

impl Surrogate {
    pub fn kind(&self) -> &'static str {
        match self {
            Surrogate::Embedding(_) => "embedding",
            Surrogate::Normals(_) => "normals",
            Surrogate::Linear(_) => "linear",
        }
    }

    fn inner(&self) -> &dyn LinkedProperty {
        match self {
            Surrogate::Embedding(s) => s,
            Surrogate::Normals(s) => s,
            Surrogate::Linear(s) => s,
        }
    }
}

impl ScalarProperty for Surrogate {
    fn outcomes(&self) -> usize {
        self.inner().outcomes()
    }
    fn value(&self, p: &[f64]) -> Result<f64> {
        self.inner().value(p)
    }
}

impl LinkedProperty for Surrogate {
    fn thresholds(&self) -> &[f64] {
        self.inner().thresholds()
    }
    fn link(&self, u: f64) -> usize {
        self.inner().link(u)
    }
    fn discrete(&self, p: &[f64]) -> Vec<usize> {
        self.inner().discrete(p)
    }
    fn lipschitz(&self) -> LipschitzBound {
        self.inner().lipschitz()
    }
    fn range(&self) -> (f64, f64) {
        self.inner().range()
    }
}

/// A surrogate plus free-form run metadata, as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateFile {
    #[serde(flatten)]
    pub surrogate: Surrogate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl SurrogateFile {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
