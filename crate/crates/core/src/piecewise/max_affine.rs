use serde::{Deserialize, Serialize};

use super::{Affine, OneSidedDerivatives};
use crate::error::{Error, Result};

/// `u -> max_j (a_j u + b_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaxAffine {
    pieces: Vec<Affine>,
}

impl MaxAffine {
    pub fn new(pieces: Vec<Affine>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("max-affine function needs a piece".into()));
        }
        if pieces.iter().any(|p| !p.slope.is_finite() || !p.intercept.is_finite()) {
            return Err(Error::InvalidInput("non-finite affine piece".into()));
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.pieces.iter().map(|p| p.eval(u)).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl OneSidedDerivatives for MaxAffine {
    fn one_sided_derivatives(&self, u: f64) -> (f64, f64) {
        let m = self.eval(u);
        let tol = 1e-12 * m.abs().max(1.0);
        self.pieces
            .iter()
            .filter(|p| p.eval(u) >= m - tol)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.slope), hi.max(p.slope)))
    }
}

/// One max-affine function per outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaxAffineLoss {
    per_outcome: Vec<MaxAffine>,
}

impl MaxAffineLoss {
    pub fn new(per_outcome: Vec<MaxAffine>) -> Result<Self> {
        if per_outcome.is_empty() {
            return Err(Error::InvalidInput("loss needs at least one outcome".into()));
        }
        Ok(Self { per_outcome })
    }

    pub fn outcomes(&self) -> usize {
        self.per_outcome.len()
    }

    pub fn outcome(&self, y: usize) -> &MaxAffine {
        &self.per_outcome[y]
    }

    pub fn eval(&self, u: f64, y: usize) -> f64 {
        self.per_outcome[y].eval(u)
    }

    pub fn subgradient(&self, u: f64, y: usize) -> (f64, f64) {
        self.per_outcome[y].one_sided_derivatives(u)
    }
}
