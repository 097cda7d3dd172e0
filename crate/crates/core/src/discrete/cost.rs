use serde::{Deserialize, Serialize};

use super::AffineBoundary;
use crate::error::{Error, Result};
use crate::simplex::dot;

/// Absolute tolerance on expected cost when collecting minimizers.
pub const TIE_TOL: f64 = 1e-10;

/// Discrete loss: `entries[r][y]` is the cost of report `r` under outcome `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CostMatrix {
    entries: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for CostMatrix {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CostMatrix> for Vec<Vec<f64>> {
    fn from(c: CostMatrix) -> Self {
        c.entries
    }
}

impl CostMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidInput("cost matrix needs at least two reports".into()));
        }
        let n = entries[0].len();
        if n < 3 {
            return Err(Error::InvalidInput("cost matrix needs at least three outcomes".into()));
        }
        for row in &entries {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidInput("costs must be finite and nonnegative".into()));
            }
        }
        Ok(Self { entries })
    }

    pub fn reports(&self) -> usize {
        self.entries.len()
    }

    pub fn outcomes(&self) -> usize {
        self.entries[0].len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r]
    }

    pub fn get(&self, r: usize, y: usize) -> f64 {
        self.entries[r][y]
    }

    pub fn expected_costs(&self, p: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|row| dot(row, p)).collect()
    }

    /// Boundaries between consecutive reports, `<l_i - l_{i+1}, p> = 0`.
    /// Report `i` is preferred on the nonpositive side.
    pub fn consecutive_boundaries(&self) -> Vec<AffineBoundary> {
        self.entries
            .windows(2)
            .map(|w| AffineBoundary {
                c: w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect(),
                b: 0.0,
            })
            .collect()
    }
}

/// All reports whose expected cost is within [`TIE_TOL`] of the minimum.
pub fn gamma_from_cost(cost: &CostMatrix, p: &[f64]) -> Vec<usize> {
    let e = cost.expected_costs(p);
    let m = e.iter().cloned().fold(f64::INFINITY, f64::min);
    e.iter()
        .enumerate()
        .filter(|(_, &x)| x <= m + TIE_TOL)
        .map(|(i, _)| i)
        .collect()
}
