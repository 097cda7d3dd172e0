use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{dot, l2_norm};

/// The hyperplane `{p : <c, p> = b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineBoundary {
    pub c: Vec<f64>,
    pub b: f64,
}

/// Unit normal of a homogeneous hyperplane `{p : <o, p> = 0}`, sign not fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Normal(pub(crate) Vec<f64>);

/// Unit normal signed so that later regions lie on its nonnegative side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientedNormal(pub(crate) Vec<f64>);

macro_rules! vector_newtype {
    ($t:ty) => {
        impl $t {
            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn dot(&self, p: &[f64]) -> f64 {
                dot(&self.0, p)
            }
        }

        impl AsRef<[f64]> for $t {
            fn as_ref(&self) -> &[f64] {
                &self.0
            }
        }
    };
}

vector_newtype!(Normal);
vector_newtype!(OrientedNormal);

impl Normal {
    /// Normalizes `v`. Fails on (near) zero vectors and on multiples of the
    /// all-ones vector, whose hyperplane misses or contains the whole simplex.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&v);
        if !norm.is_finite() || norm <= 1e-14 {
            return Err(Error::DegenerateBoundary("zero normal".into()));
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let spread = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
        if spread <= 1e-12 * norm {
            return Err(Error::DegenerateBoundary("normal is proportional to the all-ones vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    pub fn oriented(self, sign: f64) -> OrientedNormal {
        OrientedNormal(self.0.into_iter().map(|x| sign * x).collect())
    }
}

impl OrientedNormal {
    /// Wraps an already-oriented unit normal.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        Normal::new(v).map(|n| n.oriented(1.0))
    }

    pub fn unoriented(&self) -> Normal {
        Normal(self.0.clone())
    }

    /// Euclidean distance from `p` to the hyperplane within the affine hull
    /// of the simplex.
    pub fn plane_distance(&self, p: &[f64]) -> f64 {
        let n = self.0.len() as f64;
        let mean = self.0.iter().sum::<f64>() / n;
        let tangent = self.0.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
        self.dot(p).abs() / tangent
    }
}

/// Rewrites `<c, p> = b` as `<c - b 1, p> = 0` using `sum p = 1`.
pub fn homogenize_boundary(bd: &AffineBoundary) -> Result<Normal> {
    Normal::new(bd.c.iter().map(|c| c - bd.b).collect())
}
