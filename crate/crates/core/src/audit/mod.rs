//! Empirical calibration estimators and checks of the bounds relating them.

mod bounds;
mod estimators;
mod population;
mod predictor;
mod search;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bounds::{
    check_discretization_bound, check_postprocessing_bound, default_t_grid, delta_to_threshold,
    estimate_c_marginal, link_diameter, DiscretizationCheck, DiscretizationOptions, PostprocessingCheck,
};
pub use estimators::{
    discrete_calibration, dist_calibration_wrt, distribution_calibration, surrogate_calibration,
};
pub use population::{Bin, Binned, Cell, Population};
pub use predictor::PredictorTable;
pub use search::{counterexample_gap, lipschitz_estimate, GapInstance, LipschitzEstimate, SearchBudget};

/// Which calibration notion a report measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notion {
    /// Expected distance from a distributional prediction to its bin conditional.
    Distribution,
    /// Expected distance from a scalar prediction to the property of its bin conditional.
    Surrogate,
    /// Probability that a discrete prediction disagrees with its bin conditional.
    Discrete,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Distribution => "distribution",
            Notion::Surrogate => "surrogate",
            Notion::Discrete => "discrete",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub count: usize,
    /// Smallest bin probability mass.
    pub min_size: f64,
    /// Width bins between the smallest and largest prediction that hold no data.
    pub empty: usize,
}

impl BinStats {
    pub(crate) fn of<K>(bins: &[Bin<K>], empty: usize) -> Self {
        Self {
            count: bins.len(),
            min_size: bins.iter().map(|b| b.weight).fold(f64::INFINITY, f64::min),
            empty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl BoundCheck {
    pub fn new(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs <= rhs + slack,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub notion: Notion,
    /// `l1`, `l2`, `linf`, `plot` or `zero-one`.
    pub norm: String,
    pub epsilon_hat: f64,
    pub bins: BinStats,
    #[serde(default)]
    pub bounds: Vec<BoundCheck>,
}

impl AuditReport {
    pub fn all_satisfied(&self) -> bool {
        self.bounds.iter().all(|b| b.satisfied)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// Bin key with a total order matching the numeric order of values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinKey {
    Value(u64),
    Index(i64),
    Report(usize),
}

impl BinKey {
    pub fn value(u: f64) -> Self {
        let u = if u == 0.0 { 0.0 } else { u };
        let b = u.to_bits();
        BinKey::Value(if b >> 63 == 1 { !b } else { b | (1 << 63) })
    }
}

/// How scalar predictions are grouped into conditioning events.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// One bin per distinct prediction value.
    #[default]
    Exact,
    /// Uniform bins `[k w, (k + 1) w)`, represented by their midpoints.
    Width(f64),
}

impl Binning {
    pub fn width(w: f64) -> Result<Self> {
        if w > 0.0 && w.is_finite() {
            Ok(Binning::Width(w))
        } else {
            Err(Error::InvalidInput(format!("bin width must be positive, got {w}")))
        }
    }

    pub fn key(self, u: f64) -> BinKey {
        match self {
            Binning::Exact => BinKey::value(u),
            Binning::Width(w) => BinKey::Index((u / w).floor() as i64),
        }
    }

    /// The value standing in for every prediction in `u`'s bin.
    pub fn representative(self, u: f64) -> f64 {
        match self {
            Binning::Exact => u,
            Binning::Width(w) => ((u / w).floor() + 0.5) * w,
        }
    }

    pub(crate) fn empty_bins(self, values: &[f64], occupied: usize) -> usize {
        match self {
            Binning::Exact => 0,
            Binning::Width(w) => {
                let (lo, hi) = values
                    .iter()
                    .fold((i64::MAX, i64::MIN), |(lo, hi), &u| {
                        let k = (u / w).floor() as i64;
                        (lo.min(k), hi.max(k))
                    });
                if lo > hi {
                    0
                } else {
                    (hi - lo + 1) as usize - occupied
                }
            }
        }
    }
}
