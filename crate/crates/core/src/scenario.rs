//! Synthetic feature/label distributions with a recipe for the predictor.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audit::{Cell, Population};
use crate::error::{Error, Result};
use crate::seed::SeedTree;
use crate::simplex::{sample_categorical, sample_uniform, LabeledDataset, Row, SimplexPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: String,
    pub weight: f64,
    pub conditional: SimplexPoint,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PredictorRecipe {
    /// Predict the true conditional.
    #[default]
    Bayes,
    /// `(c + eta * d) / (1 + eta)` with `d` uniform on the simplex.
    Perturbed { eta: f64 },
    /// Fixed distributional predictions.
    Table { table: BTreeMap<String, SimplexPoint> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub features: Vec<Feature>,
    #[serde(default)]
    pub predictor: PredictorRecipe,
}

impl ScenarioSpec {
    pub fn new(n: usize, features: Vec<Feature>, predictor: PredictorRecipe) -> Result<Self> {
        let s = Self { n, features, predictor };
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let s: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidInput("scenario has no features".into()));
        }
        let mut ids = BTreeSet::new();
        let mut total = 0.0;
        for f in &self.features {
            if !ids.insert(f.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate feature `{}`", f.id)));
            }
            if !(f.weight >= 0.0) {
                return Err(Error::InvalidInput(format!("feature `{}` has weight {}", f.id, f.weight)));
            }
            if f.conditional.dim() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: f.conditional.dim(),
                });
            }
            total += f.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("feature weights sum to {total}, not 1")));
        }
        match &self.predictor {
            PredictorRecipe::Perturbed { eta } if !(*eta >= 0.0) || !eta.is_finite() => {
                Err(Error::InvalidInput(format!("perturbation scale must be nonnegative, got {eta}")))
            }
            PredictorRecipe::Table { table } => {
                for f in &self.features {
                    let p = table
                        .get(&f.id)
                        .ok_or_else(|| Error::MissingPrediction(f.id.clone()))?;
                    if p.dim() != self.n {
                        return Err(Error::DimensionMismatch {
                            expected: self.n,
                            found: p.dim(),
                        });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `rows` seeded draws of a feature by weight, then a label from its
    /// conditional.
    pub fn sample(&self, rows: usize, seed: u64) -> Result<LabeledDataset> {
        let mut rng = SeedTree::new(seed).child("rows").rng();
        let weights: Vec<f64> = self.features.iter().map(|f| f.weight).collect();
        let data = (0..rows)
            .map(|_| {
                let f = &self.features[sample_categorical(&mut rng, &weights)];
                let y = sample_categorical(&mut rng, f.conditional.as_slice());
                Row {
                    x_id: f.id.clone(),
                    y: y + 1,
                }
            })
            .collect();
        LabeledDataset::new(self.n, data)
    }

    /// The distributional predictor described by the recipe.
    pub fn predictor(&self, seed: u64) -> Result<BTreeMap<String, SimplexPoint>> {
        let mut rng = SeedTree::new(seed).child("predictor").rng();
        self.features
            .iter()
            .map(|f| {
                let p = match &self.predictor {
                    PredictorRecipe::Bayes | PredictorRecipe::Perturbed { eta: 0.0 } => f.conditional.clone(),
                    PredictorRecipe::Perturbed { eta } => {
                        let d = sample_uniform(&mut rng, self.n);
                        SimplexPoint::new(
                            f.conditional
                                .as_slice()
                                .iter()
                                .zip(d.as_slice())
                                .map(|(c, d)| (c + eta * d) / (1.0 + eta))
                                .collect(),
                        )?
                    }
                    PredictorRecipe::Table { table } => table
                        .get(&f.id)
                        .cloned()
                        .ok_or_else(|| Error::MissingPrediction(f.id.clone()))?,
                };
                Ok((f.id.clone(), p))
            })
            .collect()
    }

    /// The exact population with the given predictions.
    pub fn population<T: Clone>(&self, predictions: &BTreeMap<String, T>) -> Result<Population<T>> {
        let cells = self
            .features
            .iter()
            .map(|f| {
                Ok(Cell {
                    id: f.id.clone(),
                    weight: f.weight,
                    rows: 0,
                    prediction: predictions
                        .get(&f.id)
                        .ok_or_else(|| Error::MissingPrediction(f.id.clone()))?
                        .clone(),
                    conditional: f.conditional.as_slice().to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Population::new(self.n, cells)
    }
}
