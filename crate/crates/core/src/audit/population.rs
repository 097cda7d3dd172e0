use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::simplex::{LabeledDataset, SimplexPoint};

/// One feature value: its probability mass, the prediction made there and
/// the label distribution conditioned on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub id: String,
    pub weight: f64,
    /// Rows backing the cell; 0 for exact populations.
    pub rows: usize,
    pub prediction: T,
    pub conditional: Vec<f64>,
}

/// A finite distribution over (feature, label) together with a predictor.
/// Built either from a labeled dataset (empirical weights and frequencies)
/// or exactly from known conditionals.
#[derive(Clone, Debug, PartialEq)]
pub struct Population<T> {
    n: usize,
    cells: Vec<Cell<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin<K> {
    pub key: K,
    pub weight: f64,
    pub rows: usize,
    /// Mass-weighted mixture of the member conditionals.
    pub conditional: Vec<f64>,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binned<K> {
    pub bins: Vec<Bin<K>>,
    /// Bin index of each cell.
    pub assignment: Vec<usize>,
}

impl<T> Population<T> {
    /// Validates conditionals and renormalizes weights to sum to one.
    pub fn new(n: usize, mut cells: Vec<Cell<T>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = 0.0;
        for c in &cells {
            if !(c.weight >= 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidInput(format!("cell {} has weight {}", c.id, c.weight)));
            }
            if c.conditional.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.conditional.len(),
                });
            }
            SimplexPoint::new(c.conditional.clone())?;
            total += c.weight;
        }
        if !(total > 0.0) {
            return Err(Error::InvalidInput("population has zero mass".into()));
        }
        for c in &mut cells {
            c.weight /= total;
        }
        Ok(Self { n, cells })
    }

    /// One feature predicted `prediction` whose labels follow `conditional`.
    pub fn single(prediction: T, conditional: SimplexPoint) -> Self {
        Self {
            n: conditional.dim(),
            cells: vec![Cell {
                id: "x".into(),
                weight: 1.0,
                rows: 0,
                prediction,
                conditional: conditional.into_inner(),
            }],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn rows(&self) -> usize {
        self.cells.iter().map(|c| c.rows).sum()
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Population<U>> {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                Ok(Cell {
                    id: c.id.clone(),
                    weight: c.weight,
                    rows: c.rows,
                    prediction: f(&c.prediction)?,
                    conditional: c.conditional.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Population { n: self.n, cells })
    }

    /// Groups cells by key; bins come out in key order.
    pub fn bins_by<K: Ord + Clone>(&self, keys: &[K]) -> Binned<K> {
        assert_eq!(keys.len(), self.cells.len());
        let mut index: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            index.entry(k).or_default().push(i);
        }
        let mut assignment = vec![0; keys.len()];
        let bins = index
            .into_iter()
            .enumerate()
            .map(|(b, (key, members))| {
                let mut conditional = vec![0.0; self.n];
                let mut weight = 0.0;
                let mut rows = 0;
                for &i in &members {
                    assignment[i] = b;
                    let c = &self.cells[i];
                    weight += c.weight;
                    rows += c.rows;
                    for (acc, q) in conditional.iter_mut().zip(&c.conditional) {
                        *acc += c.weight * q;
                    }
                }
                if weight > 0.0 {
                    conditional.iter_mut().for_each(|q| *q /= weight);
                } else {
                    // massless bin: plain average keeps the conditional on the simplex
                    conditional = members.iter().fold(vec![0.0; self.n], |mut acc, &i| {
                        for (a, q) in acc.iter_mut().zip(&self.cells[i].conditional) {
                            *a += q / members.len() as f64;
                        }
                        acc
                    });
                }
                Bin {
                    key: key.clone(),
                    weight,
                    rows,
                    conditional,
                    members,
                }
            })
            .collect();
        Binned { bins, assignment }
    }
}

impl<T: Clone> Population<T> {
    /// Empirical population: cell mass is the row share of each `x_id` and
    /// the conditional is its label frequency.
    pub fn from_data(data: &LabeledDataset, predictions: &BTreeMap<String, T>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = data.n();
        let mut counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for row in data.rows() {
            counts.entry(row.x_id.as_str()).or_insert_with(|| vec![0; n])[row.y - 1] += 1;
        }
        let total = data.len() as f64;
        let cells = counts
            .into_iter()
            .map(|(id, c)| {
                let prediction = predictions
                    .get(id)
                    .ok_or_else(|| Error::MissingPrediction(id.to_string()))?
                    .clone();
                let rows: usize = c.iter().sum();
                Ok(Cell {
                    id: id.to_string(),
                    weight: rows as f64 / total,
                    rows,
                    prediction,
                    conditional: c.iter().map(|&k| k as f64 / rows as f64).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, cells })
    }
}
