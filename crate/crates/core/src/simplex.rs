//! Probability vectors, norms on the simplex, uniform sampling and
//! empirical conditional label distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

/// Membership tolerance for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector over `n` outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates `probs`, renormalizing when it is within [`SIMPLEX_TOL`] of
    /// the simplex and rejecting it otherwise.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::NotOnSimplex("empty vector".into()));
        }
        if let Some(x) = probs.iter().find(|x| !x.is_finite()) {
            return Err(Error::NotOnSimplex(format!("non-finite entry {x}")));
        }
        if let Some(x) = probs.iter().find(|&&x| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&x)) {
            return Err(Error::NotOnSimplex(format!("entry {x} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex(format!("entries sum to {sum}")));
        }
        Ok(Self::renormalized(probs))
    }

    /// Normalizes nonnegative weights to a probability vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NotOnSimplex("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotOnSimplex("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    fn renormalized(mut probs: Vec<f64>) -> Self {
        for x in probs.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum != 1.0 {
            for x in probs.iter_mut() {
                *x /= sum;
            }
        }
        Self(probs)
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn centroid(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        dot(&self.0, w)
    }

    /// `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &SimplexPoint, t: f64) -> SimplexPoint {
        let v = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        Self::renormalized(v)
    }

    /// Smallest coordinate.
    pub fn min_coord(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        SimplexPoint::new(v).map_err(serde::de::Error::custom)
    }
}

impl AsRef<[f64]> for SimplexPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// L_p norm selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    #[default]
    L2,
    Linf,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => l2_norm(v),
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn distance_slices(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(self.norm(&d))
    }

    /// Diameter of the probability simplex under this norm.
    pub fn simplex_diameter(self) -> f64 {
        match self {
            NormKind::L1 => 2.0,
            NormKind::L2 => std::f64::consts::SQRT_2,
            NormKind::Linf => 1.0,
        }
    }

    /// Dual norm of `g` restricted to the tangent space {d : sum d = 0},
    /// i.e. sup { <g, d> : sum d = 0, ||d|| <= 1 }.
    pub fn tangent_dual(self, g: &[f64]) -> f64 {
        let n = g.len();
        if n < 2 {
            return 0.0;
        }
        match self {
            NormKind::L2 => {
                let mean = g.iter().sum::<f64>() / n as f64;
                g.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt()
            }
            NormKind::L1 => {
                let (lo, hi) = g
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                (hi - lo) / 2.0
            }
            NormKind::Linf => {
                let mut s = g.to_vec();
                s.sort_by(|a, b| a.total_cmp(b));
                let h = n / 2;
                let top: f64 = s[n - h..].iter().sum();
                let bottom: f64 = s[..h].iter().sum();
                top - bottom
            }
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        })
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(NormKind::L1),
            "l2" | "2" => Ok(NormKind::L2),
            "linf" | "inf" | "infinity" => Ok(NormKind::Linf),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

pub fn norm_distance(a: &SimplexPoint, b: &SimplexPoint, k: NormKind) -> Result<f64> {
    k.distance_slices(a.as_slice(), b.as_slice())
}

/// Distance used by audits: an L_p norm on probability vectors, or Euclidean
/// distance between points of the equilateral ternary diagram with unit side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    #[default]
    L2,
    Linf,
    Ternary,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::Ternary => {
                if a.len() != 3 || b.len() != 3 {
                    return Err(Error::InvalidInput("ternary metric needs n = 3".into()));
                }
                let (xa, ya) = ternary_plot(a);
                let (xb, yb) = ternary_plot(b);
                Ok((xa - xb).hypot(ya - yb))
            }
            m => m.norm_kind().distance_slices(a, b),
        }
    }

    /// The L_p norm the metric is built on. Ternary plot distance is the
    /// Euclidean distance scaled by 1/sqrt(2).
    pub fn norm_kind(self) -> NormKind {
        match self {
            Metric::L1 => NormKind::L1,
            Metric::L2 | Metric::Ternary => NormKind::L2,
            Metric::Linf => NormKind::Linf,
        }
    }

    /// Factor turning a norm distance into this metric's distance.
    pub fn scale(self) -> f64 {
        match self {
            Metric::Ternary => std::f64::consts::FRAC_1_SQRT_2,
            _ => 1.0,
        }
    }
}

impl From<NormKind> for Metric {
    fn from(k: NormKind) -> Self {
        match k {
            NormKind::L1 => Metric::L1,
            NormKind::L2 => Metric::L2,
            NormKind::Linf => Metric::Linf,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Ternary => f.write_str("ternary"),
            m => m.norm_kind().fmt(f),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ternary" | "plot" => Ok(Metric::Ternary),
            other => other.parse::<NormKind>().map(Metric::from),
        }
    }
}

/// Ternary diagram coordinates: e_1 at the origin, e_3 at (1, 0), e_2 at the apex.
pub fn ternary_plot(p: &[f64]) -> (f64, f64) {
    (p[2] + p[1] / 2.0, p[1] * 3f64.sqrt() / 2.0)
}

/// Inverse of [`ternary_plot`].
pub fn from_ternary_plot(x: f64, y: f64) -> Result<SimplexPoint> {
    let p2 = 2.0 * y / 3f64.sqrt();
    let p3 = x - p2 / 2.0;
    let p1 = 1.0 - p2 - p3;
    SimplexPoint::new(vec![p1, p2, p3])
}

/// One uniform draw from the simplex by normalized exponential spacings.
pub fn sample_uniform(rng: &mut Rng, n: usize) -> SimplexPoint {
    loop {
        let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        if s > 0.0 {
            return SimplexPoint(e.into_iter().map(|x: f64| x / s).collect());
        }
    }
}

pub fn sample_simplex(n: usize, count: usize, seed: u64) -> Vec<SimplexPoint> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| sample_uniform(&mut rng, n)).collect()
}

/// Categorical draw, returning a 0-based index.
pub fn sample_categorical(rng: &mut Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|w| *w > 0.0).unwrap_or(p.len() - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub x_id: String,
    /// 1-based outcome index.
    pub y: usize,
}

/// Samples of (feature id, outcome).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    n: usize,
    rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(n: usize, rows: Vec<Row>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(r) = rows.iter().find(|r| r.y == 0 || r.y > n) {
            return Err(Error::InvalidInput(format!(
                "outcome {} for `{}` outside 1..={n}",
                r.y, r.x_id
            )));
        }
        Ok(Self { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn read_csv<R: std::io::Read>(reader: R, n: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
        Self::new(n, rows)
    }

    pub fn from_path(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, n)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-bin empirical label distributions and the bins that received no rows.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalConditionals<K: Ord> {
    pub bins: BTreeMap<K, (SimplexPoint, usize)>,
    pub empty: Vec<K>,
}

/// Empirical label frequencies per bin. Bins listed in `bin_of` that receive
/// no rows are reported in `empty`.
pub fn empirical_conditional<K: Ord + Clone>(
    data: &LabeledDataset,
    bin_of: &BTreeMap<String, K>,
) -> Result<EmpiricalConditionals<K>> {
    let mut counts: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for r in data.rows() {
        let key = bin_of
            .get(&r.x_id)
            .ok_or_else(|| Error::MissingPrediction(r.x_id.clone()))?;
        counts.entry(key.clone()).or_insert_with(|| vec![0; data.n()])[r.y - 1] += 1;
    }
    let mut empty: Vec<K> = bin_of.values().filter(|k| !counts.contains_key(*k)).cloned().collect();
    empty.sort();
    empty.dedup();
    let bins = counts
        .into_iter()
        .map(|(k, c)| {
            let total: usize = c.iter().sum();
            let p = SimplexPoint(c.iter().map(|&x| x as f64 / total as f64).collect());
            (k, (p, total))
        })
        .collect();
    Ok(EmpiricalConditionals { bins, empty })
}
