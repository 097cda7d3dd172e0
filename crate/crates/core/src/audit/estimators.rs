use super::{AuditReport, BinKey, BinStats, Binning, Notion, Population};
use crate::error::Result;
use crate::simplex::{Metric, SimplexPoint};
use crate::surrogate::ScalarProperty;

/// Distribution calibration under an arbitrary binning of the predictions:
/// mass-weighted mean of `||f(x) - D_bin||`.
pub fn distribution_calibration<K: Ord + Clone>(
    pop: &Population<SimplexPoint>,
    keys: &[K],
    metric: Metric,
) -> Result<AuditReport> {
    let binned = pop.bins_by(keys);
    let mut eps = 0.0;
    for (cell, &b) in pop.cells().iter().zip(&binned.assignment) {
        eps += cell.weight * metric.distance(cell.prediction.as_slice(), &binned.bins[b].conditional)?;
    }
    Ok(AuditReport {
        notion: Notion::Distribution,
        norm: metric.to_string(),
        epsilon_hat: eps,
        bins: BinStats::of(&binned.bins, 0),
        bounds: vec![],
    })
}

/// Distribution calibration with respect to `prop`: predictions are grouped
/// by the exact value of `prop(f(x))`.
pub fn dist_calibration_wrt<P: ScalarProperty + ?Sized>(
    pop: &Population<SimplexPoint>,
    prop: &P,
    metric: Metric,
) -> Result<AuditReport> {
    let keys = pop
        .cells()
        .iter()
        .map(|c| prop.value(c.prediction.as_slice()).map(BinKey::value))
        .collect::<Result<Vec<_>>>()?;
    distribution_calibration(pop, &keys, metric)
}

/// Calibration of a scalar predictor: mass-weighted mean of
/// `|prop(D_bin) - g(x)|`, with `g(x)` replaced by its bin midpoint under
/// width binning.
pub fn surrogate_calibration<P: ScalarProperty + ?Sized>(
    pop: &Population<f64>,
    prop: &P,
    binning: Binning,
    metric: Metric,
) -> Result<AuditReport> {
    let keys: Vec<_> = pop.cells().iter().map(|c| binning.key(c.prediction)).collect();
    let binned = pop.bins_by(&keys);
    let values = binned
        .bins
        .iter()
        .map(|b| prop.value(&b.conditional))
        .collect::<Result<Vec<_>>>()?;
    let eps = pop
        .cells()
        .iter()
        .zip(&binned.assignment)
        .map(|(c, &b)| c.weight * (values[b] - binning.representative(c.prediction)).abs())
        .fold(0.0, |acc, w| acc + w);
    let preds: Vec<f64> = pop.cells().iter().map(|c| c.prediction).collect();
    Ok(AuditReport {
        notion: Notion::Surrogate,
        norm: metric.to_string(),
        epsilon_hat: eps,
        bins: BinStats::of(&binned.bins, binning.empty_bins(&preds, binned.bins.len())),
        bounds: vec![],
    })
}

/// Probability that a discrete prediction is not among the reports `gamma`
/// assigns to the conditional of its bin.
pub fn discrete_calibration(
    pop: &Population<usize>,
    gamma: impl Fn(&[f64]) -> Vec<usize>,
) -> Result<AuditReport> {
    let keys: Vec<_> = pop.cells().iter().map(|c| BinKey::Report(c.prediction)).collect();
    let binned = pop.bins_by(&keys);
    let eps = pop
        .cells()
        .iter()
        .zip(&binned.assignment)
        .filter(|(c, &b)| !gamma(&binned.bins[b].conditional).contains(&c.prediction))
        .map(|(c, _)| c.weight)
        .fold(0.0, |acc, w| acc + w);
    Ok(AuditReport {
        notion: Notion::Discrete,
        norm: "zero-one".into(),
        epsilon_hat: eps,
        bins: BinStats::of(&binned.bins, 0),
        bounds: vec![],
    })
}
