use serde::{Deserialize, Serialize};

use super::{
    dist_calibration_wrt, surrogate_calibration, AuditReport, BinKey, BoundCheck, Binning, Population,
};
use crate::error::{Error, Result};
use crate::simplex::{Metric, SimplexPoint};
use crate::surrogate::{LinkedProperty, ScalarProperty};

const SLACK: f64 = 1e-9;

/// Distance from `u` to the nearest link threshold; infinite without thresholds.
pub fn delta_to_threshold(thresholds: &[f64], u: f64) -> f64 {
    thresholds.iter().map(|t| (u - t).abs()).fold(f64::INFINITY, f64::min)
}

/// Widest link cell after intersecting with `[lo, hi]`.
pub fn link_diameter(thresholds: &[f64], (lo, hi): (f64, f64)) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::DegenerateRange { min: lo, max: hi });
    }
    let mut edges = vec![lo];
    edges.extend(thresholds.iter().copied().filter(|&t| t > lo && t < hi));
    edges.push(hi);
    Ok(edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
}

/// 20 log-spaced values from `delta_min / 10` to `width`.
pub fn default_t_grid(delta_min: f64, width: f64) -> Vec<f64> {
    let lo = if delta_min > 0.0 && delta_min.is_finite() {
        delta_min / 10.0
    } else {
        width * 1e-6
    };
    if !(width > lo) {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), width.ln());
    (0..20).map(|i| (a + (b - a) * i as f64 / 19.0).exp()).collect()
}

/// Largest `||D_u - D_u'|| / |u - u'|` over bins adjacent in prediction
/// order. By the triangle inequality this is the smallest constant that
/// makes the bin conditionals Lipschitz in the prediction on the data.
pub fn estimate_c_marginal(pop: &Population<f64>, binning: Binning, metric: Metric) -> Result<f64> {
    let keys: Vec<_> = pop.cells().iter().map(|c| binning.key(c.prediction)).collect();
    let binned = pop.bins_by(&keys);
    let reps: Vec<f64> = binned
        .bins
        .iter()
        .map(|b| binning.representative(pop.cells()[b.members[0]].prediction))
        .collect();
    let mut c = 0.0f64;
    for i in 1..binned.bins.len() {
        let d = metric.distance(&binned.bins[i - 1].conditional, &binned.bins[i].conditional)?;
        let du = (reps[i] - reps[i - 1]).abs();
        if du > 0.0 {
            c = c.max(d / du);
        }
    }
    Ok(c)
}

/// Outcome of auditing `f` and `prop o f` together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostprocessingCheck {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub k: f64,
    /// Carries the bound checks.
    pub distribution: AuditReport,
    pub surrogate: AuditReport,
}

/// Audits `f` for distribution calibration with respect to `prop` and
/// `prop o f` for calibration, and checks `eps' <= K eps`; for `K < 1`
/// also checks `eps' <= eps`.
pub fn check_postprocessing_bound<P: ScalarProperty + ?Sized>(
    pop: &Population<SimplexPoint>,
    prop: &P,
    k: f64,
    metric: Metric,
) -> Result<PostprocessingCheck> {
    let mut distribution = dist_calibration_wrt(pop, prop, metric)?;
    let scalar = pop.map(|f| prop.value(f.as_slice()))?;
    let surrogate = surrogate_calibration(&scalar, prop, Binning::Exact, metric)?;
    let (eps, eps_p) = (distribution.epsilon_hat, surrogate.epsilon_hat);
    distribution.bounds.push(
        BoundCheck::new("postprocessing", eps_p, k * eps, SLACK)
            .param("k", k)
            .param("epsilon", eps),
    );
    if k < 1.0 {
        distribution
            .bounds
            .push(BoundCheck::new("contraction", eps_p, eps, SLACK).param("k", k));
    }
    Ok(PostprocessingCheck {
        epsilon: eps,
        epsilon_prime: eps_p,
        k,
        distribution,
        surrogate,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscretizationOptions {
    pub binning: Binning,
    pub metric: Metric,
    /// Lipschitz constant of the property; defaults to its own bound.
    pub k: Option<f64>,
    /// Lipschitz constant of `u -> D_{Y | g = u}`; estimated from adjacent
    /// bins when absent.
    pub c_marginal: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    /// Distribution calibration error of an `f` with `g = prop o f`; adds
    /// the composed bound when present.
    pub composed_epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationCheck {
    /// Surrogate calibration of `g`, carrying the bound checks.
    pub report: AuditReport,
    /// Probability that the linked prediction disagrees with the discrete
    /// property of its link-cell conditional.
    pub mismatch: f64,
    pub mismatch_se: f64,
    pub delta_min: f64,
    pub diam: f64,
    pub k: f64,
    pub c_marginal: f64,
    pub c_estimated: bool,
    pub t: f64,
    pub rhs: f64,
    pub vacuous: bool,
}

/// Checks `Pr[psi(g) != gamma(D_cell)] <= Pr[delta(g) < t] + (eps' + K C diam) / t`,
/// minimized over the grid and `delta_min`, plus the two-event decomposition
/// behind it.
pub fn check_discretization_bound<P: LinkedProperty + ?Sized>(
    pop: &Population<f64>,
    prop: &P,
    opts: &DiscretizationOptions,
) -> Result<DiscretizationCheck> {
    let binning = opts.binning;
    let mut report = surrogate_calibration(pop, prop, binning, opts.metric)?;
    let eps_p = report.epsilon_hat;
    let thresholds = prop.thresholds();
    let cells = pop.cells();
    let us: Vec<f64> = cells.iter().map(|c| binning.representative(c.prediction)).collect();
    let deltas: Vec<f64> = us.iter().map(|&u| delta_to_threshold(thresholds, u)).collect();
    let delta_min = cells
        .iter()
        .zip(&deltas)
        .filter(|(c, _)| c.weight > 0.0)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    if us.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let (lo, hi) = prop.range();
    let hull = us
        .iter()
        .fold((lo, hi), |(a, b), &u| (a.min(u), b.max(u)));
    let diam = link_diameter(thresholds, hull)?;
    let k = opts.k.unwrap_or_else(|| prop.lipschitz().for_metric(opts.metric));
    let (c, c_estimated) = match opts.c_marginal {
        Some(c) => (c, false),
        None => (estimate_c_marginal(pop, binning, opts.metric)?, true),
    };

    let links: Vec<usize> = us.iter().map(|&u| prop.link(u)).collect();
    let keys: Vec<_> = links.iter().map(|&r| BinKey::Report(r)).collect();
    let cells_by_link = pop.bins_by(&keys);
    let mut cell_values = Vec::with_capacity(cells_by_link.bins.len());
    let mut cell_reports = Vec::with_capacity(cells_by_link.bins.len());
    for b in &cells_by_link.bins {
        cell_values.push(prop.value(&b.conditional)?);
        cell_reports.push(prop.discrete(&b.conditional));
    }
    let mut mismatch = 0.0;
    for (i, cell) in cells.iter().enumerate() {
        let b = cells_by_link.assignment[i];
        if !cell_reports[b].contains(&links[i]) {
            mismatch += cell.weight;
        }
    }

    let numerator = eps_p + k * c * diam;
    let mut ts: Vec<f64> = opts
        .t_grid
        .clone()
        .unwrap_or_else(|| default_t_grid(delta_min, hi - lo));
    ts.push(delta_min);
    ts.retain(|t| *t > 0.0 && t.is_finite());
    let below = |t: f64| -> f64 {
        cells
            .iter()
            .zip(&deltas)
            .filter(|(_, &d)| d < t)
            .map(|(c, _)| c.weight)
            .fold(0.0, |acc, w| acc + w)
    };
    let (t_best, rhs) = ts
        .iter()
        .map(|&t| (t, below(t) + numerator / t))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let vacuous = rhs >= 1.0;

    let decomposition = ts
        .iter()
        .map(|&t| {
            let far: f64 = cells
                .iter()
                .enumerate()
                .filter(|(i, _)| (cell_values[cells_by_link.assignment[*i]] - us[*i]).abs() >= t)
                .map(|(_, c)| c.weight)
                .fold(0.0, |acc, w| acc + w);
            below(t) + far
        })
        .fold(f64::INFINITY, f64::min);

    report.bounds.push(
        BoundCheck::new("discretization", mismatch, rhs, SLACK)
            .param("t", t_best)
            .param("delta_min", delta_min)
            .param("diam", diam)
            .param("k", k)
            .param("c_marginal", c)
            .param("c_marginal_estimated", c_estimated)
            .param("epsilon_prime", eps_p)
            .param("vacuous", vacuous),
    );
    report
        .bounds
        .push(BoundCheck::new("decomposition", mismatch, decomposition, SLACK));
    if let Some(eps_f) = opts.composed_epsilon {
        let composed = (k * eps_f + c * k * diam) / delta_min;
        report.bounds.push(
            BoundCheck::new("composed", mismatch, composed, SLACK)
                .param("epsilon", eps_f)
                .param("vacuous", composed >= 1.0),
        );
    }

    let rows = pop.rows();
    let mismatch_se = if rows > 0 {
        (mismatch * (1.0 - mismatch) / rows as f64).sqrt()
    } else {
        0.0
    };
    Ok(DiscretizationCheck {
        report,
        mismatch,
        mismatch_se,
        delta_min,
        diam,
        k,
        c_marginal: c,
        c_estimated,
        t: t_best,
        rhs,
        vacuous,
    })
}
