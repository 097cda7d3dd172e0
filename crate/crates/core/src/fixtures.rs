//! Small worked examples and random instance generators shared by tests,
//! benches and the command line.

use rand::Rng as _;

use crate::discrete::{CostMatrix, OrderableSpec, PropertyFile};
use crate::embedding::{build_envelope_loss, build_surrogate, SmoothedSurrogate};
use crate::error::{Error, Result};
use crate::normals::{build_from_spec, NormalsSurrogate};
use crate::scenario::{Feature, PredictorRecipe, ScenarioSpec};
use crate::seed::{Rng, SeedTree};
use crate::simplex::{from_ternary_plot, sample_uniform, SimplexPoint};
use crate::surrogate::{LinearThreshold, ScalarProperty};

/// Three reports, three outcomes; rows are reports.
pub fn example_cost() -> CostMatrix {
    CostMatrix::new(vec![vec![0.0, 3.0, 5.0], vec![1.0, 0.0, 3.0], vec![3.0, 1.0, 0.0]])
        .expect("valid cost matrix")
}

pub fn example_phi() -> Vec<f64> {
    vec![0.0, 1.0, 3.0]
}

pub const EXAMPLE_OUTER_SLOPE: f64 = 3.0;

pub fn example_property_file() -> PropertyFile {
    PropertyFile {
        n: 3,
        reports: vec!["r1".into(), "r2".into(), "r3".into()],
        cost_matrix: Some(example_cost()),
        boundaries: None,
        witnesses: None,
    }
}

pub fn example_spec() -> OrderableSpec {
    OrderableSpec::from_cost(example_cost()).expect("example is strongly orderable")
}

pub fn example_embedding() -> Result<SmoothedSurrogate> {
    build_surrogate(&build_envelope_loss(&example_cost(), &example_phi(), Some(EXAMPLE_OUTER_SLOPE))?)
}

pub fn example_normals() -> Result<NormalsSurrogate> {
    build_from_spec(&example_spec())
}

/// Two fixed points on each boundary of the example, in boundary order.
pub fn example_boundary_points() -> [[SimplexPoint; 2]; 2] {
    let p = |v: [f64; 3]| SimplexPoint::new(v.to_vec()).expect("on simplex");
    [
        [p([0.7, 0.1, 0.2]), p([0.68, 0.04, 0.28])],
        [p([0.5, 0.125, 0.375]), p([0.25, 0.4375, 0.3125])],
    ]
}

/// Mean outcome on `{1, 2, 3}` thresholded at 3/2.
pub fn mean_threshold() -> LinearThreshold {
    LinearThreshold::new(vec![1.0, 2.0, 3.0], vec![1.5]).expect("valid")
}

/// Ternary-plot coordinates of the prediction and the nearby conditional in
/// the gap illustration, and the plot height of the second conditional.
pub const GAP_PREDICTION: (f64, f64) = (0.38, 0.02);
pub const GAP_NEAR_CONDITIONAL: (f64, f64) = (0.42, 0.02);
pub const GAP_LEVEL_HEIGHT: f64 = 0.5;

/// Prediction, nearby conditional, and a far conditional on the
/// prediction's level set of `prop` at height [`GAP_LEVEL_HEIGHT`].
pub fn gap_illustration<P: ScalarProperty + ?Sized>(prop: &P) -> Result<[SimplexPoint; 3]> {
    let f = from_ternary_plot(GAP_PREDICTION.0, GAP_PREDICTION.1)?;
    let near = from_ternary_plot(GAP_NEAR_CONDITIONAL.0, GAP_NEAR_CONDITIONAL.1)?;
    let target = prop.value(f.as_slice())?;
    let y = GAP_LEVEL_HEIGHT;
    let at = |x: f64| -> Result<f64> { Ok(prop.value(from_ternary_plot(x, y)?.as_slice())? - target) };
    let half = y / 3f64.sqrt();
    let (mut a, mut b) = (half + 1e-12, 1.0 - half - 1e-12);
    let (mut fa, fb) = (at(a)?, at(b)?);
    if fa * fb > 0.0 {
        return Err(Error::NoSignChange(format!("level {target} does not cross height {y}")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = at(m)?;
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let far = from_ternary_plot(0.5 * (a + b), y)?;
    Ok([f, near, far])
}

/// A random convex-in-report cost on `reports` equally spaced embedded
/// reports; such costs are orderable by construction.
pub fn random_convex_cost(outcomes: usize, reports: usize, rng: &mut Rng) -> Result<CostMatrix> {
    let k = (reports - 1) as f64;
    let lo = rng.random_range(0..outcomes);
    let hi = (lo + 1 + rng.random_range(0..outcomes - 1)) % outcomes;
    let mut cols = Vec::with_capacity(outcomes);
    for y in 0..outcomes {
        let a = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.0..0.3);
        let t = rng.random_range(0.0..=k);
        let m = if y == lo {
            rng.random_range(-0.5..=-0.3)
        } else if y == hi {
            rng.random_range(k + 0.3..=k + 0.5)
        } else {
            rng.random_range(-0.5..=k + 0.5)
        };
        let col: Vec<f64> = (0..reports)
            .map(|r| {
                let u = r as f64;
                a * (u - m).powi(2) + b * (u - t).max(0.0)
            })
            .collect();
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        cols.push(col.into_iter().map(|v| v - min).collect::<Vec<_>>());
    }
    CostMatrix::new((0..reports).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
}

/// Draws convex costs until one is strongly orderable with every boundary
/// gap at least `min_gap`.
pub fn random_orderable_spec(outcomes: usize, reports: usize, min_gap: f64, seed: u64) -> Result<OrderableSpec> {
    let tree = SeedTree::new(seed).child("orderable");
    for attempt in 0..1000u64 {
        let mut rng = tree.index(attempt).rng();
        let Ok(cost) = random_convex_cost(outcomes, reports, &mut rng) else {
            continue;
        };
        if let Ok(spec) = OrderableSpec::from_cost(cost) {
            if spec.boundary_gaps()?.iter().all(|&g| g >= min_gap) {
                return Ok(spec);
            }
        }
    }
    Err(Error::NotStronglyOrderable(format!(
        "no spec with gap {min_gap} for n = {outcomes}, {reports} reports"
    )))
}

/// `features` features with uniformly random masses and conditionals.
pub fn random_scenario(n: usize, features: usize, predictor: PredictorRecipe, seed: u64) -> Result<ScenarioSpec> {
    let mut rng = SeedTree::new(seed).child("scenario").rng();
    let weights = sample_uniform(&mut rng, features);
    let features = weights
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &w)| Feature {
            id: format!("x{i}"),
            weight: w,
            conditional: sample_uniform(&mut rng, n),
        })
        .collect();
    ScenarioSpec::new(n, features, predictor)
}
