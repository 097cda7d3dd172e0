//! Monte Carlo checks that a surrogate refines its discrete property.

use serde::{Deserialize, Serialize};

use crate::discrete::OrderableSpec;
use crate::error::Result;
use crate::exec::Execution;
use crate::seed::SeedTree;
use crate::simplex::sample_uniform;
use crate::surrogate::LinkedProperty;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStats {
    pub samples: usize,
    /// Samples farther than the margin from every boundary.
    pub checked: usize,
    pub failures: usize,
    pub pass_rate: f64,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Vec<f64>>,
}

const CHUNK: usize = 2048;

/// Draws uniform points and checks `link(Gamma(p))` against the reference
/// discrete property, skipping points within `margin` of a reference
/// boundary. Evaluation errors count as failures.
pub fn refinement_check<P: LinkedProperty + ?Sized>(
    prop: &P,
    reference: &OrderableSpec,
    samples: usize,
    seed: u64,
    margin: f64,
    exec: Execution,
) -> Result<RefinementStats> {
    let n = reference.n();
    let tree = SeedTree::new(seed);
    let chunks = samples.div_ceil(CHUNK);
    let parts = exec.map_range(chunks, |c| {
        let mut rng = tree.index(c as u64).rng();
        let mut checked = 0usize;
        let mut failures = 0usize;
        let mut first = None;
        for _ in 0..CHUNK.min(samples - c * CHUNK) {
            let p = sample_uniform(&mut rng, n);
            let p = p.as_slice();
            if reference.boundary_margin(p) <= margin {
                continue;
            }
            checked += 1;
            let ok = prop
                .value(p)
                .map(|u| reference.gamma(p).contains(&prop.link(u)))
                .unwrap_or(false);
            if !ok {
                failures += 1;
                first.get_or_insert_with(|| p.to_vec());
            }
        }
        (checked, failures, first)
    });
    let mut stats = RefinementStats {
        samples,
        checked: 0,
        failures: 0,
        pass_rate: 1.0,
        margin,
        first_failure: None,
    };
    for (c, f, first) in parts {
        stats.checked += c;
        stats.failures += f;
        if stats.first_failure.is_none() {
            stats.first_failure = first;
        }
    }
    if stats.checked > 0 {
        stats.pass_rate = 1.0 - stats.failures as f64 / stats.checked as f64;
    }
    Ok(stats)
}
