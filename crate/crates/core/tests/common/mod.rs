#![allow(dead_code)]

use std::collections::BTreeMap;

use ordelic::audit::{
    check_discretization_bound, check_postprocessing_bound, delta_to_threshold, DiscretizationCheck,
    DiscretizationOptions, Population, PostprocessingCheck,
};
use ordelic::fixtures::{example_embedding, example_normals, random_orderable_spec, random_scenario};
use ordelic::normals::build_from_spec;
use ordelic::piecewise::PiecewiseAffine;
use ordelic::scenario::PredictorRecipe;
use ordelic::{LinkedProperty, Metric, ScalarProperty, Surrogate};

pub const SQRT14: f64 = 3.741_657_386_773_941_3;

pub fn o1() -> [f64; 3] {
    [-1.0 / SQRT14, 3.0 / SQRT14, 2.0 / SQRT14]
}

pub fn o2() -> [f64; 3] {
    [-2.0 / SQRT14, -1.0 / SQRT14, 3.0 / SQRT14]
}

pub const COST: [[f64; 3]; 3] = [[0.0, 3.0, 5.0], [1.0, 0.0, 3.0], [3.0, 1.0, 0.0]];

/// Reports minimizing expected cost, by direct enumeration.
pub fn brute_gamma(p: &[f64]) -> Vec<usize> {
    let e: Vec<f64> = COST.iter().map(|r| r.iter().zip(p).map(|(a, b)| a * b).sum()).collect();
    let m = e.iter().copied().fold(f64::INFINITY, f64::min);
    (0..3).filter(|&r| e[r] <= m + 1e-10).collect()
}

/// Root of `u -> sum_y p_y v_y(u)` by plain bisection on a wide bracket.
pub fn bisect_root(v: &[PiecewiseAffine], p: &[f64]) -> f64 {
    let e = |u: f64| v.iter().zip(p).map(|(f, w)| w * f.eval(u)).sum::<f64>();
    let bp = v[0].breakpoints();
    let (mut lo, mut hi) = (bp.first().copied().unwrap_or(0.0) - 10.0, bp.last().copied().unwrap_or(0.0) + 10.0);
    while e(lo) > 0.0 {
        lo -= 10.0;
    }
    while e(hi) < 0.0 {
        hi += 10.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if e(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform simplex draws from a small xorshift generator, independent of the
/// library's sampler.
pub struct Draws(u64);

impl Draws {
    pub fn new(seed: u64) -> Self {
        Draws(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        ((self.0 >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..n).map(|_| -self.uniform().ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The two example constructions and one random normals surrogate per seed.
pub fn trial_property(seed: u64) -> Surrogate {
    match seed % 3 {
        0 => Surrogate::Normals(example_normals().unwrap()),
        1 => Surrogate::Embedding(example_embedding().unwrap()),
        _ => {
            let reports = 3 + (seed / 3 % 2) as usize;
            let spec = random_orderable_spec(3, reports, 1e-3, seed).unwrap();
            Surrogate::Normals(build_from_spec(&spec).unwrap())
        }
    }
}

fn trial_scenario(seed: u64) -> ordelic::scenario::ScenarioSpec {
    let features = 2 + (seed % 9) as usize;
    let eta = 0.05 + 0.5 * (seed % 7) as f64 / 6.0;
    random_scenario(3, features, PredictorRecipe::Perturbed { eta }, seed).unwrap()
}

/// One post-processing trial: a random scenario with a perturbed
/// distributional predictor, audited on `rows` sampled rows.
pub fn postprocessing_trial(seed: u64, rows: usize) -> PostprocessingCheck {
    let prop = trial_property(seed);
    let scenario = trial_scenario(seed);
    let data = scenario.sample(rows, seed).unwrap();
    let f = scenario.predictor(seed).unwrap();
    let pop = Population::from_data(&data, &f).unwrap();
    let k = prop.lipschitz().for_metric(Metric::L2);
    check_postprocessing_bound(&pop, &prop, k, Metric::L2).unwrap()
}

/// Moves `u` away from its nearest threshold until it is at least `gap` off.
pub fn keep_off_thresholds(thresholds: &[f64], u: f64, gap: f64) -> f64 {
    match thresholds
        .iter()
        .copied()
        .min_by(|a, b| (u - a).abs().total_cmp(&(u - b).abs()))
    {
        Some(t) if (u - t).abs() < gap => {
            if u > t {
                t + gap
            } else {
                t - gap
            }
        }
        _ => u,
    }
}

/// One discretization trial: scalar predictions `prop(f(x))` for a perturbed
/// `f`, kept `gap` away from the link thresholds.
pub fn discretization_trial(seed: u64, rows: usize, gap: f64) -> DiscretizationCheck {
    let prop = trial_property(seed);
    let scenario = trial_scenario(seed);
    let data = scenario.sample(rows, seed).unwrap();
    let f = scenario.predictor(seed).unwrap();
    let g: BTreeMap<String, f64> = f
        .iter()
        .map(|(id, p)| {
            let u = prop.value(p.as_slice()).unwrap();
            (id.clone(), keep_off_thresholds(prop.thresholds(), u, gap))
        })
        .collect();
    assert!(g.values().all(|&u| delta_to_threshold(prop.thresholds(), u) >= gap - 1e-12));
    let pop = Population::from_data(&data, &g).unwrap();
    check_discretization_bound(&pop, &prop, &DiscretizationOptions::default()).unwrap()
}
