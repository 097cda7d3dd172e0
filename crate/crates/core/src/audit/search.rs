use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dist_calibration_wrt, surrogate_calibration, AuditReport, BoundCheck, Binning, Population};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed::{Rng, SeedTree};
use crate::simplex::{sample_uniform, Metric, SimplexPoint};
use crate::surrogate::ScalarProperty;

const STEPS: [f64; 4] = [0.05, 0.01, 1e-3, 1e-4];
const REFINE_ITERS: usize = 400;
/// Pairs closer than this only measure rounding noise.
const MIN_DISTANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Random starting points, each probed along a fixed set of directions.
    pub starts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            starts: 2000,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
struct Pair {
    ratio: f64,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl Pair {
    fn none() -> Self {
        Pair {
            ratio: 0.0,
            p: vec![],
            q: vec![],
        }
    }

    fn keep_better(self, other: Pair) -> Pair {
        if other.ratio > self.ratio {
            other
        } else {
            self
        }
    }
}

fn ratio<P: ScalarProperty + ?Sized>(prop: &P, metric: Metric, p: &[f64], gp: f64, q: &[f64]) -> f64 {
    let (Ok(gq), Ok(d)) = (prop.value(q), metric.distance(p, q)) else {
        return 0.0;
    };
    if d >= MIN_DISTANCE {
        (gq - gp).abs() / d
    } else {
        0.0
    }
}

/// Largest step along `d` from `p` that stays on the simplex.
fn max_step(p: &[f64], d: &[f64]) -> f64 {
    p.iter()
        .zip(d)
        .filter(|(_, &di)| di < 0.0)
        .map(|(&pi, &di)| pi / -di)
        .fold(f64::INFINITY, f64::min)
}

fn step(p: &[f64], d: &[f64], s: f64) -> Vec<f64> {
    p.iter().zip(d).map(|(a, b)| (a + s * b).max(0.0)).collect()
}

/// Probe directions at `p`: every `e_i - e_j`, the tangent gradient and its
/// balanced sign pattern.
fn directions<P: ScalarProperty + ?Sized>(prop: &P, p: &[f64], gp: f64) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut dirs = Vec::with_capacity(n * n + 2);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                d[j] = -1.0;
                dirs.push(d);
            }
        }
    }
    // derivative along e_i - p equals the gradient up to a constant shift
    let h = 1e-7;
    let grad: Option<Vec<f64>> = (0..n)
        .map(|i| {
            let q: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(j, &pj)| pj + h * (if i == j { 1.0 } else { 0.0 } - pj))
                .collect();
            prop.value(&q).ok().map(|gq| (gq - gp) / h)
        })
        .collect();
    if let Some(g) = grad {
        let mean = g.iter().sum::<f64>() / n as f64;
        let scale = g.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
        // below this the finite difference is rounding noise
        if scale > 1e-6 {
            let centred: Vec<f64> = g.iter().map(|x| (x - mean) / scale).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| centred[b].total_cmp(&centred[a]));
            let mut signs = vec![0.0; n];
            for k in 0..n / 2 {
                signs[order[k]] = 1.0;
                signs[order[n - 1 - k]] = -1.0;
            }
            dirs.push(centred.iter().map(|x| -x).collect());
            dirs.push(centred);
            dirs.push(signs.iter().map(|x| -x).collect());
            dirs.push(signs);
        }
    }
    dirs
}

fn probe<P: ScalarProperty + ?Sized>(prop: &P, metric: Metric, p: &[f64], partner: &[f64]) -> Pair {
    let Ok(gp) = prop.value(p) else {
        return Pair::none();
    };
    let mut best = Pair {
        ratio: ratio(prop, metric, p, gp, partner),
        p: p.to_vec(),
        q: partner.to_vec(),
    };
    for d in directions(prop, p, gp) {
        let smax = max_step(p, &d);
        for s in STEPS {
            let s = s.min(smax);
            if !(s > 0.0) {
                continue;
            }
            let q = step(p, &d, s);
            let r = ratio(prop, metric, p, gp, &q);
            if r > best.ratio {
                best = Pair {
                    ratio: r,
                    p: p.to_vec(),
                    q,
                };
            }
        }
    }
    best
}

fn jitter(rng: &mut Rng, x: &[f64], scale: f64) -> Vec<f64> {
    let z: Vec<f64> = x
        .iter()
        .map(|&xi| (xi + scale * Distribution::<f64>::sample(&StandardNormal, rng)).max(0.0))
        .collect();
    let s: f64 = z.iter().sum();
    z.into_iter().map(|v| v / s).collect()
}

/// Random local moves of both endpoints, accepted when the ratio grows.
fn refine<P: ScalarProperty + ?Sized>(prop: &P, metric: Metric, mut best: Pair, rng: &mut Rng) -> Pair {
    if best.p.is_empty() {
        return best;
    }
    let mut scale = best
        .p
        .iter()
        .zip(&best.q)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    for _ in 0..REFINE_ITERS {
        let p = if rng.random::<bool>() { jitter(rng, &best.p, scale) } else { best.p.clone() };
        let q = jitter(rng, &best.q, scale);
        if let Ok(gp) = prop.value(&p) {
            let r = ratio(prop, metric, &p, gp, &q);
            if r > best.ratio {
                best = Pair { ratio: r, p, q };
                continue;
            }
        }
        scale *= 0.97;
    }
    best
}

fn search<P: ScalarProperty + ?Sized>(prop: &P, metric: Metric, budget: &SearchBudget) -> Pair {
    let n = prop.outcomes();
    let tree = SeedTree::new(budget.seed);
    let starts = tree.child("starts");
    let best = budget
        .exec
        .map_range(budget.starts, |i| {
            let mut rng = starts.index(i as u64).rng();
            let p = sample_uniform(&mut rng, n);
            let partner = sample_uniform(&mut rng, n);
            probe(prop, metric, p.as_slice(), partner.as_slice())
        })
        .into_iter()
        .fold(Pair::none(), Pair::keep_better);
    refine(prop, metric, best, &mut tree.child("refine").rng())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub k_hat: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Lower estimate of the optimal Lipschitz constant: the largest difference
/// quotient found from `samples` random starts.
pub fn lipschitz_estimate<P: ScalarProperty + ?Sized>(
    prop: &P,
    metric: Metric,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<LipschitzEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let best = search(
        prop,
        metric,
        &SearchBudget {
            starts: samples,
            seed,
            exec,
        },
    );
    Ok(LipschitzEstimate {
        k_hat: best.ratio,
        p: best.p,
        q: best.q,
    })
}

/// A one-feature instance on which `f` is `eps`-distribution calibrated but
/// `prop o f` misses calibration by more than `c * eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInstance {
    /// The prediction `f(x)`.
    pub p: SimplexPoint,
    /// The label distribution at `x`.
    pub q: SimplexPoint,
    pub ratio: f64,
    pub c: f64,
    pub epsilon: f64,
    pub gamma_error: f64,
    pub distribution: AuditReport,
    /// Carries the `counterexample` check `c * eps < gamma_error`.
    pub surrogate: AuditReport,
}

impl GapInstance {
    pub fn population(&self) -> Population<SimplexPoint> {
        Population::single(self.p.clone(), self.q.clone())
    }
}

/// Searches for `p, q` with `|prop(p) - prop(q)| > c ||p - q||` and audits
/// the resulting instance.
pub fn counterexample_gap<P: ScalarProperty + ?Sized>(
    prop: &P,
    c: f64,
    metric: Metric,
    budget: &SearchBudget,
) -> Result<GapInstance> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidInput(format!("gap constant must be nonnegative, got {c}")));
    }
    let best = search(prop, metric, budget);
    if !(best.ratio > c) {
        return Err(Error::SearchExhausted {
            best_ratio: best.ratio,
        });
    }
    let p = SimplexPoint::new(best.p)?;
    let q = SimplexPoint::new(best.q)?;
    let instance = Population::single(p.clone(), q.clone());
    let distribution = dist_calibration_wrt(&instance, prop, metric)?;
    let scalar = instance.map(|f| prop.value(f.as_slice()))?;
    let mut surrogate = surrogate_calibration(&scalar, prop, Binning::Exact, metric)?;
    let (eps, err) = (distribution.epsilon_hat, surrogate.epsilon_hat);
    let mut check = BoundCheck::new("counterexample", c * eps, err, 0.0).param("c", c);
    check.satisfied = c * eps < err;
    surrogate.bounds.push(check);
    if !(c * eps < err) {
        return Err(Error::SearchExhausted {
            best_ratio: err / eps,
        });
    }
    Ok(GapInstance {
        p,
        q,
        ratio: err / eps,
        c,
        epsilon: eps,
        gamma_error: err,
        distribution,
        surrogate,
    })
}
