//! Surrogate built directly from oriented boundary normals.
//!
//! With `k` oriented normals the identification function is
//!
//! ```text
//! v(u, y) = u - o_{1,y}                                  u <= 0
//!         = -o_{i,y} - (u - (i-1)) (o_{i+1,y} - o_{i,y})  i-1 <= u <= i
//!         = u - (k-1) - o_{k,y}                          u >= k-1
//! ```
//!
//! so `E_p v(i-1, Y) = -<o_i, p>` and the elicited property crosses `i - 1`
//! exactly on boundary `i`.

use serde::{Deserialize, Serialize};

use crate::discrete::{
    gamma_from_cost, normal_from_boundary_samples, orient_normals, region_of, reports_from_normals,
    sample_boundary, with_boundary_witnesses, CostMatrix, Normal, OrderableSpec, OrientedNormal, PropertyFile,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::piecewise::{integrate_from_zero, Affine, PiecewiseAffine, PiecewiseQuadratic};
use crate::roe::{LipschitzBound, LipschitzOptions, RatioPieces, DENOM_TOL};
use crate::seed::SeedTree;
use crate::simplex::dot;
use crate::verify::{refinement_check, RefinementStats};

/// Resampling rounds allowed per boundary when the sample matrix is rank
/// deficient.
pub const MAX_RESAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalsSurrogate {
    pub normals: Vec<OrientedNormal>,
    pub v: Vec<PiecewiseAffine>,
    pub loss: Vec<PiecewiseQuadratic>,
    pub thresholds: Vec<f64>,
    pub lipschitz: LipschitzBound,
    pub range: (f64, f64),
    pub gaps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostMatrix>,
    #[serde(skip)]
    roe: RatioPieces,
}

#[derive(Deserialize)]
struct NormalsSurrogateRaw {
    normals: Vec<OrientedNormal>,
    v: Vec<PiecewiseAffine>,
    loss: Vec<PiecewiseQuadratic>,
    thresholds: Vec<f64>,
    lipschitz: LipschitzBound,
    range: (f64, f64),
    gaps: Vec<f64>,
    #[serde(default)]
    cost: Option<CostMatrix>,
}

impl<'de> Deserialize<'de> for NormalsSurrogate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = NormalsSurrogateRaw::deserialize(d)?;
        if r.normals.is_empty() || r.thresholds.len() != r.normals.len() {
            return Err(serde::de::Error::custom("need one threshold per normal"));
        }
        let roe = RatioPieces::new(&r.v).map_err(serde::de::Error::custom)?;
        Ok(NormalsSurrogate {
            normals: r.normals,
            v: r.v,
            loss: r.loss,
            thresholds: r.thresholds,
            lipschitz: r.lipschitz,
            range: r.range,
            gaps: r.gaps,
            cost: r.cost,
            roe,
        })
    }
}

/// Per-outcome identification functions for the given oriented normals.
pub fn identification_functions(normals: &[OrientedNormal]) -> Result<Vec<PiecewiseAffine>> {
    let k = normals.len();
    if k == 0 {
        return Err(Error::InvalidInput("need at least one normal".into()));
    }
    let n = normals[0].dim();
    let breakpoints: Vec<f64> = (0..k).map(|i| i as f64).collect();
    (0..n)
        .map(|y| {
            let o = |i: usize| normals[i].as_slice()[y];
            let mut pieces = vec![Affine::new(1.0, -o(0))];
            for i in 1..k {
                // On [i-1, i]: -o_i - (u - (i-1)) (o_{i+1} - o_i), 1-based i.
                let d = o(i) - o(i - 1);
                pieces.push(Affine::new(-d, -o(i - 1) + (i as f64 - 1.0) * d));
            }
            pieces.push(Affine::new(1.0, -(k as f64 - 1.0) - o(k - 1)));
            PiecewiseAffine::new(breakpoints.clone(), pieces)
        })
        .collect()
}

pub fn build_from_spec(spec: &OrderableSpec) -> Result<NormalsSurrogate> {
    build_from_spec_with(spec, &LipschitzOptions::default())
}

pub fn build_from_spec_with(spec: &OrderableSpec, opts: &LipschitzOptions) -> Result<NormalsSurrogate> {
    let gaps = spec.boundary_gaps()?;
    let normals = spec.normals().to_vec();
    let v = identification_functions(&normals)?;
    let loss = v.iter().map(integrate_from_zero).collect();
    let roe = RatioPieces::new(&v)?;
    let lipschitz = roe.lipschitz(opts)?;
    let surrogate = NormalsSurrogate {
        thresholds: (0..normals.len()).map(|i| i as f64).collect(),
        range: (0.0, 0.0),
        normals,
        v,
        loss,
        lipschitz,
        gaps,
        cost: spec.cost().cloned(),
        roe,
    };
    let n = spec.n();
    let vals = (0..n)
        .map(|i| surrogate.roe_eval(crate::simplex::SimplexPoint::vertex(n, i).as_slice()))
        .collect::<Result<Vec<f64>>>()?;
    let range = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(NormalsSurrogate { range, ..surrogate })
}

impl NormalsSurrogate {
    pub fn outcomes(&self) -> usize {
        self.v.len()
    }

    pub fn ratio_pieces(&self) -> &RatioPieces {
        &self.roe
    }

    /// Closed-form property value by region membership.
    pub fn roe_eval(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.outcomes() {
            return Err(Error::DimensionMismatch {
                expected: self.outcomes(),
                found: p.len(),
            });
        }
        let k = self.normals.len();
        let j = region_of(&self.normals, p);
        if j == 0 {
            return Ok(self.normals[0].dot(p));
        }
        if j == k {
            return Ok(self.normals[k - 1].dot(p) + (k as f64 - 1.0));
        }
        let a = self.normals[j - 1].dot(p);
        let den = a - self.normals[j].dot(p);
        if !(den >= DENOM_TOL) {
            return Err(Error::VanishingDenominator(den));
        }
        Ok(a / den + (j as f64 - 1.0))
    }

    /// `clip(ceil(u), 0, k)` as a 0-based report.
    pub fn link(&self, u: f64) -> usize {
        let k = self.normals.len() as f64;
        u.ceil().clamp(0.0, k) as usize
    }

    /// Discrete property: cost minimizers if a cost matrix is attached,
    /// otherwise the regions cut out by the normals.
    pub fn gamma_discrete(&self, p: &[f64]) -> Vec<usize> {
        match &self.cost {
            Some(c) => gamma_from_cost(c, p),
            None => reports_from_normals(&self.normals, p, 1e-10),
        }
    }

    /// `E_p v(u, Y)`.
    pub fn expected_identification(&self, u: f64, p: &[f64]) -> f64 {
        self.v.iter().zip(p).map(|(f, w)| w * f.eval(u)).sum()
    }

    /// Node values `E_p v(i, Y) = -<o_{i+1}, p>` are nonpositive then
    /// nonnegative, which makes the root unique.
    pub fn is_sign_monotone(&self, p: &[f64], tol: f64) -> bool {
        let nodes: Vec<f64> = self.normals.iter().map(|o| -dot(o.as_slice(), p)).collect();
        let first_pos = nodes.iter().position(|&x| x > tol).unwrap_or(nodes.len());
        nodes[first_pos..].iter().all(|&x| x >= -tol)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    pub seed: u64,
    pub refinement_samples: usize,
    pub margin: f64,
    pub exec: Execution,
    pub lipschitz_samples: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            refinement_samples: 10_000,
            margin: 1e-8,
            exec: Execution::default(),
            lipschitz_samples: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// Normals recovered from boundary samples, oriented.
    pub recovered_normals: Vec<Vec<f64>>,
    /// Normals from homogenizing the input boundaries, oriented the same way.
    pub exact_normals: Vec<Vec<f64>>,
    pub max_normal_error: f64,
    /// Sampling rounds used per boundary (1 when the first draw sufficed).
    pub sampling_rounds: Vec<usize>,
    pub gaps: Vec<f64>,
    pub lipschitz: LipschitzBound,
    pub thresholds: Vec<f64>,
    pub refinement: RefinementStats,
}

/// Boundary sampling, null-space normals, orientation, construction and a
/// refinement check against the exactly homogenized input.
pub fn full_pipeline(file: &PropertyFile, opts: &PipelineOptions) -> Result<(NormalsSurrogate, PipelineReport)> {
    file.validate()?;
    let seeds = SeedTree::new(opts.seed);
    let exact = file.boundary_normals()?;
    let n = file.n;
    let mut recovered = Vec::with_capacity(exact.len());
    let mut rounds = Vec::with_capacity(exact.len());
    for (i, h) in exact.iter().enumerate() {
        let tree = seeds.child("boundary").index(i as u64);
        let mut found = None;
        for round in 0..MAX_RESAMPLES {
            let pts = sample_boundary(h.as_slice(), n - 1, tree.index(round as u64).root())?;
            match normal_from_boundary_samples(&pts) {
                Ok(o) => {
                    found = Some((o, round + 1));
                    break;
                }
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let (o, r) = found.ok_or(Error::RankDeficient {
            sigma: 0.0,
            threshold: 0.0,
        })?;
        recovered.push(o);
        rounds.push(r);
    }
    let witnesses = file.region_witnesses(&recovered)?;
    let witnesses =
        with_boundary_witnesses(&recovered, witnesses, 32, &seeds.child("orient"))?;
    let oriented = orient_normals(&recovered, &witnesses)?;
    let spec = OrderableSpec::new(file.reports.clone(), oriented, file.cost_matrix.clone())?;
    let lopts = LipschitzOptions {
        samples: opts.lipschitz_samples,
        seed: seeds.child("lipschitz").root(),
        exec: opts.exec,
    };
    let surrogate = build_from_spec_with(&spec, &lopts)?;

    let exact_oriented = orient_like(&exact, spec.normals());
    let reference = OrderableSpec::new(file.reports.clone(), exact_oriented.clone(), file.cost_matrix.clone())?;
    let refinement = refinement_check(
        &surrogate,
        &reference,
        opts.refinement_samples,
        seeds.child("refinement").root(),
        opts.margin,
        opts.exec,
    )?;
    let max_normal_error = spec
        .normals()
        .iter()
        .zip(&exact_oriented)
        .map(|(a, b)| {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        })
        .fold(0.0, f64::max);
    let report = PipelineReport {
        recovered_normals: spec.normals().iter().map(|o| o.as_slice().to_vec()).collect(),
        exact_normals: exact_oriented.iter().map(|o| o.as_slice().to_vec()).collect(),
        max_normal_error,
        sampling_rounds: rounds,
        gaps: surrogate.gaps.clone(),
        lipschitz: surrogate.lipschitz,
        thresholds: surrogate.thresholds.clone(),
        refinement,
    };
    Ok((surrogate, report))
}

/// Signs each exact normal to agree with its recovered counterpart.
fn orient_like(exact: &[Normal], oriented: &[OrientedNormal]) -> Vec<OrientedNormal> {
    exact
        .iter()
        .zip(oriented)
        .map(|(h, o)| {
            let s = if dot(h.as_slice(), o.as_slice()) >= 0.0 { 1.0 } else { -1.0 };
            h.clone().oriented(s)
        })
        .collect()
}
