//! Piecewise ratio-of-expectations properties.
//!
//! Given identification functions `v_y` that are piecewise affine on shared
//! breakpoints `B_1 < ... < B_m`, the root of `u -> E_p v(u, Y)` on piece `j`
//! is `-<b_j, p> / <a_j, p>`, where `a_j, b_j` collect the per-outcome slope
//! and intercept. The piece is the first node with positive expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::piecewise::PiecewiseAffine;
use crate::seed::SeedTree;
use crate::simplex::{dot, sample_uniform, Metric, NormKind, SimplexPoint};

/// Smallest admissible denominator `<a_j, p>`.
pub const DENOM_TOL: f64 = 1e-12;

/// Lipschitz constants of a scalar property on the simplex under each norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// True when the constants come from sampling rather than an exact sup.
    pub sampled: bool,
}

impl LipschitzBound {
    pub fn zero() -> Self {
        Self {
            l1: 0.0,
            l2: 0.0,
            linf: 0.0,
            sampled: false,
        }
    }

    pub fn get(&self, k: NormKind) -> f64 {
        match k {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
        }
    }

    pub fn for_metric(&self, m: Metric) -> f64 {
        self.get(m.norm_kind()) / m.scale()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            l1: self.l1 * s,
            l2: self.l2 * s,
            linf: self.linf * s,
            sampled: self.sampled,
        }
    }

    fn absorb(&mut self, g: &[f64]) {
        self.l1 = self.l1.max(NormKind::L1.tangent_dual(g));
        self.l2 = self.l2.max(NormKind::L2.tangent_dual(g));
        self.linf = self.linf.max(NormKind::Linf.tangent_dual(g));
    }

    fn max(self, o: Self) -> Self {
        Self {
            l1: self.l1.max(o.l1),
            l2: self.l2.max(o.l2),
            linf: self.linf.max(o.linf),
            sampled: self.sampled || o.sampled,
        }
    }
}

/// Options for Lipschitz maximization when `n > 3`.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzOptions {
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for LipschitzOptions {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioPieces {
    n: usize,
    breakpoints: Vec<f64>,
    slope: Vec<Vec<f64>>,
    intercept: Vec<Vec<f64>>,
    node: Vec<Vec<f64>>,
}

impl RatioPieces {
    /// Requires every `v_y` to have the same breakpoints.
    pub fn new(v: &[PiecewiseAffine]) -> Result<Self> {
        let first = v.first().ok_or_else(|| Error::InvalidInput("no outcomes".into()))?;
        let bp = first.breakpoints().to_vec();
        if bp.is_empty() {
            return Err(Error::InvalidInput("identification functions need a breakpoint".into()));
        }
        if v.iter().any(|f| f.breakpoints() != bp.as_slice()) {
            return Err(Error::InvalidInput("identification functions must share breakpoints".into()));
        }
        let m = bp.len();
        let slope = (0..=m).map(|j| v.iter().map(|f| f.pieces()[j].slope).collect()).collect();
        let intercept = (0..=m).map(|j| v.iter().map(|f| f.pieces()[j].intercept).collect()).collect();
        let node = (0..m).map(|l| v.iter().map(|f| f.pieces()[l + 1].eval(bp[l])).collect()).collect();
        Ok(Self {
            n: v.len(),
            breakpoints: bp,
            slope,
            intercept,
            node,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> usize {
        self.slope.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `E_p v(B_l, Y)` for every breakpoint.
    pub fn node_values(&self, p: &[f64]) -> Vec<f64> {
        self.node.iter().map(|v| dot(v, p)).collect()
    }

    /// First node with positive expectation; the last piece if none.
    pub fn piece_of(&self, p: &[f64]) -> usize {
        self.node
            .iter()
            .position(|v| dot(v, p) > 0.0)
            .unwrap_or(self.breakpoints.len())
    }

    pub fn eval_piece(&self, j: usize, p: &[f64]) -> Result<f64> {
        let den = dot(&self.slope[j], p);
        if !(den > DENOM_TOL) {
            return Err(Error::VanishingDenominator(den));
        }
        Ok(-dot(&self.intercept[j], p) / den)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        self.eval_piece(self.piece_of(p), p)
    }

    /// Euclidean gradient of piece `j`'s ratio at `p`.
    pub fn gradient(&self, j: usize, p: &[f64]) -> Result<Vec<f64>> {
        let den = dot(&self.slope[j], p);
        if !(den > DENOM_TOL) {
            return Err(Error::VanishingDenominator(den));
        }
        let g = -dot(&self.intercept[j], p) / den;
        Ok(self.intercept[j]
            .iter()
            .zip(&self.slope[j])
            .map(|(b, a)| -(b + g * a) / den)
            .collect())
    }

    /// Halfspaces `<h, p> >= 0` whose intersection with the simplex is the
    /// closure of piece `j`'s region.
    pub fn halfspaces(&self, j: usize) -> Vec<Vec<f64>> {
        let m = self.breakpoints.len();
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<f64>>();
        let mut out = Vec::new();
        if j > 0 {
            out.push(neg(&self.node[j - 1]));
        }
        if j < m {
            out.push(self.node[j].clone());
        }
        out
    }

    /// Property range `[min, max]`; extremes of a quasilinear property sit at
    /// simplex vertices.
    pub fn range(&self) -> Result<(f64, f64)> {
        let vals = (0..self.n)
            .map(|i| self.eval(SimplexPoint::vertex(self.n, i).as_slice()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
    }

    /// Sup over the simplex of the tangent dual norm of the gradient.
    ///
    /// For `n = 3` each region polygon is computed exactly and the sup is
    /// taken over its edges (the gradient norm of a linear-fractional map is
    /// monotone along its level lines, so interior points are dominated).
    /// For larger `n` the constants are sampled and flagged.
    pub fn lipschitz(&self, opts: &LipschitzOptions) -> Result<LipschitzBound> {
        if self.n == 3 {
            self.lipschitz_planar()
        } else {
            self.lipschitz_sampled(opts)
        }
    }

    fn lipschitz_planar(&self) -> Result<LipschitzBound> {
        let mut k = LipschitzBound::zero();
        for j in 0..self.pieces() {
            let poly = clip_triangle(&self.halfspaces(j));
            if polygon_area(&poly) <= 1e-14 {
                continue;
            }
            if let Some(v) = poly.iter().find(|v| dot(&self.slope[j], v) <= DENOM_TOL) {
                return Err(Error::NotStronglyOrderable(format!(
                    "ratio denominator vanishes at {v:?} on piece {j}"
                )));
            }
            for e in 0..poly.len() {
                let (a, b) = (&poly[e], &poly[(e + 1) % poly.len()]);
                let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect() };
                for norm in [NormKind::L1, NormKind::L2, NormKind::Linf] {
                    let f = |t: f64| self.gradient(j, &at(t)).map(|g| norm.tangent_dual(&g)).unwrap_or(0.0);
                    let best = maximize_on_unit_interval(&f);
                    let slot = match norm {
                        NormKind::L1 => &mut k.l1,
                        NormKind::L2 => &mut k.l2,
                        NormKind::Linf => &mut k.linf,
                    };
                    *slot = slot.max(best);
                }
            }
        }
        Ok(k)
    }

    fn lipschitz_sampled(&self, opts: &LipschitzOptions) -> Result<LipschitzBound> {
        let n = self.n;
        let mut fixed: Vec<SimplexPoint> = (0..n).map(|i| SimplexPoint::vertex(n, i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                fixed.push(SimplexPoint::vertex(n, i).lerp(&SimplexPoint::vertex(n, j), 0.5));
            }
        }
        let mut k = LipschitzBound::zero();
        k.sampled = true;
        for p in &fixed {
            if let Ok(g) = self.gradient(self.piece_of(p.as_slice()), p.as_slice()) {
                k.absorb(&g);
            }
        }
        const CHUNK: usize = 4096;
        let chunks = opts.samples.div_ceil(CHUNK);
        let tree = SeedTree::new(opts.seed).child("lipschitz");
        let parts = opts.exec.map_range(chunks, |c| {
            let mut rng = tree.index(c as u64).rng();
            let mut part = LipschitzBound::zero();
            part.sampled = true;
            let count = CHUNK.min(opts.samples - c * CHUNK);
            for _ in 0..count {
                let p = sample_uniform(&mut rng, n);
                let j = self.piece_of(p.as_slice());
                match self.gradient(j, p.as_slice()) {
                    Ok(g) => part.absorb(&g),
                    Err(e) => return Err(e),
                }
            }
            Ok(part)
        });
        for part in parts {
            k = k.max(part?);
        }
        Ok(k)
    }
}

/// Dense scan plus golden-section refinement of a function on `[0, 1]`.
pub(crate) fn maximize_on_unit_interval(f: &dyn Fn(f64) -> f64) -> f64 {
    const GRID: usize = 512;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let v = f(i as f64 / GRID as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let h = 1.0 / GRID as f64;
    let (mut lo, mut hi) = (((best_i as f64 - 1.0) * h).max(0.0), ((best_i as f64 + 1.0) * h).min(1.0));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (c, d) = (hi - r * (hi - lo), lo + r * (hi - lo));
        let (fc, fd) = (f(c), f(d));
        best = best.max(fc).max(fd);
        if fc >= fd {
            hi = d;
        } else {
            lo = c;
        }
    }
    best
}

/// The standard triangle clipped by halfspaces `<h, p> >= 0`.
pub(crate) fn clip_triangle(halfspaces: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut poly: Vec<Vec<f64>> = (0..3).map(|i| SimplexPoint::vertex(3, i).into_inner()).collect();
    for h in halfspaces {
        if poly.is_empty() {
            break;
        }
        let mut out = Vec::new();
        for i in 0..poly.len() {
            let (a, b) = (&poly[i], &poly[(i + 1) % poly.len()]);
            let (sa, sb) = (dot(h, a), dot(h, b));
            if sa >= 0.0 {
                out.push(a.clone());
            }
            if (sa >= 0.0) != (sb >= 0.0) {
                let t = sa / (sa - sb);
                out.push(a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect());
            }
        }
        poly = out;
    }
    poly
}

pub(crate) fn polygon_area(poly: &[Vec<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = poly.iter().map(|p| crate::simplex::ternary_plot(p)).collect();
    let mut s = 0.0;
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        s += a.0 * b.1 - b.0 * a.1;
    }
    s.abs() / 2.0
}
