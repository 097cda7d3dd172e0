//! Smoothing of an embedded polyhedral loss into a Lipschitz surrogate.
//!
//! The discrete loss is first embedded as a max-affine loss whose kinks sit
//! at the embedding points. Its subgradient selection is interpolated
//! linearly on the embedding points and their midpoints, then integrated to
//! a piecewise-quadratic loss. The elicited property is a piecewise ratio of
//! expectations; the link rounds at the midpoints.

use serde::{Deserialize, Serialize};

use crate::discrete::{gamma_from_cost, CostMatrix};
use crate::error::{Error, Result};
use crate::piecewise::{
    check_increasing, integrate_from_zero, lower_convex_envelope, subgradient_interval, Affine, MaxAffine,
    MaxAffineLoss, PiecewiseAffine, PiecewiseQuadratic,
};
use crate::roe::{LipschitzBound, LipschitzOptions, RatioPieces};

/// A max-affine loss together with the points embedding each report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingInput {
    pub loss: MaxAffineLoss,
    pub phi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostMatrix>,
}

impl EmbeddingInput {
    /// Checks that `phi` is increasing and, with a cost matrix attached, that
    /// the loss reproduces it at the embedding points.
    pub fn new(loss: MaxAffineLoss, phi: Vec<f64>, cost: Option<CostMatrix>) -> Result<Self> {
        check_increasing(&phi)?;
        if let Some(c) = &cost {
            if c.reports() != phi.len() || c.outcomes() != loss.outcomes() {
                return Err(Error::InvalidInput("cost matrix does not match the embedding".into()));
            }
            for (r, &u) in phi.iter().enumerate() {
                for y in 0..c.outcomes() {
                    let found = loss.eval(u, y);
                    if (found - c.get(r, y)).abs() > 1e-10 {
                        return Err(Error::EmbeddingMismatch {
                            report: r,
                            outcome: y,
                            expected: c.get(r, y),
                            found,
                        });
                    }
                }
            }
        }
        Ok(Self { loss, phi, cost })
    }

    pub fn outcomes(&self) -> usize {
        self.loss.outcomes()
    }
}

/// Smallest outer slope for which the outer extensions dominate every chord.
pub fn required_outer_slope(cost: &CostMatrix, phi: &[f64]) -> Result<f64> {
    let mut req: f64 = 0.0;
    for y in 0..cost.outcomes() {
        let chords = column_chords(cost, phi, y)?;
        let (first, last) = (chords[0].line.slope, chords[chords.len() - 1].line.slope);
        req = req.max(-first).max(last);
    }
    Ok(req)
}

/// `1 + max |chord slope|`.
pub fn default_outer_slope(cost: &CostMatrix, phi: &[f64]) -> Result<f64> {
    let mut m: f64 = 0.0;
    for y in 0..cost.outcomes() {
        m = column_chords(cost, phi, y)?
            .iter()
            .fold(m, |m, c| m.max(c.line.slope.abs()));
    }
    Ok(1.0 + m)
}

/// Unit-spaced embedding points `0, 1, ..., k`.
pub fn default_phi(reports: usize) -> Vec<f64> {
    (0..reports).map(|r| r as f64).collect()
}

fn column_chords(cost: &CostMatrix, phi: &[f64], y: usize) -> Result<Vec<crate::piecewise::Chord>> {
    if phi.len() != cost.reports() {
        return Err(Error::DimensionMismatch {
            expected: cost.reports(),
            found: phi.len(),
        });
    }
    let pts: Vec<(f64, f64)> = phi.iter().enumerate().map(|(r, &u)| (u, cost.get(r, y))).collect();
    lower_convex_envelope(&pts)
}

/// Per outcome: the lower convex envelope of `(phi_r, l(r, y))` extended
/// with slope `-S` to the left and `+S` to the right.
pub fn build_envelope_loss(cost: &CostMatrix, phi: &[f64], outer_slope: Option<f64>) -> Result<EmbeddingInput> {
    check_increasing(phi)?;
    let required = required_outer_slope(cost, phi)?;
    let s = match outer_slope {
        Some(s) => s,
        None => default_outer_slope(cost, phi)?,
    };
    if !(s.is_finite() && s > 0.0 && s >= required) {
        return Err(Error::OuterSlope { given: s, required });
    }
    let k = phi.len() - 1;
    let mut per_outcome = Vec::with_capacity(cost.outcomes());
    for y in 0..cost.outcomes() {
        let mut lines = vec![Affine::through(phi[0], cost.get(0, y), -s)];
        lines.extend(column_chords(cost, phi, y)?.iter().map(|c| c.line));
        lines.push(Affine::through(phi[k], cost.get(k, y), s));
        lines.dedup_by(|b, a| (a.slope - b.slope).abs() <= 1e-12 && (a.intercept - b.intercept).abs() <= 1e-12);
        per_outcome.push(MaxAffine::new(lines)?);
    }
    EmbeddingInput::new(MaxAffineLoss::new(per_outcome)?, phi.to_vec(), Some(cost.clone()))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Subgradient selection: the derivative where it exists, zero when the
/// one-sided derivatives differ in sign (zero has its own sign), and their
/// average otherwise.
pub fn pseudo_identification(input: &EmbeddingInput, u: f64) -> Vec<f64> {
    (0..input.outcomes())
        .map(|y| {
            let (lo, hi) = subgradient_interval(input.loss.outcome(y), u);
            if lo == hi {
                hi
            } else if sign(lo) != sign(hi) {
                0.0
            } else {
                0.5 * (lo + hi)
            }
        })
        .collect()
}

/// Embedding points merged with consecutive midpoints.
pub fn interpolation_set(phi: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(2 * phi.len() - 1);
    for (i, &x) in phi.iter().enumerate() {
        if i > 0 {
            u.push(0.5 * (phi[i - 1] + x));
        }
        u.push(x);
    }
    u
}

/// Link thresholds: midpoints of consecutive embedding points.
pub fn midpoint_thresholds(phi: &[f64]) -> Vec<f64> {
    phi.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Linear interpolation of [`pseudo_identification`] over the interpolation
/// set, continued with unit slope outside it.
pub fn interpolate_identification(input: &EmbeddingInput) -> Result<Vec<PiecewiseAffine>> {
    let us = interpolation_set(&input.phi);
    let nodes: Vec<Vec<f64>> = us.iter().map(|&u| pseudo_identification(input, u)).collect();
    (0..input.outcomes())
        .map(|y| {
            let pts: Vec<(f64, f64)> = us.iter().zip(&nodes).map(|(&u, v)| (u, v[y])).collect();
            let f = PiecewiseAffine::interpolate(&pts, 1.0, 1.0)?;
            if !f.is_nondecreasing(1e-12) {
                return Err(Error::NonMonotone { outcome: y });
            }
            Ok(f)
        })
        .collect()
}

/// The smoothed surrogate: identification functions, losses, link and
/// Lipschitz constants of the elicited property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedSurrogate {
    pub phi: Vec<f64>,
    pub interpolation: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub v_bar: Vec<PiecewiseAffine>,
    pub l_bar: Vec<PiecewiseQuadratic>,
    pub lipschitz: LipschitzBound,
    pub range: (f64, f64),
    /// `max |v_bar(u, y)|` over the property range.
    pub vbar_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostMatrix>,
    #[serde(skip)]
    roe: RatioPieces,
}

#[derive(Deserialize)]
struct SmoothedSurrogateRaw {
    phi: Vec<f64>,
    interpolation: Vec<f64>,
    thresholds: Vec<f64>,
    v_bar: Vec<PiecewiseAffine>,
    l_bar: Vec<PiecewiseQuadratic>,
    lipschitz: LipschitzBound,
    range: (f64, f64),
    vbar_sup: f64,
    #[serde(default)]
    cost: Option<CostMatrix>,
}

impl<'de> Deserialize<'de> for SmoothedSurrogate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SmoothedSurrogateRaw::deserialize(d)?;
        let roe = RatioPieces::new(&r.v_bar).map_err(serde::de::Error::custom)?;
        if r.l_bar.len() != r.v_bar.len() {
            return Err(serde::de::Error::custom("v_bar and l_bar differ in outcome count"));
        }
        check_increasing(&r.thresholds).map_err(serde::de::Error::custom)?;
        Ok(SmoothedSurrogate {
            phi: r.phi,
            interpolation: r.interpolation,
            thresholds: r.thresholds,
            v_bar: r.v_bar,
            l_bar: r.l_bar,
            lipschitz: r.lipschitz,
            range: r.range,
            vbar_sup: r.vbar_sup,
            cost: r.cost,
            roe,
        })
    }
}

pub fn build_surrogate(input: &EmbeddingInput) -> Result<SmoothedSurrogate> {
    build_surrogate_with(input, &LipschitzOptions::default())
}

pub fn build_surrogate_with(input: &EmbeddingInput, opts: &LipschitzOptions) -> Result<SmoothedSurrogate> {
    let v_bar = interpolate_identification(input)?;
    let l_bar: Vec<PiecewiseQuadratic> = v_bar.iter().map(integrate_from_zero).collect();
    let roe = RatioPieces::new(&v_bar)?;
    let range = roe.range()?;
    let lipschitz = roe.lipschitz(opts)?;
    let vbar_sup = sup_abs_on(&v_bar, range);
    Ok(SmoothedSurrogate {
        phi: input.phi.clone(),
        interpolation: interpolation_set(&input.phi),
        thresholds: midpoint_thresholds(&input.phi),
        v_bar,
        l_bar,
        lipschitz,
        range,
        vbar_sup,
        cost: input.cost.clone(),
        roe,
    })
}

fn sup_abs_on(v: &[PiecewiseAffine], (lo, hi): (f64, f64)) -> f64 {
    let mut us = vec![lo, hi];
    us.extend(v[0].breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
    v.iter()
        .flat_map(|f| us.iter().map(move |&u| f.eval(u).abs()))
        .fold(0.0, f64::max)
}

impl SmoothedSurrogate {
    pub fn outcomes(&self) -> usize {
        self.v_bar.len()
    }

    pub fn ratio_pieces(&self) -> &RatioPieces {
        &self.roe
    }

    /// The elicited property, by the closed form of the piece whose region
    /// contains `p`.
    pub fn gamma(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.outcomes() {
            return Err(Error::DimensionMismatch {
                expected: self.outcomes(),
                found: p.len(),
            });
        }
        self.roe.eval(p)
    }

    /// 0-based report: the number of thresholds strictly below `u`.
    pub fn link(&self, u: f64) -> usize {
        self.thresholds.iter().filter(|&&s| s < u).count()
    }

    /// Discrete property of the attached cost matrix.
    pub fn gamma_discrete(&self, p: &[f64]) -> Option<Vec<usize>> {
        self.cost.as_ref().map(|c| gamma_from_cost(c, p))
    }

    /// Reparameterizes so that the property range becomes `[0, 1]`:
    /// `v*(u) = w v(m + w u)` with `m` the range minimum and `w` its width.
    pub fn normalized(&self) -> Result<Self> {
        let (m, hi) = self.range;
        let w = hi - m;
        if !(w > 1e-12) {
            return Err(Error::DegenerateRange { min: m, max: hi });
        }
        let v_bar = self
            .v_bar
            .iter()
            .map(|f| f.reparameterized(m, w, w))
            .collect::<Result<Vec<_>>>()?;
        let l_bar = v_bar.iter().map(integrate_from_zero).collect();
        let roe = RatioPieces::new(&v_bar)?;
        let map = |u: &f64| (u - m) / w;
        Ok(Self {
            phi: self.phi.iter().map(map).collect(),
            interpolation: self.interpolation.iter().map(map).collect(),
            thresholds: self.thresholds.iter().map(map).collect(),
            range: roe.range()?,
            v_bar,
            l_bar,
            lipschitz: self.lipschitz.scaled(1.0 / w),
            vbar_sup: self.vbar_sup * w,
            cost: self.cost.clone(),
            roe,
        })
    }
}
