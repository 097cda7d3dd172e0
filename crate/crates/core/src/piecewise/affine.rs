use serde::{Deserialize, Serialize};

use super::{check_increasing, OneSidedDerivatives};
use crate::error::{Error, Result};

/// `u -> slope * u + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    /// The line through `(u, v)` with the given slope.
    pub fn through(u: f64, v: f64, slope: f64) -> Self {
        Self {
            slope,
            intercept: v - slope * u,
        }
    }

    /// The line through two points with distinct abscissae.
    pub fn chord(u0: f64, v0: f64, u1: f64, v1: f64) -> Self {
        Self::through(u0, v0, (v1 - v0) / (u1 - u0))
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.slope * u + self.intercept
    }
}

/// A piecewise-affine function on the real line. Piece `i` covers
/// `[breakpoints[i-1], breakpoints[i])`, with unbounded first and last pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseAffineRaw")]
pub struct PiecewiseAffine {
    breakpoints: Vec<f64>,
    pieces: Vec<Affine>,
}

#[derive(Deserialize)]
struct PiecewiseAffineRaw {
    breakpoints: Vec<f64>,
    pieces: Vec<Affine>,
}

impl TryFrom<PiecewiseAffineRaw> for PiecewiseAffine {
    type Error = Error;
    fn try_from(r: PiecewiseAffineRaw) -> Result<Self> {
        Self::new(r.breakpoints, r.pieces)
    }
}

impl PiecewiseAffine {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Affine>) -> Result<Self> {
        check_increasing(&breakpoints)?;
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![],
            pieces: vec![Affine::new(0.0, c)],
        }
    }

    /// Linear interpolation through `nodes` (strictly increasing abscissae),
    /// continued outside the hull with the given tail slopes.
    pub fn interpolate(nodes: &[(f64, f64)], left_slope: f64, right_slope: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("interpolation needs at least one node".into()));
        }
        let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        check_increasing(&xs)?;
        let (u0, v0) = nodes[0];
        let (um, vm) = nodes[nodes.len() - 1];
        let mut pieces = vec![Affine::through(u0, v0, left_slope)];
        for w in nodes.windows(2) {
            pieces.push(Affine::chord(w[0].0, w[0].1, w[1].0, w[1].1));
        }
        pieces.push(Affine::through(um, vm, right_slope));
        Ok(Self {
            breakpoints: xs,
            pieces,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn piece_index(&self, u: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= u)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.pieces[self.piece_index(u)].eval(u)
    }

    /// Largest jump `|f(b+) - f(b-)|` over breakpoints.
    pub fn max_jump(&self) -> f64 {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| (self.pieces[i + 1].eval(b) - self.pieces[i].eval(b)).abs())
            .fold(0.0, f64::max)
    }

    /// Nondecreasing on the real line, within `tol` on slopes and jumps.
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.pieces.iter().all(|p| p.slope >= -tol)
            && self
                .breakpoints
                .iter()
                .enumerate()
                .all(|(i, &b)| self.pieces[i + 1].eval(b) >= self.pieces[i].eval(b) - tol)
    }

    /// Merges neighbouring pieces that agree to within `tol` in both
    /// coefficients (and are continuous there).
    pub fn simplified(&self, tol: f64) -> Self {
        let mut breakpoints = Vec::new();
        let mut pieces = vec![self.pieces[0]];
        for (i, &b) in self.breakpoints.iter().enumerate() {
            let next = self.pieces[i + 1];
            let last = *pieces.last().unwrap();
            if (next.slope - last.slope).abs() <= tol && (next.eval(b) - last.eval(b)).abs() <= tol {
                continue;
            }
            breakpoints.push(b);
            pieces.push(next);
        }
        Self { breakpoints, pieces }
    }

    /// Affine map of the argument and value: `u -> scale * f(shift + width * u)`.
    pub fn reparameterized(&self, shift: f64, width: f64, scale: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidInput("reparameterization width must be positive".into()));
        }
        let breakpoints = self.breakpoints.iter().map(|b| (b - shift) / width).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| Affine::new(scale * p.slope * width, scale * (p.slope * shift + p.intercept)))
            .collect();
        Ok(Self { breakpoints, pieces })
    }
}

impl OneSidedDerivatives for PiecewiseAffine {
    fn one_sided_derivatives(&self, u: f64) -> (f64, f64) {
        let i = self.piece_index(u);
        let left = if i > 0 && self.breakpoints[i - 1] == u { i - 1 } else { i };
        (self.pieces[left].slope, self.pieces[i].slope)
    }
}
