use serde::{Deserialize, Serialize};

use super::{check_increasing, Affine, OneSidedDerivatives, PiecewiseAffine};
use crate::error::{Error, Result};

/// `u -> c2 u^2 + c1 u + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Quadratic {
    pub fn new(c2: f64, c1: f64, c0: f64) -> Self {
        Self { c2, c1, c0 }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.c2 * u + self.c1) * u + self.c0
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        2.0 * self.c2 * u + self.c1
    }

    /// Antiderivative of an affine map with the given constant term.
    fn antiderivative(a: &Affine, c0: f64) -> Self {
        Self::new(a.slope / 2.0, a.intercept, c0)
    }
}

/// Piecewise quadratic with the same piece layout as [`PiecewiseAffine`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseQuadraticRaw")]
pub struct PiecewiseQuadratic {
    breakpoints: Vec<f64>,
    pieces: Vec<Quadratic>,
}

#[derive(Deserialize)]
struct PiecewiseQuadraticRaw {
    breakpoints: Vec<f64>,
    pieces: Vec<Quadratic>,
}

impl TryFrom<PiecewiseQuadraticRaw> for PiecewiseQuadratic {
    type Error = Error;
    fn try_from(r: PiecewiseQuadraticRaw) -> Result<Self> {
        Self::new(r.breakpoints, r.pieces)
    }
}

impl PiecewiseQuadratic {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Quadratic>) -> Result<Self> {
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

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Quadratic] {
        &self.pieces
    }

    pub fn piece_index(&self, u: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= u)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.pieces[self.piece_index(u)].eval(u)
    }

    /// Largest value jump across breakpoints.
    pub fn max_value_jump(&self) -> f64 {
        self.jumps(|q, b| q.eval(b)).fold(0.0, |m, j| m.max(j.abs()))
    }

    /// Largest derivative jump across breakpoints.
    pub fn max_derivative_jump(&self) -> f64 {
        self.jumps(|q, b| q.derivative(b)).fold(0.0, |m, j| m.max(j.abs()))
    }

    fn jumps<'a>(&'a self, f: impl Fn(&Quadratic, f64) -> f64 + 'a) -> impl Iterator<Item = f64> + 'a {
        self.breakpoints
            .iter()
            .enumerate()
            .map(move |(i, &b)| f(&self.pieces[i + 1], b) - f(&self.pieces[i], b))
    }

    pub fn is_continuous(&self, tol: f64) -> bool {
        self.max_value_jump() <= tol
    }

    /// Convex: every piece has nonnegative curvature and the derivative does
    /// not drop across breakpoints.
    pub fn is_convex(&self, tol: f64) -> bool {
        self.pieces.iter().all(|q| q.c2 >= -tol) && self.jumps(|q, b| q.derivative(b)).all(|j| j >= -tol)
    }
}

impl OneSidedDerivatives for PiecewiseQuadratic {
    fn one_sided_derivatives(&self, u: f64) -> (f64, f64) {
        let i = self.piece_index(u);
        let left = if i > 0 && self.breakpoints[i - 1] == u { i - 1 } else { i };
        (self.pieces[left].derivative(u), self.pieces[i].derivative(u))
    }
}

/// `u -> integral_0^u v(z) dz`, stored piece by piece with constants fixed by
/// continuity outward from the piece containing zero.
pub fn integrate_from_zero(v: &PiecewiseAffine) -> PiecewiseQuadratic {
    let bp = v.breakpoints();
    let pieces = v.pieces();
    let z = v.piece_index(0.0);
    let mut out = vec![Quadratic::new(0.0, 0.0, 0.0); pieces.len()];
    out[z] = Quadratic::antiderivative(&pieces[z], 0.0);
    for i in z + 1..pieces.len() {
        let b = bp[i - 1];
        let q = Quadratic::antiderivative(&pieces[i], 0.0);
        out[i] = Quadratic::antiderivative(&pieces[i], out[i - 1].eval(b) - q.eval(b));
    }
    for i in (0..z).rev() {
        let b = bp[i];
        let q = Quadratic::antiderivative(&pieces[i], 0.0);
        out[i] = Quadratic::antiderivative(&pieces[i], out[i + 1].eval(b) - q.eval(b));
    }
    PiecewiseQuadratic {
        breakpoints: bp.to_vec(),
        pieces: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_integrals() {
        let zero = integrate_from_zero(&PiecewiseAffine::constant(0.0));
        for u in [-2.0, 0.0, 3.0] {
            assert_eq!(zero.eval(u), 0.0);
        }
        let id = PiecewiseAffine::new(vec![], vec![Affine::new(1.0, 0.0)]).unwrap();
        let q = integrate_from_zero(&id);
        for u in [-2.0, 0.0, 0.5, 3.0] {
            assert_eq!(q.eval(u), u * u / 2.0);
        }
    }

    #[test]
    fn zero_not_in_first_piece() {
        // Pieces to the left of zero are filled in by backward propagation.
        let v = PiecewiseAffine::interpolate(&[(-2.0, -1.0), (-1.0, 0.0), (1.0, 2.0)], 1.0, 1.0).unwrap();
        let l = integrate_from_zero(&v);
        assert_eq!(l.eval(0.0), 0.0);
        assert!(l.is_continuous(1e-12));
        assert!(l.max_derivative_jump() < 1e-12);
        // Trapezoid rule is exact on piecewise-linear integrands.
        let exact = |a: f64, b: f64| (b - a) * (v.eval(a) + v.eval(b)) / 2.0;
        let lhs = l.eval(-2.0) - l.eval(-3.0);
        assert!((lhs - exact(-3.0, -2.0)).abs() < 1e-12);
        assert!((l.eval(2.0) - exact(0.0, 1.0) - exact(1.0, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn one_sided_at_breakpoint() {
        let v = PiecewiseAffine::interpolate(&[(0.0, 0.0), (1.0, 1.0)], 0.0, 3.0).unwrap();
        let l = integrate_from_zero(&v);
        let (a, b) = l.one_sided_derivatives(1.0);
        assert_eq!((a, b), (1.0, 1.0));
        let (a, b) = v.one_sided_derivatives(1.0);
        assert_eq!((a, b), (1.0, 3.0));
    }
}
