//! One-dimensional piecewise structures: identification functions,
//! their integrals, max-affine losses, convex envelopes and roots.

mod affine;
mod envelope;
mod max_affine;
mod quadratic;
mod root;

pub use affine::{Affine, PiecewiseAffine};
pub use envelope::{lower_convex_envelope, Chord};
pub use max_affine::{MaxAffine, MaxAffineLoss};
pub use quadratic::{integrate_from_zero, PiecewiseQuadratic, Quadratic};
pub use root::{expected_identification_root, weighted_sum};

/// Left and right derivatives of a one-dimensional function.
pub trait OneSidedDerivatives {
    fn one_sided_derivatives(&self, u: f64) -> (f64, f64);
}

/// `(left derivative, right derivative)` of `f` at `u`.
pub fn subgradient_interval<F: OneSidedDerivatives + ?Sized>(f: &F, u: f64) -> (f64, f64) {
    f.one_sided_derivatives(u)
}

pub fn check_increasing(xs: &[f64]) -> crate::Result<()> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(crate::Error::InvalidInput(format!("non-finite abscissa {x}")));
    }
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(crate::Error::NonIncreasingAbscissa(w[1]));
        }
    }
    Ok(())
}
