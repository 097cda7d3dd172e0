use super::{Affine, PiecewiseAffine};
use crate::error::{Error, Result};

/// `sum_i weights[i] * fns[i]` on the union of breakpoints.
pub fn weighted_sum(fns: &[PiecewiseAffine], weights: &[f64]) -> Result<PiecewiseAffine> {
    if fns.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: fns.len(),
            found: weights.len(),
        });
    }
    let mut bp: Vec<f64> = fns.iter().flat_map(|f| f.breakpoints().iter().copied()).collect();
    bp.sort_by(|a, b| a.total_cmp(b));
    bp.dedup();
    let reps: Vec<f64> = if bp.is_empty() {
        vec![0.0]
    } else {
        let mut r = vec![bp[0] - 1.0];
        r.extend(bp.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        r.push(bp[bp.len() - 1] + 1.0);
        r
    };
    let pieces = reps
        .iter()
        .map(|&u| {
            fns.iter().zip(weights).fold(Affine::new(0.0, 0.0), |acc, (f, &w)| {
                let p = f.pieces()[f.piece_index(u)];
                Affine::new(acc.slope + w * p.slope, acc.intercept + w * p.intercept)
            })
        })
        .collect();
    PiecewiseAffine::new(bp, pieces)
}

/// Root of `u -> sum_y p_y v_y(u)` for continuous piecewise-affine `v_y`.
///
/// Solved exactly piece by piece. A flat zero interval yields its midpoint.
pub fn expected_identification_root(v: &[PiecewiseAffine], p: &[f64]) -> Result<f64> {
    let e = weighted_sum(v, p)?;
    root_of_continuous(&e)
}

fn root_of_continuous(e: &PiecewiseAffine) -> Result<f64> {
    let bp = e.breakpoints();
    let pieces = e.pieces();
    let first = pieces[0];
    let last = pieces[pieces.len() - 1];
    if bp.is_empty() {
        if first.slope > 0.0 {
            return Ok(-first.intercept / first.slope);
        }
        return Err(Error::NoSignChange(format!("affine expectation with slope {}", first.slope)));
    }
    let vals: Vec<f64> = bp.iter().enumerate().map(|(i, &b)| pieces[i + 1].eval(b)).collect();
    let scale = vals.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let zero_tol = 1e-14 * scale;
    let m = bp.len();

    if vals[0] > zero_tol {
        if first.slope > 0.0 {
            return Ok(bp[0] - vals[0] / first.slope);
        }
        return Err(Error::NoSignChange("left tail does not cross zero".into()));
    }
    let Some(a) = vals.iter().position(|&x| x >= -zero_tol) else {
        if last.slope > 0.0 {
            return Ok(bp[m - 1] - vals[m - 1] / last.slope);
        }
        return Err(Error::NoSignChange("right tail does not cross zero".into()));
    };
    let root = if vals[a] <= zero_tol {
        let c = a + vals[a..].iter().take_while(|x| x.abs() <= zero_tol).count() - 1;
        if (a == 0 && first.slope == 0.0) || (c == m - 1 && last.slope == 0.0) {
            return Err(Error::NoSignChange("expectation vanishes on an unbounded interval".into()));
        }
        0.5 * (bp[a] + bp[c])
    } else {
        let (u0, u1, v0, v1) = (bp[a - 1], bp[a], vals[a - 1], vals[a]);
        u0 + (u1 - u0) * (-v0) / (v1 - v0)
    };
    if vals.iter().zip(bp).any(|(&x, &b)| b > root && x < -zero_tol) {
        return Err(Error::InvalidInput(
            "expected identification function crosses zero more than once".into(),
        ));
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_zero_interval_midpoint() {
        let f = PiecewiseAffine::interpolate(&[(0.0, -1.0), (1.0, 0.0), (3.0, 0.0), (4.0, 1.0)], 1.0, 1.0).unwrap();
        assert_eq!(expected_identification_root(&[f], &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn tails() {
        let f = PiecewiseAffine::interpolate(&[(0.0, 1.0), (1.0, 2.0)], 1.0, 1.0).unwrap();
        assert_eq!(expected_identification_root(&[f], &[1.0]).unwrap(), -1.0);
        let g = PiecewiseAffine::interpolate(&[(0.0, -3.0), (1.0, -2.0)], 1.0, 0.5).unwrap();
        assert_eq!(expected_identification_root(&[g], &[1.0]).unwrap(), 5.0);
        let h = PiecewiseAffine::interpolate(&[(0.0, -3.0), (1.0, -2.0)], 1.0, 0.0).unwrap();
        assert!(matches!(expected_identification_root(&[h], &[1.0]), Err(Error::NoSignChange(_))));
    }

    #[test]
    fn weighted_sum_merges_breakpoints() {
        let f = PiecewiseAffine::interpolate(&[(0.0, 0.0), (1.0, 1.0)], 1.0, 1.0).unwrap();
        let g = PiecewiseAffine::interpolate(&[(0.5, 0.0), (2.0, 3.0)], 1.0, 1.0).unwrap();
        let s = weighted_sum(&[f.clone(), g.clone()], &[0.25, 0.75]).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.0, 2.0]);
        for u in [-1.0, 0.2, 0.7, 1.5, 3.0] {
            assert!((s.eval(u) - 0.25 * f.eval(u) - 0.75 * g.eval(u)).abs() < 1e-14);
        }
    }
}
