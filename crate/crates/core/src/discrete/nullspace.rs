use nalgebra::DMatrix;

use super::Normal;
use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Relative threshold on the second-smallest singular value.
const RANK_TOL: f64 = 1e-9;

/// Unit vector spanning the null space of the stacked boundary points.
///
/// The point matrix is zero-padded to square. Its smallest singular
/// direction is the normal; the second-smallest singular value must exceed
/// `1e-9 * sigma_max`. The sign is fixed so the largest-magnitude entry is
/// positive.
pub fn normal_from_boundary_samples(points: &[SimplexPoint]) -> Result<Normal> {
    let n = points
        .first()
        .map(|p| p.dim())
        .ok_or_else(|| Error::InvalidInput("no boundary points".into()))?;
    if points.len() + 1 < n {
        return Err(Error::InvalidInput(format!(
            "need at least {} boundary points, got {}",
            n - 1,
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let rows = points.len().max(n);
    let m = DMatrix::from_fn(rows, n, |i, j| points.get(i).map_or(0.0, |p| p.as_slice()[j]));
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::InvalidInput("singular value decomposition failed".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let sigma_max = svd.singular_values[order[n - 1]];
    let second = svd.singular_values[order[1]];
    let threshold = RANK_TOL * sigma_max;
    if !(second > threshold) {
        return Err(Error::RankDeficient {
            sigma: second,
            threshold,
        });
    }
    let mut v: Vec<f64> = v_t.row(order[0]).iter().copied().collect();
    let lead = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Normal::new(v)
}
