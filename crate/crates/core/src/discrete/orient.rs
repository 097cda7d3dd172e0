use super::{Normal, OrientedNormal};
use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Slack allowed on witness sign checks.
pub const ORIENT_TOL: f64 = 1e-9;

/// Signs each normal so that every witness `(region, p)` satisfies
/// `<o_i, p> >= -tol` for `i < region` and `<o_i, p> <= tol` for `i >= region`.
///
/// Fails when no sign fits all witnesses or when the witnesses do not pin
/// the sign down.
pub fn orient_normals(normals: &[Normal], witnesses: &[(usize, SimplexPoint)]) -> Result<Vec<OrientedNormal>> {
    let k = normals.len();
    if let Some((r, _)) = witnesses.iter().find(|(r, _)| *r > k) {
        return Err(Error::InvalidInput(format!(
            "witness region {r} out of range for {} regions",
            k + 1
        )));
    }
    normals
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let fits = |sign: f64| {
                witnesses.iter().all(|(r, p)| {
                    let s = sign * o.dot(p.as_slice());
                    if i < *r {
                        s >= -ORIENT_TOL
                    } else {
                        s <= ORIENT_TOL
                    }
                })
            };
            match (fits(1.0), fits(-1.0)) {
                (true, false) => Ok(o.clone().oriented(1.0)),
                (false, true) => Ok(o.clone().oriented(-1.0)),
                (false, false) => Err(Error::Orientation {
                    index: i,
                    reason: "no sign is consistent with the region witnesses".into(),
                }),
                (true, true) => Err(Error::Orientation {
                    index: i,
                    reason: "witnesses all lie on the hyperplane; sign undetermined".into(),
                }),
            }
        })
        .collect()
}

/// Region index of `p`: the first `i` with `<o_i, p> <= 0`, or `k` if none.
/// Points on a boundary go to the lower region.
pub fn region_of(normals: &[OrientedNormal], p: &[f64]) -> usize {
    normals.iter().position(|o| o.dot(p) <= 0.0).unwrap_or(normals.len())
}

/// Every region whose sign conditions hold at `p` within `tol`.
pub fn reports_from_normals(normals: &[OrientedNormal], p: &[f64], tol: f64) -> Vec<usize> {
    let s: Vec<f64> = normals.iter().map(|o| o.dot(p)).collect();
    let out: Vec<usize> = (0..=normals.len())
        .filter(|&r| s[..r].iter().all(|&x| x >= -tol) && s[r..].iter().all(|&x| x <= tol))
        .collect();
    if out.is_empty() {
        vec![region_of(normals, p)]
    } else {
        out
    }
}
