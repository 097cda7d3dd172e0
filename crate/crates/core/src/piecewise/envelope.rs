use serde::{Deserialize, Serialize};

use super::{check_increasing, Affine};
use crate::error::Result;

/// A segment of a lower convex envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub start: f64,
    pub end: f64,
    pub line: Affine,
}

/// Chords of the lower convex hull of `points`, left to right.
///
/// Points lying on a chord are dropped, so slopes are strictly increasing.
pub fn lower_convex_envelope(points: &[(f64, f64)]) -> Result<Vec<Chord>> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    check_increasing(&xs)?;
    if points.len() < 2 {
        return Err(crate::Error::InvalidInput("envelope needs at least two points".into()));
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b unless a -> b -> p turns strictly counter-clockwise.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(hull
        .windows(2)
        .map(|w| Chord {
            start: w[0].0,
            end: w[1].0,
            line: Affine::chord(w[0].0, w[0].1, w[1].0, w[1].1),
        })
        .collect())
}
