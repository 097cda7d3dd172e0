use super::boundary_vertices;
use crate::error::{Error, Result};
use crate::simplex::{dot, l2_norm};

/// Endpoints of the segment `{p in simplex : <o, p> = 0}` for `n = 3`.
pub fn boundary_segment(o: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if o.len() != 3 {
        return Err(Error::InvalidInput("boundary segments exist only for n = 3".into()));
    }
    let mut v = boundary_vertices(o)?;
    if v.len() != 2 {
        return Err(Error::EmptyBoundary);
    }
    let b = v.pop().unwrap();
    let a = v.pop().unwrap();
    Ok((a, b))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    l2_norm(&sub(p, &q))
}

/// Euclidean distance between the slices `{<o1, p> = 0}` and `{<o2, p> = 0}`
/// of the simplex. Exact for `n = 3`; alternating projections otherwise.
pub fn boundary_distance(o1: &[f64], o2: &[f64]) -> Result<f64> {
    if o1.len() != o2.len() {
        return Err(Error::DimensionMismatch {
            expected: o1.len(),
            found: o2.len(),
        });
    }
    if o1.len() == 3 {
        let (a0, a1) = boundary_segment(o1)?;
        let (b0, b1) = boundary_segment(o2)?;
        // Coplanar segments meet iff one straddles the other's line.
        let (s0, s1) = (dot(o2, &a0), dot(o2, &a1));
        if s0 == 0.0 || s1 == 0.0 || (s0 > 0.0) != (s1 > 0.0) {
            return Ok(0.0);
        }
        return Ok([
            point_segment_distance(&a0, &b0, &b1),
            point_segment_distance(&a1, &b0, &b1),
            point_segment_distance(&b0, &a0, &a1),
            point_segment_distance(&b1, &a0, &a1),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min));
    }
    alternating_distance(o1, o2)
}

/// Distance between two boundary slices by alternating projections.
pub(crate) fn alternating_distance(o1: &[f64], o2: &[f64]) -> Result<f64> {
    let v = boundary_vertices(o1)?;
    boundary_vertices(o2)?;
    let n = o1.len();
    let mut x: Vec<f64> = (0..n).map(|i| v.iter().map(|p| p[i]).sum::<f64>() / v.len() as f64).collect();
    let mut d = f64::INFINITY;
    for _ in 0..20_000 {
        let y = project_onto_slice(&x, o2);
        let x_next = project_onto_slice(&y, o1);
        let d_next = l2_norm(&sub(&x_next, &y));
        let moved = l2_norm(&sub(&x_next, &x));
        x = x_next;
        let settled = (d - d_next).abs() <= 1e-15 && moved <= 1e-13;
        d = d_next;
        if settled || d <= 1e-15 {
            break;
        }
    }
    Ok(d)
}

/// Euclidean projection onto the probability simplex.
pub fn project_onto_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Projection of `y` onto `{p in simplex : <o, p> = 0}` by Dykstra's method
/// on the simplex and the affine plane `{sum p = 1, <o, p> = 0}`.
pub fn project_onto_slice(y: &[f64], o: &[f64]) -> Vec<f64> {
    let n = o.len();
    let u1 = vec![1.0 / (n as f64).sqrt(); n];
    let c1 = 1.0 / (n as f64).sqrt();
    let mut u2: Vec<f64> = o.iter().map(|v| v - dot(o, &u1) * u1[0]).collect();
    let u2n = l2_norm(&u2);
    u2.iter_mut().for_each(|v| *v /= u2n);
    // <o, p> = 0 with sum p = 1 means <u2, p> = -<o, u1> c1 / |o - <o,u1>u1|.
    let c2 = -dot(o, &u1) * c1 / u2n;
    let plane = |z: &[f64]| -> Vec<f64> {
        let a = dot(z, &u1) - c1;
        let b = dot(z, &u2) - c2;
        z.iter().enumerate().map(|(i, v)| v - a * u1[i] - b * u2[i]).collect()
    };
    let mut x = y.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..10_000 {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let a = plane(&xp);
        p = sub(&xp, &a);
        let aq: Vec<f64> = a.iter().zip(&q).map(|(a, b)| a + b).collect();
        let x_next = project_onto_simplex(&aq);
        q = sub(&aq, &x_next);
        let change = l2_norm(&sub(&x_next, &x));
        x = x_next;
        if change <= 1e-16 {
            break;
        }
    }
    x
}
