use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};
use crate::simplex::{dot, SimplexPoint};

const BURN_IN: usize = 100;
const THIN: usize = 10;

/// Vertices of the polytope `{p in simplex : <o, p> = 0}`: crossings of the
/// hyperplane with simplex edges plus simplex vertices on it.
///
/// Errors unless `o` has entries of both signs, i.e. unless the hyperplane
/// meets the relative interior of the simplex.
pub fn boundary_vertices(o: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = o.len();
    if !(o.iter().any(|&x| x > 0.0) && o.iter().any(|&x| x < 0.0)) {
        return Err(Error::EmptyBoundary);
    }
    let mut out = Vec::new();
    for i in 0..n {
        if o[i] == 0.0 {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            out.push(v);
        }
        for j in i + 1..n {
            if (o[i] > 0.0 && o[j] < 0.0) || (o[i] < 0.0 && o[j] > 0.0) {
                let t = o[i] / (o[i] - o[j]);
                let mut v = vec![0.0; n];
                v[i] = 1.0 - t;
                v[j] = t;
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// Points drawn from the relative interior of `{p : <o, p> = 0}` inside the
/// simplex. Exact uniform draws on the segment for `n = 3`, hit-and-run
/// otherwise.
pub fn sample_boundary(o: &[f64], count: usize, seed: u64) -> Result<Vec<SimplexPoint>> {
    let verts = boundary_vertices(o)?;
    let mut rng = rng_from_seed(seed);
    let n = o.len();
    if n == 3 {
        if verts.len() != 2 {
            return Err(Error::EmptyBoundary);
        }
        let (a, b) = (&verts[0], &verts[1]);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let t: f64 = rng.random();
            if t <= 0.0 {
                continue;
            }
            let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
            if p.iter().all(|&x| x > 0.0) {
                out.push(SimplexPoint::from_weights(p)?);
            }
        }
        return Ok(out);
    }
    hit_and_run(o, &verts, count, &mut rng)
}

fn hit_and_run(o: &[f64], verts: &[Vec<f64>], count: usize, rng: &mut Rng) -> Result<Vec<SimplexPoint>> {
    let n = o.len();
    let mut x: Vec<f64> = (0..n)
        .map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / verts.len() as f64)
        .collect();
    if x.iter().any(|&v| v <= 0.0) {
        // The slice polytope lies in a face of the simplex.
        return Err(Error::EmptyBoundary);
    }
    // Orthonormal basis of span{1, o}; directions are projected off it.
    let u1 = vec![1.0 / (n as f64).sqrt(); n];
    let mut u2: Vec<f64> = o.iter().map(|v| v - dot(o, &u1) * u1[0]).collect();
    let u2n = dot(&u2, &u2).sqrt();
    u2.iter_mut().for_each(|v| *v /= u2n);
    let w_on = dot(o, &u2);

    let mut out = Vec::with_capacity(count);
    let mut step = 0usize;
    while out.len() < count {
        let mut d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let (a, b) = (dot(&d, &u1), dot(&d, &u2));
        for i in 0..n {
            d[i] -= a * u1[i] + b * u2[i];
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            if d[i] > 0.0 {
                lo = lo.max(-x[i] / d[i]);
            } else if d[i] < 0.0 {
                hi = hi.min(-x[i] / d[i]);
            }
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            continue;
        }
        let u: f64 = rng.random();
        let t = lo + (hi - lo) * u;
        let cand: Vec<f64> = (0..n).map(|i| x[i] + t * d[i]).collect();
        if cand.iter().any(|&v| v <= 0.0) {
            continue;
        }
        x = cand;
        // Remove accumulated drift off the hyperplane.
        let r = dot(o, &x) / w_on;
        for i in 0..n {
            x[i] -= r * u2[i];
        }
        step += 1;
        if step > BURN_IN && (step - BURN_IN) % THIN == 0 {
            out.push(SimplexPoint::from_weights(x.clone())?);
        }
    }
    Ok(out)
}
