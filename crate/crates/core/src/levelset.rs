//! Barycentric grids over the 2-simplex with property values, for plotting
//! level sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::simplex::SimplexPoint;
use crate::surrogate::LinkedProperty;

/// All points `(i, j, k) / resolution` with `i + j + k = resolution`.
pub fn barycentric_grid(resolution: usize) -> Result<Vec<SimplexPoint>> {
    if resolution == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let r = resolution as f64;
    let mut out = Vec::with_capacity((resolution + 1) * (resolution + 2) / 2);
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            let k = resolution - i - j;
            out.push(SimplexPoint::new(vec![i as f64 / r, j as f64 / r, k as f64 / r])?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub p: [f64; 3],
    /// 0-based reports of the discrete property.
    pub gamma_discrete: Vec<usize>,
    pub gamma_surrogate: f64,
}

pub fn level_set_grid<P: LinkedProperty + ?Sized>(
    prop: &P,
    resolution: usize,
    exec: Execution,
) -> Result<Vec<LevelRow>> {
    if prop.outcomes() != 3 {
        return Err(Error::InvalidInput(format!(
            "level sets are drawn on the 2-simplex, got n = {}",
            prop.outcomes()
        )));
    }
    let grid = barycentric_grid(resolution)?;
    exec.map(&grid, |p| {
        let s = p.as_slice();
        Ok(LevelRow {
            p: [s[0], s[1], s[2]],
            gamma_discrete: prop.discrete(s),
            gamma_surrogate: prop.value(s)?,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_normals;

    #[test]
    fn minimal_grid() {
        let g = barycentric_grid(2).unwrap();
        assert_eq!(g.len(), 6);
        assert!(barycentric_grid(0).is_err());
        assert_eq!(barycentric_grid(200).unwrap().len(), 201 * 202 / 2);
    }

    #[test]
    fn rows_carry_values() {
        let s = example_normals().unwrap();
        let rows = level_set_grid(&s, 4, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 15);
        assert_eq!(rows.last().unwrap().gamma_discrete, vec![0]);
    }
}
