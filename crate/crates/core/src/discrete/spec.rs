use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    boundary_distance, boundary_vertices, gamma_from_cost, homogenize_boundary, orient_normals, region_of,
    reports_from_normals, sample_boundary, AffineBoundary, CostMatrix, Normal, OrientedNormal, ORIENT_TOL,
};
use crate::error::{Error, Result};
use crate::seed::SeedTree;
use crate::simplex::{sample_uniform, SimplexPoint};

/// Smallest consecutive-boundary gap accepted as strongly orderable.
pub const MIN_GAP: f64 = 1e-9;

/// On-disk property description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyFile {
    pub n: usize,
    pub reports: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_matrix: Option<CostMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<AffineBoundary>>,
    /// One interior point per region, in report order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<SimplexPoint>>,
}

impl PropertyFile {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let f: PropertyFile = serde_json::from_str(&text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInput("need at least three outcomes".into()));
        }
        if self.reports.len() < 2 {
            return Err(Error::InvalidInput("need at least two reports".into()));
        }
        match (&self.cost_matrix, &self.boundaries) {
            (Some(c), None) => {
                if c.reports() != self.reports.len() || c.outcomes() != self.n {
                    return Err(Error::InvalidInput(format!(
                        "cost matrix is {}x{}, expected {}x{}",
                        c.reports(),
                        c.outcomes(),
                        self.reports.len(),
                        self.n
                    )));
                }
            }
            (None, Some(b)) => {
                if b.len() + 1 != self.reports.len() {
                    return Err(Error::InvalidInput(format!(
                        "{} reports need {} boundaries, got {}",
                        self.reports.len(),
                        self.reports.len() - 1,
                        b.len()
                    )));
                }
                if let Some(bd) = b.iter().find(|bd| bd.c.len() != self.n) {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        found: bd.c.len(),
                    });
                }
            }
            _ => {
                return Err(Error::InvalidInput(
                    "exactly one of `cost_matrix` and `boundaries` is required".into(),
                ))
            }
        }
        if let Some(w) = &self.witnesses {
            if w.len() != self.reports.len() {
                return Err(Error::InvalidInput("need one witness per report".into()));
            }
            if w.iter().any(|p| p.dim() != self.n) {
                return Err(Error::InvalidInput("witness dimension mismatch".into()));
            }
        }
        Ok(())
    }

    /// Homogenized (unoriented) boundary normals in report order.
    pub fn boundary_normals(&self) -> Result<Vec<Normal>> {
        match (&self.cost_matrix, &self.boundaries) {
            (Some(c), _) => c.consecutive_boundaries().iter().map(homogenize_boundary).collect(),
            (None, Some(b)) => b.iter().map(homogenize_boundary).collect(),
            _ => Err(Error::InvalidInput("no boundaries".into())),
        }
    }

    /// Region witnesses: explicit ones if given, otherwise derived.
    pub fn region_witnesses(&self, normals: &[Normal]) -> Result<Vec<(usize, SimplexPoint)>> {
        if let Some(w) = &self.witnesses {
            return Ok(w.iter().cloned().enumerate().collect());
        }
        match &self.cost_matrix {
            Some(c) => derive_cost_witnesses(c),
            None => derive_geometric_witnesses(normals),
        }
    }
}

/// Margin by which report `r` beats every other report at `p`.
fn cost_margin(cost: &CostMatrix, r: usize, p: &[f64]) -> f64 {
    let e = cost.expected_costs(p);
    e.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, x)| x - e[r])
        .fold(f64::INFINITY, f64::min)
}

/// For each report, the candidate point where it wins by the largest margin.
/// Candidates are the vertices, the centroid, vertex midpoints and a fixed
/// pseudo-random sample.
pub fn derive_cost_witnesses(cost: &CostMatrix) -> Result<Vec<(usize, SimplexPoint)>> {
    let n = cost.outcomes();
    let mut cands: Vec<SimplexPoint> = (0..n).map(|i| SimplexPoint::vertex(n, i)).collect();
    cands.push(SimplexPoint::centroid(n));
    for i in 0..n {
        for j in i + 1..n {
            cands.push(SimplexPoint::vertex(n, i).lerp(&SimplexPoint::vertex(n, j), 0.5));
        }
    }
    let mut rng = SeedTree::new(0x5eed).child("cost-witnesses").rng();
    cands.extend((0..4096).map(|_| sample_uniform(&mut rng, n)));
    (0..cost.reports())
        .map(|r| {
            let (best, margin) = cands
                .iter()
                .map(|p| (p, cost_margin(cost, r, p.as_slice())))
                .fold((&cands[0], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            if margin <= ORIENT_TOL {
                return Err(Error::NotStronglyOrderable(format!(
                    "report {} is never the unique minimizer of expected cost",
                    r + 1
                )));
            }
            Ok((r, best.clone()))
        })
        .collect()
}

fn slice_center(o: &[f64]) -> Result<SimplexPoint> {
    let v = boundary_vertices(o)?;
    let n = o.len();
    SimplexPoint::from_weights((0..n).map(|i| v.iter().map(|p| p[i]).sum::<f64>()).collect())
}

/// Witnesses from geometry alone (needs at least two boundaries): midpoints
/// between consecutive boundary centres for inner regions, and for the two
/// outer regions the simplex vertex farthest beyond the outer boundary on the
/// side away from its neighbour.
pub fn derive_geometric_witnesses(normals: &[Normal]) -> Result<Vec<(usize, SimplexPoint)>> {
    let k = normals.len();
    if k < 2 {
        return Err(Error::InvalidInput(
            "a single boundary needs explicit region witnesses".into(),
        ));
    }
    let n = normals[0].dim();
    let centers = normals
        .iter()
        .map(|o| slice_center(o.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let far_vertex = |o: &Normal, away_from: &SimplexPoint| -> Result<SimplexPoint> {
        let side = o.dot(away_from.as_slice());
        if side.abs() <= ORIENT_TOL {
            return Err(Error::NotStronglyOrderable("consecutive boundaries touch".into()));
        }
        (0..n)
            .map(|i| (i, o.as_slice()[i]))
            .filter(|(_, v)| v * side < 0.0)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| SimplexPoint::vertex(n, i))
            .ok_or(Error::EmptyBoundary)
    };
    let mut out = vec![(0, far_vertex(&normals[0], &centers[1])?)];
    for j in 1..k {
        out.push((j, centers[j - 1].lerp(&centers[j], 0.5)));
    }
    out.push((k, far_vertex(&normals[k - 1], &centers[k - 2])?));
    Ok(out)
}

/// Adds points sampled on each boundary as witnesses of both adjacent
/// regions, so that crossing boundaries cannot be oriented.
pub fn with_boundary_witnesses(
    normals: &[Normal],
    mut witnesses: Vec<(usize, SimplexPoint)>,
    per_boundary: usize,
    seeds: &SeedTree,
) -> Result<Vec<(usize, SimplexPoint)>> {
    for (i, o) in normals.iter().enumerate() {
        for p in sample_boundary(o.as_slice(), per_boundary, seeds.index(i as u64).root())? {
            witnesses.push((i, p.clone()));
            witnesses.push((i + 1, p));
        }
    }
    Ok(witnesses)
}

/// Ordered reports with oriented boundary normals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderableSpec {
    n: usize,
    reports: Vec<String>,
    normals: Vec<OrientedNormal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<CostMatrix>,
}

impl OrderableSpec {
    /// Checks dimensions and strong orderability (positive consecutive gaps).
    pub fn new(reports: Vec<String>, normals: Vec<OrientedNormal>, cost: Option<CostMatrix>) -> Result<Self> {
        if normals.is_empty() || reports.len() != normals.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} reports need {} normals, got {}",
                reports.len(),
                reports.len().saturating_sub(1),
                normals.len()
            )));
        }
        let n = normals[0].dim();
        if let Some(o) = normals.iter().find(|o| o.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: o.dim(),
            });
        }
        if let Some(c) = &cost {
            if c.outcomes() != n || c.reports() != reports.len() {
                return Err(Error::InvalidInput("cost matrix does not match the normals".into()));
            }
        }
        let spec = Self {
            n,
            reports,
            normals,
            cost,
        };
        for i in 0..spec.normals.len().saturating_sub(1) {
            let g = spec.boundary_gap(i)?;
            if !(g > MIN_GAP) {
                return Err(Error::NotStronglyOrderable(format!(
                    "boundaries {} and {} are {g:e} apart",
                    i + 1,
                    i + 2
                )));
            }
        }
        for (i, o) in spec.normals.iter().enumerate() {
            boundary_vertices(o.as_slice()).map_err(|_| {
                Error::NotStronglyOrderable(format!("boundary {} misses the simplex interior", i + 1))
            })?;
        }
        Ok(spec)
    }

    /// Exact normals from a property file: homogenize each boundary and orient
    /// with explicit or derived witnesses.
    pub fn from_file(file: &PropertyFile) -> Result<Self> {
        file.validate()?;
        let normals = file.boundary_normals()?;
        let witnesses = file.region_witnesses(&normals)?;
        let witnesses = with_boundary_witnesses(&normals, witnesses, 32, &SeedTree::new(0x5eed).child("orient"))?;
        let oriented = orient_normals(&normals, &witnesses)?;
        Self::new(file.reports.clone(), oriented, file.cost_matrix.clone())
    }

    pub fn from_cost(cost: CostMatrix) -> Result<Self> {
        let reports = (1..=cost.reports()).map(|r| format!("r{r}")).collect();
        Self::from_file(&PropertyFile {
            n: cost.outcomes(),
            reports,
            cost_matrix: Some(cost),
            boundaries: None,
            witnesses: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reports(&self) -> &[String] {
        &self.reports
    }

    pub fn normals(&self) -> &[OrientedNormal] {
        &self.normals
    }

    pub fn cost(&self) -> Option<&CostMatrix> {
        self.cost.as_ref()
    }

    /// Region of `p`, ties to the lower region.
    pub fn region(&self, p: &[f64]) -> usize {
        region_of(&self.normals, p)
    }

    /// The discrete property as a set: cost minimizers when a cost matrix is
    /// attached, sign conditions of the normals otherwise.
    pub fn gamma(&self, p: &[f64]) -> Vec<usize> {
        match &self.cost {
            Some(c) => gamma_from_cost(c, p),
            None => reports_from_normals(&self.normals, p, 1e-10),
        }
    }

    /// Euclidean distance between boundaries `i` and `i + 1` (0-based).
    pub fn boundary_gap(&self, i: usize) -> Result<f64> {
        if i + 1 >= self.normals.len() {
            return Err(Error::InvalidInput(format!("no boundary pair at index {i}")));
        }
        boundary_distance(self.normals[i].as_slice(), self.normals[i + 1].as_slice())
    }

    pub fn boundary_gaps(&self) -> Result<Vec<f64>> {
        (0..self.normals.len().saturating_sub(1)).map(|i| self.boundary_gap(i)).collect()
    }

    /// Distance from `p` to the nearest boundary hyperplane, measured in the
    /// affine hull of the simplex.
    pub fn boundary_margin(&self, p: &[f64]) -> f64 {
        self.normals
            .iter()
            .map(|o| o.plane_distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}
