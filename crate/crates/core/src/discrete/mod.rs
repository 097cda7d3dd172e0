//! Discrete losses and strongly orderable properties: evaluation of the
//! discrete property, boundary normals, orientation and boundary geometry.

mod boundary;
mod cost;
mod gap;
mod nullspace;
mod orient;
mod sampling;
mod spec;

pub use boundary::{homogenize_boundary, AffineBoundary, Normal, OrientedNormal};
pub use cost::{gamma_from_cost, CostMatrix, TIE_TOL};
pub use gap::{boundary_distance, boundary_segment, project_onto_slice, project_onto_simplex};
pub use nullspace::normal_from_boundary_samples;
pub use orient::{orient_normals, region_of, reports_from_normals, ORIENT_TOL};
pub use sampling::{boundary_vertices, sample_boundary};
pub use spec::{
    derive_cost_witnesses, derive_geometric_witnesses, with_boundary_witnesses, OrderableSpec, PropertyFile, MIN_GAP,
};
