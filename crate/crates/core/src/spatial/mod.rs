//! Per-zone binning of incident logs, spatial weight matrices and global
//! Moran's I.
//!
//! Contiguity uses the usual grid definitions: von Neumann neighbours share
//! an edge (up to 4), Moore neighbours share an edge or a corner (up to 8).
//! Distances are Euclidean on the zone coordinate plane.

mod field;
mod moran;
mod weights;

pub use field::{bin_incidents, SpatialField};
pub use moran::{is_constant, morans_i, morans_i_values, MoranResult};
pub use weights::{
    build_weights, contiguity_weights, fixed_distance_weights, inverse_distance_weights,
    knn_weights, row_standardize, ContiguityRule, WeightMatrix, WeightScheme,
};
