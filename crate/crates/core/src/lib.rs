//! Cluster-expansion toolkit: labelled-graph enumeration, weighted graph
//! sums built from Mayer's f-function, the vertex-removal recurrences for
//! 2-connected graphs, truncated density and activity series, and the
//! classical convergence radii of the virial expansion.

// Comparisons are written `!(x <= tol)` on purpose so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod counting;
pub mod criteria;
pub mod error;
pub mod expansion;
pub mod graph;
pub mod integrate;
pub mod numeric;
pub mod partition;
pub mod polynomial;
pub mod recurrences;
pub mod series;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use expansion::{DensityModel, WeightAnsatz};
pub use graph::{LabelledGraph, VertexBipartition, VertexSet};
pub use integrate::{Estimate, Integrator};
pub use series::{ExpansionMethod, TruncatedExpansion};
pub use weights::{PairPotential, Point, WeightMatrix, WeightValue};
