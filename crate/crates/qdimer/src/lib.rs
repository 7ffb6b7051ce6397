//! Exact computation for the quantum n-dimer model on planar bipartite
//! ciliated graphs.

pub mod connection;
pub mod density;
pub mod generators;
pub mod kasteleyn;
pub mod laurent;
pub mod multiweb;
pub mod par;
pub mod pgraph;
pub mod qalgebra;
pub mod qtrace;
pub mod rteval;
pub mod stats;

pub use laurent::{LaurentError, QLaurent};
pub use pgraph::{CiliatedPlanarGraph, Color, GraphError};
