//! Consensus analysis over pseudo-undirected graphs.
//!
//! A pseudo-undirected graph joins every adjacent node pair by two
//! oppositely directed edges whose weights may differ, and may even be
//! negative within bounds. The resulting out-Laplacian is non-symmetric, so
//! the consensus value is a `p`-weighted average of the initial states that
//! can lie outside their convex hull.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | graph type, incidence / relation / Laplacian matrices |
//! | [`spectral`] | left null vectors, consensus value, feasibility, `L*` |
//! | [`dynamics`] | fixed-step simulation of `ẋ = -Lx` |
//! | [`robustness`] | single-edge transfer functions and gain margins |
//! | [`guidance`] | cooperative salvo interception driven by time-to-go consensus |
//! | [`io`] | graph file format and CSV/JSON output helpers |
//! | [`poly`] | real polynomials, characteristic polynomials, roots |
//! | [`scenario`] | the five-interceptor reference engagement |

pub mod dynamics;
pub mod graph;
pub mod guidance;
pub mod io;
pub mod poly;
pub mod robustness;
pub mod scenario;
pub mod spectral;

pub use graph::{
    incidence_set, laplacian, path_graph, unit_path, validate, DirectedEdge, EdgePair, GraphError,
    IncidenceSet, Laplacian, PseudoGraph, WeightMatrix,
};
