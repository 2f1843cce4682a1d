//! Online edge-disjoint path routing in regular expanders.
//!
//! * [`graph`]: vertex/edge ids, digraphs, undirected multigraphs, edge overlays.
//! * [`preprocess`]: orientation and splitting of the input into three regular parts.
//! * [`oracle`]: the edge oracle serving low in-degree out-edges under removals.
//! * [`router`]: the routing engine answering Find-Path / Remove-Path.
//! * [`expander`]: generators, expansion checks, spectral estimates, profiles.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod expander;
pub mod graph;
pub mod oracle;
pub mod preprocess;
pub mod router;

pub use graph::{Digraph, EdgeId, EdgeSubset, UndirectedGraph, VertexId};
pub use oracle::{ConstantsProfile, EdgeOracle, OracleError};
pub use router::{PathRecord, RouteError, RouterProfile, RoutingEngine};
