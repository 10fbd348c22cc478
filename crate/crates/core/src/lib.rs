//! Perfect matchings in k-uniform hypergraphs of large minimum codegree.

pub mod certificates;
pub mod derandomize;
pub mod error;
pub mod extremal;
pub mod fpt;
pub mod hypergraph;
pub mod instances;
pub mod io;
pub mod kpartite;
pub mod lattice;
pub mod nonextremal;
pub mod oracle;
pub mod reachability;
pub mod solver;
pub mod vertex_set;

pub use error::{Error, Result};
pub use hypergraph::{verify_matching, Hypergraph, Matching, Report};
pub use vertex_set::VertexSet;
pub use solver::{solve_matching_size, solve_pm, Solution, SolveConfig, SolveOutcome, Stats};
