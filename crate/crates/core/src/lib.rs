//! Rectilinear Steiner minimum trees for large nets.
//!
//! A net is partitioned into blocks of at most `B` terminals by a
//! segment-augmented bounding volume hierarchy ([`abvh`]), each block is
//! solved by a pluggable solver ([`solvers`]), and the block subtrees are
//! joined by a minimum spanning tree over neighboring blocks under the L1
//! metric ([`pipeline`]). [`bench`] reproduces a degree-sweep benchmark and
//! [`cli`] backs the `rsmt` binary.

pub mod abvh;
pub mod bench;
pub mod cli;
mod dsu;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod solvers;
pub mod svg;

pub use abvh::{brute_force_adjacency, Abvh, BlockId, NodeId};
pub use error::{Error, Result};
pub use geometry::{half_perimeter, hanan_grid, l1, validate_tree, Point, RectEdge, RectilinearTree, RegionBox};
pub use pipeline::{PipelineConfig, PipelineReport};
pub use solvers::{solve_rsmt, SolverSpec};
