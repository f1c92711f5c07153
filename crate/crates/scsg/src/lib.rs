//! Succinct graph representations for series-parallel multigraphs,
//! block/cactus/block-cactus graphs and 3-leaf power graphs.
//!
//! Each graph class is converted to a tree, the tree is covered by mini- and
//! micro-trees, and micro shapes are interned into a shared table so that
//! degree, adjacency, multiplicity and neighborhood queries run in a constant
//! number of probes into the bitvector layer.
//!
//! - [`bits`]: bitvector with rank/select and a sparse dictionary.
//! - [`ordtree`]: ordinal-tree navigation over balanced parentheses.
//! - [`cover`]: the tree-covering engine (mini/micro decomposition).
//! - [`spgraph`]: succinct series-parallel multigraphs.
//! - [`blockcactus`]: succinct block, cactus and block-cactus graphs.
//! - [`leafpower`]: succinct 3-leaf power graphs.
//! - [`oracle`]: naive reference implementations and random generators.
//! - [`container`]: bit-exact on-disk format.

pub mod bits;
pub mod blockcactus;
pub mod container;
pub mod cover;
pub mod error;
pub mod leafpower;
pub mod oracle;
pub mod ordtree;
pub mod report;
pub mod spgraph;

pub use error::{Error, Result};
