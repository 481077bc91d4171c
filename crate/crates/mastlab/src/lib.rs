//! Maximum agreement subtrees of rooted binary leaf-labeled trees.
//!
//! The crate provides:
//!
//! * [`tree`] — the tree data model, Newick I/O, restriction `T|_S`, shape
//!   canonicalization, and exhaustive enumeration of RB(n) for small n;
//! * [`mast`] — exact maximum-agreement-subtree computation with a
//!   brute-force oracle;
//! * [`blobify`] — greedy k-blobification with scaffold trees, the
//!   matched-blob agreement constructor, and the greedy comb scaffold;
//! * [`random`] — uniform, Yule-Harding and same-shape random tree models
//!   with deterministic seeded streams;
//! * [`bounds`] — exact rational arithmetic for the tail bounds
//!   (phi, psi, induced marginals, the birthday bound);
//! * [`sim`] — the Monte Carlo experiment harness behind the `mastlab` CLI.
//!
//! Replicate loops and sweeps run data-parallel through rayon when the
//! default `parallel` feature is enabled; disabling it yields a sequential
//! build with identical results.

pub mod blobify;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod mast;
pub mod newick;
pub mod parallel;
pub mod random;
pub mod sim;
pub mod tree;

pub use error::{Error, Result};
pub use mast::{mast, mast_bruteforce, MastResult};
pub use newick::{parse_newick, write_newick};
pub use tree::{enumerate_trees, LeafSet, Node, NodeId, ShapeCode, Tree};
