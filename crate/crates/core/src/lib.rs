//! Uniform spanning trees of almost-regular graphs and the balls-into-bins
//! process on bipartite graphs.
//!
//! The crate is organised around five areas:
//!
//! * [`graph`]: simple graphs, bipartite graphs, generators and edge-list I/O.
//! * [`balls_bins`]: the bipartite balls-into-bins process, exact moments of the
//!   bin-load counts and the closed-form concentration bounds.
//! * [`spanning`]: exact spanning-tree counting, uniform sampling, enumeration
//!   and the classical counting bounds.
//! * [`tree_iso`]: canonical codes, automorphism counts, Prüfer sequences and
//!   unlabeled-tree enumeration.
//! * [`bounds`]: permanents, Brégman–Minc, labeled-copy counting and the
//!   leaf-case counting bound for a fixed tree shape.

pub mod balls_bins;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod rng;
pub mod spanning;
pub mod tree_iso;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Family, Generated, Graph, GraphSpec};
pub use spanning::Tree;
pub use tree_iso::TreeCanonCode;

/// Exact nonnegative integer used for tree counts, permanents and automorphism
/// group sizes.
pub type BigCount = num_bigint::BigUint;

/// Exact rational used for probabilities.
pub type Rational = num_rational::BigRational;
