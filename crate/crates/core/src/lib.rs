//! Simulation and verification toolkit for aligning `p` correlated random graphs.
//!
//! The crate covers the two observation models (correlated Gaussian weights and
//! correlated Erdős–Rényi subsampling), their exact Gibbs posteriors at small
//! `n`, the statistician's estimators, and brute-force oracles for the
//! combinatorial and analytic inequalities the theory relies on.
//!
//! Vertices are one-based at the public boundary (`Display`, serde, edge pairs
//! passed as `(u, v)` tuples to validated constructors) and zero-based inside.

pub mod alignment;
pub mod edge;
pub mod error;
pub mod estimators;
pub mod gibbs_er;
pub mod gibbs_gaussian;
pub mod graph;
pub mod math;
pub mod metrics;
pub mod models;
pub mod oracles;
pub mod perm;
pub mod posterior;
pub mod rng;

pub use alignment::{enumerate_alignments, Alignment, DEFAULT_ENUMERATION_CAP};
pub use edge::{edge_action, EdgeIndex, EdgeSet};
pub use error::{Error, Result};
pub use models::{
    sample_er, sample_gaussian, ErObservation, ErParams, ErSample, GaussianObservation,
    GaussianParams, GaussianSample,
};
pub use perm::Permutation;
pub use posterior::PosteriorTable;
pub use rng::{derive_seed, seeded_rng, SeededRng};
