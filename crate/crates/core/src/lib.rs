//! Attribute-based random graphs: generation, two-layer crawl sampling,
//! class-kernel estimation, and a battery of degree, spectral, planarity,
//! centrality and random-walk inferences.
//!
//! All randomness is seeded; see [`rng`] for the generator and the
//! per-replication seed derivation.

pub mod centrality;
pub mod crawl;
pub mod degree;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use model::{ClassDistribution, ClassKernel, GraphSample};
