//! Multi-parameter random simplicial complexes at desk scale: reproducible
//! sampling of the lower and upper models, assembly of their signed and
//! unsigned adjacency matrices (restricted, extended, centered,
//! normalized), empirical spectral distributions against the semicircle
//! and Bernoulli-tensor reference laws, and the exact word combinatorics
//! behind the moment method.
//!
//! The crate exposes the library API; the companion CLI and browser demo
//! are thin layers over [`experiment`].

pub mod cells;
pub mod combin;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod matrices;
pub mod sampler;
pub mod spectra;
pub mod words;

pub use error::{Error, Result};
