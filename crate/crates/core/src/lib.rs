//! Continual multi-view clustering.
//!
//! Views of the same n samples arrive one at a time. Each view is turned
//! into a kernel, relaxed into a column-orthonormal partition, and folded
//! into a running consensus through a three-step alternating maximization
//! over a hard assignment, an orthogonal category memory and an orthogonal
//! alignment. Only the n-by-k consensus and the k-by-k memory survive
//! between views, so the retained state is n*k + k*k numbers no matter how
//! many views have been seen.
//!
//! The crate also ships the batch late-fusion comparator, clustering
//! quality metrics (accuracy, NMI, purity), and a seeded multi-view
//! Gaussian-mixture generator for experiments.

pub mod batch;
pub mod continual;
pub mod error;
pub mod kernels;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod partition;
pub mod synth;

pub use error::{Error, Result};
