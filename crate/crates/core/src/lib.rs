//! Distributed principal component analysis with shift-and-invert
//! preconditioning and approximate Newton inner solves.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: dense matrices, Jacobi eigensolver, Cholesky, Gram-Schmidt.
//! * [`datagen`]: synthetic covariances, Gaussian / skewed samples, PCR and
//!   single-index-model instances, sharding and dataset files.
//! * [`cluster`]: simulated master–worker cluster with in-memory and TCP
//!   transports and a communication ledger.
//! * [`solver`]: the distributed top-eigenvector and top-L subspace solvers.
//! * [`baselines`]: pooled oracle PCA and the divide-and-conquer estimator.
//! * [`metrics`]: gap-free projection errors and friends.
//! * [`apps`]: distributed centering, principal component regression and
//!   the Gaussian single-index model.
//! * [`experiment`]: Monte-Carlo experiment specs, presets and CSV output.

pub mod apps;
pub mod baselines;
pub mod cluster;
pub mod datagen;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod solver;
