//! Numerical kernels shared by the mining pipelines.

mod eigen;
mod kmeans;
mod power;
mod solve;
mod sparse;

pub use eigen::{smallest_eigenpairs, symmetric_spectrum, EigenMethod, EigenPairs, DENSE_EIGEN_LIMIT, EIGEN_RESIDUAL_TOL};
pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use power::{power_iteration, spectral_radius_estimate, PowerIterationResult};
pub use solve::{conjugate_gradient, SolveResult};
pub use sparse::CsrMatrix;
