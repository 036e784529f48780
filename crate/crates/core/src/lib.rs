//! Hypergraph mining with resource-allocation proximity matrices.
//!
//! A hypergraph's binary incidence matrix `M` is diffused by one round of
//! conservative resource allocation (node → hyperedges → nodes) to give a
//! continuous node×hyperedge proximity matrix `P = T·M`. Three pipelines sit on
//! top of it:
//!
//! | Task | Entry point | Benchmarks |
//! |------|-------------|------------|
//! | hyperedge prediction | [`linkpred::run_linkpred_experiment`] | CN, HPRA, Katz |
//! | community detection | [`community::hra_cd_partition`] | NMF, NDP-Louvain, HSC |
//! | vital nodes | [`vitality::hra_centrality`] | HEC, Katz, NB, SHC, HDC |
//!
//! Spreading influence used as ground truth for vital nodes comes from the
//! nonlinear SIR simulator in [`spreading`]; evaluation metrics live in
//! [`metrics`].

pub mod community;
pub mod error;
pub mod hypercore;
pub mod linalg;
pub mod linkpred;
pub mod metrics;
pub mod proximity;
pub mod rng;
pub mod spreading;
pub mod vitality;

pub use error::{Error, Result};
pub use hypercore::{CommunityLabels, Hypergraph};
pub use linalg::CsrMatrix;
pub use proximity::{ProximityMatrix, SimilarityMatrix, Source};
