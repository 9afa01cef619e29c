//! Spectral community detection under the degree-corrected stochastic block model.
//!
//! The main entry points are [`methods::detect`] for clustering a graph and
//! [`dcsbm::DcsbmParams`] for simulating networks with known communities.

pub mod clustering;
pub mod datasets;
pub mod dcsbm;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod methods;
pub mod spectral;

pub use clustering::{align_and_score, kmeans, ClusterResult, KMeansConfig};
pub use dcsbm::{DcsbmParams, ParamSpec};
pub use error::{Error, Result};
pub use graph::{Graph, LabelVector};
pub use methods::{detect, Detection, Method, MethodOptions};
