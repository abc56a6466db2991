//! Ollivier-Ricci curvature of graph edges and a graph kernel built on
//! curvature histograms.
//!
//! The pipeline is: [`graph`] → [`curvature`] (exact earth mover distance
//! from [`transport`]) → [`distribution`] histograms → [`kernel`] Gram
//! matrix → [`classify`] k-NN cross-validation.

pub mod classify;
pub mod curvature;
pub mod distribution;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod transport;

use thiserror::Error;

pub use classify::{cross_validate, kernel_distance, knn_predict, ClassifyError, CvReport};
pub use curvature::{all_curvatures, edge_curvature, sample_size, sampled_curvatures, CurvatureError, CurvatureMap, SamplingPlan};
pub use distribution::{histogram_1d, histogram_2d, Histogram, HistogramError};
pub use graph::{Graph, GraphError, NodeId, ParseError};
pub use kernel::{gram_matrix, rbf_kernel, GramMatrix, KernelError, Sigma};
pub use transport::{emd, TransportError};

/// Any error from the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}
