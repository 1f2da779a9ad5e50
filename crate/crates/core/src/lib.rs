//! Manifold warping of time series: dynamic time warping, diffusion
//! wavelets, multiscale and low-rank manifold alignment, and the iterative
//! warping loops built on them.

pub mod align;
pub mod data;
pub mod dtw;
pub mod embed;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod warp;
pub mod wavelets;

pub use data::{AlignmentPath, SyntheticKind, TimeSeries};
pub use dtw::CorrespondenceMatrix;
pub use error::{Error, Result};
pub use graph::WeightMatrix;
