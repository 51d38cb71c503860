//! Geometric random intersection graphs.
//!
//! Vertices and groups are two independent homogeneous Poisson clouds on a
//! periodic box. A vertex joins a group independently with probability
//! `g(|v - u|)` for a non-increasing radial kernel `g`; two vertices are
//! adjacent when they share at least one group. The crate provides
//!
//! - [`kernels`]: connection kernels, their norms and self-convolutions `f = g * g`,
//! - [`geometry`]: the torus and Poisson sampling,
//! - [`graph`]: the bipartite membership graph, its two projections and components,
//! - [`analytics`]: connection probabilities, expected degree, bounds and samplers,
//! - [`stats`]: the small set of statistical tests backing validation reports,
//! - [`experiments`]: reproducible runners for degree, phase and validation studies.

// `!(x > 0.0)` rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod kernels;
pub mod quadrature;
pub mod seeds;
pub mod stats;

pub use error::{Error, Result};
