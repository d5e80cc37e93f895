// Index-coupled loops over matrices and state ids read better than
// enumerate chains in the numeric kernels here.
#![allow(clippy::needless_range_loop)]

//! Learning and analysis of successor representations over discrete state
//! spaces: grid rooms, wall mazes, and a small rule-generated language.
//!
//! - [`env`] — state spaces, ground-truth transition matrices, sampling
//! - [`sr`] — discounted successor matrices and value functions
//! - [`spectral`] — Jacobi eigendecomposition and grid-shaped eigenmaps
//! - [`net`] — the three-layer softmax network that learns transitions
//! - [`rl`] — the epsilon-greedy navigation agent and its policy matrices
//! - [`analysis`] — MDS, silhouette scores, error reports, periodicity

pub mod analysis;
pub mod env;
pub mod error;
pub mod matrix;
pub mod net;
pub mod rl;
pub mod spectral;
pub mod sr;

pub use error::{Error, Result};
pub use matrix::Mat;
