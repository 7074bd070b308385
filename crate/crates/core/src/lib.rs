//! Model compression as constrained optimization.
//!
//! A compressed model is a weight vector `w = Δ(Θ)` produced from
//! low-dimensional parameters `Θ` (a codebook and assignments, signs, low-rank
//! factors, a sparse support). The learning-compression (LC) algorithm
//! alternates an L step, which trains the full model pulled towards the
//! current `Δ(Θ)`, and a C step, which projects the weights back onto the
//! feasible set, while a penalty parameter `μ` grows.
//!
//! * [`model`]: loss families, weight layouts, gradients, reference training.
//! * [`compress`]: the schemes, their projections and storage costs.
//! * [`lc`]: the LC loop and the direct-compression baselines.
//! * [`oracle`]: exhaustive global optima for small instances.
//! * [`io`]: configuration, datasets, model files, metrics.
//! * [`cli`]: the `lcc` command line.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compress;
pub mod error;
pub mod io;
pub mod lc;
pub mod model;
pub mod oracle;

pub use compress::{CompressedParams, CompressionScheme, Compressor, SchemeKind};
pub use error::{Error, Result};
pub use lc::{lc_run, LcConfig, LcOutcome, Method};
pub use model::{LossFamily, LossTask, Targets, WeightVector};
