//! Loss tasks, gradients and the optimizers used to train them.

mod gradcheck;
pub mod optim;
mod task;
mod weights;

pub use gradcheck::{compare_gradient, grad_check, GradientReport, ABS_FALLBACK};
pub use optim::{train_reference, ReferenceOptions, TrainRecord, TrainReport};
pub use task::{LossFamily, LossTask, Targets, LINEAR_BIAS, LINEAR_WEIGHTS};
pub use weights::{default_mask, Layer, LayerKind, WeightVector};
pub(crate) use weights::{dist, norm};
