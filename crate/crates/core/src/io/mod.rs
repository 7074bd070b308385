//! Configuration, datasets, model and parameter files, metrics logs.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod modelfile;

pub use config::{load_config, parse_config, RunConfig, SchemeSection};
pub use dataset::{gen_synthetic, load_csv, Dataset, SyntheticKind};
pub use metrics::{append_metrics, read_metrics};
pub use modelfile::{load_model, load_theta, save_model, save_theta, FORMAT_VERSION};
