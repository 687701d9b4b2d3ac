//! Robustness evaluation: how much a classifier's top-5 accuracy drops when
//! its inputs are augmented.
//!
//! The classifier is any [`Classifier`]; [`SubprocessClassifier`] speaks a
//! line-based protocol so models can live in any runtime.

pub mod adapter;
pub mod dataset;
mod error;
pub mod metrics;
pub mod report;
mod run;

pub use adapter::{Classifier, SubprocessClassifier};
pub use dataset::{load_manifest, parse_manifest, sample_dataset, Item};
pub use error::{EvalError, Result};
pub use metrics::{top5_accuracy, Prediction, TOP_K};
pub use report::{Category, EvalReport, Row};
pub use run::{default_augset, parse_augset, run_eval, Augmentation, BASELINE, DEFAULT_SAMPLE_SIZE};
