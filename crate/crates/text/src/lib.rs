//! Text augmentations for polyaug: typos, invisible and lookalike
//! characters, styled fonts, word-level rewrites.

mod catalog;
pub mod doc;
pub mod ops;
pub mod tables;

pub use catalog::{augmenter, catalog, identity_params, TextEnv, TextModality, TextOp};
pub use doc::TextDoc;
