//! Shared machinery for polyaug: seeded random streams, transform
//! descriptors and schemas, pipelines, metadata and the generic augmenter
//! that every modality crate plugs its catalog into.

pub mod catalog;
mod error;
pub mod intensity;
pub mod lambda;
pub mod metadata;
pub mod par;
pub mod params;
pub mod rng;
pub mod spec;

pub use catalog::{Augmenter, Catalog, Modality, OpCtx, OpDef};
pub use error::{Error, Result};
pub use lambda::Lambdas;
pub use metadata::{Shape, TransformMetadata};
pub use params::{Kind, ParamDecl, Params};
pub use rng::Rng;
pub use spec::{Node, Pipeline, TransformSpec};
