//! Video transforms over in-memory clips: frame sequences with an optional
//! soundtrack. Spatial ops run per frame through the image catalog; temporal
//! ops cut and splice frames and audio together.

pub mod bridge;
mod catalog;
pub mod clip;
pub mod compose;
pub mod temporal;

pub use catalog::{apply_per_frame, augmenter, catalog, identity_params, per_frame, VideoEnv, VideoModality, VideoOp};
pub use clip::{map_dir, samples_for, ClipReader, ClipWriter, Manifest, VideoClip, FORMAT};
