//! Audio augmentations for polyaug over planar float PCM: phase-vocoder pitch
//! and tempo changes, HPSS, biquad filters, a Schroeder reverb, mixing and
//! simple edits.

mod buffer;
mod catalog;
pub mod dsp;
pub mod ops;
pub mod stft;

pub use buffer::AudioBuffer;
pub use catalog::{augmenter, catalog, identity_params, near_identity_params, AudioEnv, AudioModality, AudioOp};
