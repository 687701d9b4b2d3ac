//! Image transforms over in-memory 8-bit RGB(A) rasters.
//!
//! Every transform is available as a plain function in its module and as a
//! catalog entry usable from pipelines (see [`catalog()`]).

pub mod assets;
mod catalog;
pub mod color;
pub mod filter;
pub mod font;
pub mod geometry;
pub mod overlay;
pub mod perspective;
mod raster;

pub use assets::{AssetStore, Rect, Template};
pub use catalog::{augmenter, catalog, identity_params, ImageEnv, ImageModality, ImageOp};
pub use raster::{Channels, Raster};
