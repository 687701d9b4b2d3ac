use serde::{Deserialize, Serialize};

use crate::Params;

/// Modality-specific description of a datum's extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Image {
        width: u32,
        height: u32,
        channels: u8,
    },
    Audio {
        samples: usize,
        channels: usize,
        sample_rate: u32,
    },
    Text {
        chars: usize,
        words: usize,
    },
    Video {
        frames: usize,
        width: u32,
        height: u32,
        fps: f64,
        audio: Option<Box<Shape>>,
    },
}

impl Shape {
    /// Pixel area for images and video frames.
    pub fn area(&self) -> Option<f64> {
        match self {
            Shape::Image { width, height, .. } | Shape::Video { width, height, .. } => {
                Some(*width as f64 * *height as f64)
            }
            _ => None,
        }
    }

    pub fn dims(&self) -> Option<(u32, u32)> {
        match self {
            Shape::Image { width, height, .. } | Shape::Video { width, height, .. } => {
                Some((*width, *height))
            }
            _ => None,
        }
    }
}

/// Record of one transform application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformMetadata {
    pub name: String,
    /// Concrete params after random descriptors were drawn and defaults filled.
    pub params: Params,
    /// In `[0, 100]`; zero when the transform was skipped.
    pub intensity: f64,
    pub applied: bool,
    pub src_shape: Shape,
    pub dst_shape: Shape,
    /// Metadata of nested pipelines (compose nodes, video audio pipelines).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TransformMetadata>,
}
