use std::fmt;
use std::path::Path;

use image::{DynamicImage, ImageFormat, RgbImage, RgbaImage};
use polyaug_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channels {
    Rgb,
    Rgba,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Rgb => 3,
            Channels::Rgba => 4,
        }
    }

    pub fn has_alpha(self) -> bool {
        self == Channels::Rgba
    }
}

/// An 8-bit RGB or RGBA image stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: Channels,
    data: Vec<u8>,
}

impl fmt::Debug for Raster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Raster({}x{}x{})", self.width, self.height, self.channels.count())
    }
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: Channels, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!("empty raster {width}x{height}")));
        }
        let expected = width as usize * height as usize * channels.count();
        if data.len() != expected {
            return Err(Error::Format(format!(
                "raster buffer has {} bytes, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A raster filled with one color; alpha is ignored for RGB.
    pub fn filled(width: u32, height: u32, channels: Channels, color: [u8; 4]) -> Self {
        let n = channels.count();
        let px = &color[..n];
        let data = px
            .iter()
            .copied()
            .cycle()
            .take(width.max(1) as usize * height.max(1) as usize * n)
            .collect();
        Self {
            width: width.max(1),
            height: height.max(1),
            channels,
            data,
        }
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: u32, height: u32, channels: Channels, f: impl Fn(u32, u32) -> [u8; 4]) -> Self {
        let n = channels.count();
        let mut data = Vec::with_capacity(width as usize * height as usize * n);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y)[..n]);
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.count()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn row_len(&self) -> usize {
        self.width as usize * self.channels.count()
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels.count()
    }

    /// The pixel at `(x, y)` as RGBA (alpha 255 for RGB rasters).
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let o = self.offset(x, y);
        let d = &self.data;
        match self.channels {
            Channels::Rgb => [d[o], d[o + 1], d[o + 2], 255],
            Channels::Rgba => [d[o], d[o + 1], d[o + 2], d[o + 3]],
        }
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, px: [u8; 4]) {
        let o = self.offset(x, y);
        let n = self.channels.count();
        self.data[o..o + n].copy_from_slice(&px[..n]);
    }

    pub fn with_channels(&self, channels: Channels) -> Raster {
        if channels == self.channels {
            return self.clone();
        }
        let n = channels.count();
        let mut data = Vec::with_capacity(self.width as usize * self.height as usize * n);
        for px in self.data.chunks_exact(self.channels.count()) {
            data.extend_from_slice(&px[..3]);
            if n == 4 {
                data.push(255);
            }
        }
        Raster {
            width: self.width,
            height: self.height,
            channels,
            data,
        }
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        match self.channels {
            Channels::Rgb => DynamicImage::ImageRgb8(
                RgbImage::from_raw(self.width, self.height, self.data.clone()).expect("valid buffer"),
            ),
            Channels::Rgba => DynamicImage::ImageRgba8(
                RgbaImage::from_raw(self.width, self.height, self.data.clone()).expect("valid buffer"),
            ),
        }
    }

    pub fn from_dynamic(img: DynamicImage) -> Result<Raster> {
        if img.color().has_alpha() {
            let rgba = img.to_rgba8();
            let (w, h) = rgba.dimensions();
            Raster::new(w, h, Channels::Rgba, rgba.into_raw())
        } else {
            let rgb = img.to_rgb8();
            let (w, h) = rgb.dimensions();
            Raster::new(w, h, Channels::Rgb, rgb.into_raw())
        }
    }

    /// Reads a PNG or JPEG file.
    pub fn load(path: impl AsRef<Path>) -> Result<Raster> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::Format(format!("{}: {other}", path.display())),
        })?;
        Raster::from_dynamic(img)
    }

    pub fn decode(bytes: &[u8]) -> Result<Raster> {
        let img = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
        Raster::from_dynamic(img)
    }

    /// Writes PNG, or JPEG when the extension asks for it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        let bytes = match ext.as_str() {
            "jpg" | "jpeg" => crate::filter::encode_jpeg(self, 95)?,
            _ => self.encode_png()?,
        };
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.to_dynamic()
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(out.into_inner())
    }
}
