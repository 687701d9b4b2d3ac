//! Convolution filters and the JPEG round trip.

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};
use polyaug_core::{par, Error, Result};

use crate::raster::{Channels, Raster};

/// A 3x3 kernel applied as `sum(k * v) / scale + offset`.
#[derive(Debug, Clone, Copy)]
pub struct Kernel3 {
    pub weights: [f32; 9],
    pub scale: f32,
    pub offset: f32,
}

const fn k(weights: [f32; 9], scale: f32, offset: f32) -> Kernel3 {
    Kernel3 { weights, scale, offset }
}

/// Named kernels; the classic PIL filter set restricted to 3x3.
pub const KERNELS: &[(&str, Kernel3)] = &[
    ("identity", k([0., 0., 0., 0., 1., 0., 0., 0., 0.], 1.0, 0.0)),
    ("blur", k([1.; 9], 9.0, 0.0)),
    ("contour", k([-1., -1., -1., -1., 8., -1., -1., -1., -1.], 1.0, 255.0)),
    ("detail", k([0., -1., 0., -1., 10., -1., 0., -1., 0.], 6.0, 0.0)),
    ("edge_enhance", k([-1., -1., -1., -1., 10., -1., -1., -1., -1.], 2.0, 0.0)),
    ("edge_enhance_more", k([-1., -1., -1., -1., 9., -1., -1., -1., -1.], 1.0, 0.0)),
    ("emboss", k([-1., 0., 0., 0., 1., 0., 0., 0., 0.], 1.0, 128.0)),
    ("find_edges", k([-1., -1., -1., -1., 8., -1., -1., -1., -1.], 1.0, 0.0)),
    ("sharpen", k([-2., -2., -2., -2., 32., -2., -2., -2., -2.], 16.0, 0.0)),
    ("smooth", k([1., 1., 1., 1., 5., 1., 1., 1., 1.], 13.0, 0.0)),
];

pub fn kernel_names() -> Vec<&'static str> {
    KERNELS.iter().map(|(n, _)| *n).collect()
}

pub fn named_kernel(name: &str) -> Result<Kernel3> {
    KERNELS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, k)| *k)
        .ok_or_else(|| Error::invalid("apply_filter_kernel", format!("unknown kernel {name:?}")))
}

/// Convolves the color channels with edge clamping; alpha is kept.
pub fn convolve3(img: &Raster, kernel: &Kernel3) -> Raster {
    let n = img.channel_count();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.data();
    let mut out = img.clone();
    par::for_each_chunk_mut(out.data_mut(), w as usize * n, |y, row| {
        let y = y as i64;
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0f32;
                for ky in 0..3 {
                    let sy = (y + ky - 1).clamp(0, h - 1);
                    for kx in 0..3 {
                        let sx = (x + kx - 1).clamp(0, w - 1);
                        acc += kernel.weights[(ky * 3 + kx) as usize] * src[((sy * w + sx) as usize) * n + c] as f32;
                    }
                }
                row[x as usize * n + c] = (acc / kernel.scale + kernel.offset).round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    out
}

pub fn apply_filter_kernel(img: &Raster, name: &str) -> Result<Raster> {
    if name == "identity" {
        return Ok(img.clone());
    }
    Ok(convolve3(img, &named_kernel(name)?))
}

/// Lerps from the smoothed image toward (and past, for factor > 1) the
/// original: factor 1 is identity, 0 is the smoothed image.
pub fn sharpen(img: &Raster, factor: f64) -> Result<Raster> {
    if !(factor >= 0.0) || !factor.is_finite() {
        return Err(Error::invalid("sharpen", "factor must be non-negative"));
    }
    if factor == 1.0 {
        return Ok(img.clone());
    }
    let smooth = convolve3(img, &named_kernel("smooth")?);
    let f = factor as f32;
    let n = img.channel_count();
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        if i % n < 3 {
            let d = smooth.data()[i] as f32;
            *v = (d + f * (*v as f32 - d)).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let half = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut w: Vec<f64> = (-half..=half).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w.into_iter().map(|v| v as f32).collect()
}

/// Separable Gaussian blur with standard deviation `radius` pixels.
pub fn blur(img: &Raster, radius: f64) -> Result<Raster> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::invalid("blur", "radius must be non-negative"));
    }
    if radius == 0.0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(radius);
    let half = (kernel.len() / 2) as i64;
    let n = img.channel_count();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.data();

    let mut tmp = vec![0f32; src.len()];
    par::for_each_chunk_mut(&mut tmp, w as usize * n, |y, row| {
        let base = y * w as usize * n;
        for x in 0..w {
            for c in 0..n {
                let mut acc = 0f32;
                for (i, kv) in kernel.iter().enumerate() {
                    let sx = (x + i as i64 - half).clamp(0, w - 1);
                    acc += kv * src[base + sx as usize * n + c] as f32;
                }
                row[x as usize * n + c] = acc;
            }
        }
    });
    let mut out = img.clone();
    par::for_each_chunk_mut(out.data_mut(), w as usize * n, |y, row| {
        for x in 0..w as usize {
            for c in 0..n {
                let mut acc = 0f32;
                for (i, kv) in kernel.iter().enumerate() {
                    let sy = (y as i64 + i as i64 - half).clamp(0, h - 1);
                    acc += kv * tmp[(sy as usize * w as usize + x) * n + c];
                }
                row[x * n + c] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    Ok(out)
}

/// Baseline JPEG with 4:2:0 chroma subsampling. Alpha is dropped.
pub fn encode_jpeg(img: &Raster, quality: u8) -> Result<Vec<u8>> {
    let rgb = img.with_channels(Channels::Rgb);
    let (w, h) = rgb.dims();
    if w > u16::MAX as u32 || h > u16::MAX as u32 {
        return Err(Error::Format(format!("{w}x{h} exceeds JPEG limits")));
    }
    let mut buf = Vec::new();
    let mut enc = Encoder::new(&mut buf, quality.clamp(1, 100));
    enc.set_sampling_factor(SamplingFactor::R_4_2_0);
    enc.encode(rgb.data(), w as u16, h as u16, ColorType::Rgb)
        .map_err(|e| Error::Format(format!("jpeg encode: {e}")))?;
    Ok(buf)
}

/// JPEG encode/decode round trip; an alpha channel is carried over unchanged.
pub fn encoding_quality(img: &Raster, quality: u8) -> Result<Raster> {
    if !(1..=100).contains(&quality) {
        return Err(Error::invalid("encoding_quality", "quality must lie in [1, 100]"));
    }
    let decoded = Raster::decode(&encode_jpeg(img, quality)?)?.with_channels(Channels::Rgb);
    if !img.channels().has_alpha() {
        return Ok(decoded);
    }
    let mut out = decoded.with_channels(Channels::Rgba);
    for (dst, src) in out.data_mut().chunks_exact_mut(4).zip(img.data().chunks_exact(4)) {
        dst[3] = src[3];
    }
    Ok(out)
}

pub fn psnr(a: &Raster, b: &Raster) -> f64 {
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
        .sum::<f64>()
        / a.data().len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth_image() -> Raster {
        Raster::from_fn(64, 48, Channels::Rgb, |x, y| [(x * 4) as u8, (y * 5) as u8, 128, 255])
    }

    #[test]
    fn blur_identity_and_constant() {
        let img = smooth_image();
        assert_eq!(blur(&img, 0.0).unwrap(), img);
        let flat = Raster::filled(20, 20, Channels::Rgb, [90, 10, 250, 255]);
        assert_eq!(blur(&flat, 3.0).unwrap(), flat);
    }

    #[test]
    fn kernels_preserve_flat_images() {
        let flat = Raster::filled(8, 8, Channels::Rgb, [90, 10, 250, 255]);
        for name in ["identity", "blur", "smooth", "sharpen", "detail", "edge_enhance"] {
            assert_eq!(apply_filter_kernel(&flat, name).unwrap(), flat, "{name}");
        }
        assert!(apply_filter_kernel(&flat, "nope").is_err());
    }

    #[test]
    fn sharpen_identity() {
        let img = smooth_image();
        assert_eq!(sharpen(&img, 1.0).unwrap(), img);
        assert_ne!(sharpen(&img, 3.0).unwrap(), img);
    }

    #[test]
    fn jpeg_round_trip_quality() {
        let img = smooth_image();
        let hi = encoding_quality(&img, 95).unwrap();
        let lo = encoding_quality(&img, 5).unwrap();
        assert_eq!(hi.dims(), img.dims());
        assert!(psnr(&img, &hi) > 35.0);
        assert!(psnr(&img, &hi) > psnr(&img, &lo));
    }
}
