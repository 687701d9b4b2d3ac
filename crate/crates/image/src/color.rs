//! Per-pixel color and sample-level transforms.

use polyaug_core::{par, Error, Result, Rng};

use crate::raster::{Channels, Raster};

#[inline]
fn luma(p: &[u8]) -> f32 {
    0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32
}

#[inline]
fn q(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Applies `f` to the color channels of every pixel in parallel rows.
fn map_pixels(img: &Raster, f: impl Fn(&mut [u8]) + Sync + Send) -> Raster {
    let n = img.channel_count();
    let mut out = img.clone();
    let row = img.row_len();
    par::for_each_chunk_mut(out.data_mut(), row, |_, r| {
        for px in r.chunks_exact_mut(n) {
            f(px);
        }
    });
    out
}

fn check_factor(op: &str, f: f64) -> Result<()> {
    if f.is_finite() && f >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(op, format!("factor {f} must be finite and non-negative")))
    }
}

/// `clamp(v * factor)` on each color channel.
pub fn brightness(img: &Raster, factor: f64) -> Result<Raster> {
    check_factor("brightness", factor)?;
    let f = factor as f32;
    Ok(map_pixels(img, |p| {
        for v in &mut p[..3] {
            *v = q(*v as f32 * f);
        }
    }))
}

pub fn mean_luma(img: &Raster) -> f64 {
    let n = img.channel_count();
    let total: f64 = img.data().chunks_exact(n).map(|p| luma(p) as f64).sum();
    total / (img.width() as f64 * img.height() as f64)
}

/// Scales each channel's distance from the image's mean luma.
pub fn contrast(img: &Raster, factor: f64) -> Result<Raster> {
    check_factor("contrast", factor)?;
    let m = mean_luma(img) as f32;
    let f = factor as f32;
    Ok(map_pixels(img, |p| {
        for v in &mut p[..3] {
            *v = q(m + f * (*v as f32 - m));
        }
    }))
}

/// Lerps each channel toward (factor < 1) or away from the pixel's own luma.
pub fn saturation(img: &Raster, factor: f64) -> Result<Raster> {
    check_factor("saturation", factor)?;
    let f = factor as f32;
    Ok(map_pixels(img, |p| {
        let l = luma(p);
        for v in &mut p[..3] {
            *v = q(l + f * (*v as f32 - l));
        }
    }))
}

pub fn color_jitter(img: &Raster, brightness_factor: f64, contrast_factor: f64, saturation_factor: f64) -> Result<Raster> {
    for (name, f) in [
        ("brightness_factor", brightness_factor),
        ("contrast_factor", contrast_factor),
        ("saturation_factor", saturation_factor),
    ] {
        if !(f > 0.0) {
            return Err(Error::invalid("color_jitter", format!("{name} must be positive")));
        }
    }
    let out = brightness(img, brightness_factor)?;
    let out = contrast(&out, contrast_factor)?;
    saturation(&out, saturation_factor)
}

/// Integer Rec.601 luma `(299 R + 587 G + 114 B + 500) / 1000`.
#[inline]
pub fn gray_value(p: &[u8]) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

/// Replaces the color channels with the integer luma. Idempotent.
pub fn grayscale(img: &Raster) -> Raster {
    map_pixels(img, |p| {
        let g = gray_value(p);
        p[..3].fill(g);
    })
}

/// Multiplies alpha by `level`. The output is RGBA unless `level` is 1.
pub fn opacity(img: &Raster, level: f64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::invalid("opacity", "level must lie in [0, 1]"));
    }
    if level == 1.0 {
        return Ok(img.clone());
    }
    let rgba = img.with_channels(Channels::Rgba);
    let l = level as f32;
    Ok(map_pixels(&rgba, |p| p[3] = q(p[3] as f32 * l)))
}

/// Converts between `RGB`, `RGBA` and `L` (gray stored in RGB).
pub fn convert_color(img: &Raster, mode: &str) -> Result<Raster> {
    match mode {
        "RGB" => Ok(img.with_channels(Channels::Rgb)),
        "RGBA" => Ok(img.with_channels(Channels::Rgba)),
        "L" => Ok(grayscale(&img.with_channels(Channels::Rgb))),
        other => Err(Error::invalid("convert_color", format!("unknown mode {other:?}"))),
    }
}

/// Adds Gaussian noise on the [0, 1] sample scale. Row `y` draws from
/// `rng.derive(y)`, so the field does not depend on the thread schedule.
pub fn random_noise(img: &Raster, mean: f64, variance: f64, rng: &Rng) -> Result<Raster> {
    if !(variance >= 0.0) || !mean.is_finite() {
        return Err(Error::invalid("random_noise", "variance must be non-negative"));
    }
    let sd = variance.sqrt();
    let n = img.channel_count();
    let mut out = img.clone();
    let row = img.row_len();
    par::for_each_chunk_mut(out.data_mut(), row, |y, r| {
        let mut stream = rng.derive(y as u64);
        for p in r.chunks_exact_mut(n) {
            for v in &mut p[..3] {
                let x = (*v as f64 / 255.0 + stream.gaussian(mean, sd)).clamp(0.0, 1.0);
                *v = (x * 255.0).round() as u8;
            }
        }
    });
    Ok(out)
}

/// Permutes a random `factor` fraction of the pixels among themselves.
pub fn shuffle_pixels(img: &Raster, factor: f64, rng: &mut Rng) -> Result<Raster> {
    if !(0.0..=1.0).contains(&factor) {
        return Err(Error::invalid("shuffle_pixels", "factor must lie in [0, 1]"));
    }
    let n = img.channel_count();
    let total = img.width() as usize * img.height() as usize;
    let k = (factor * total as f64).round() as usize;
    if k < 2 {
        return Ok(img.clone());
    }
    // partial Fisher-Yates picks k distinct positions
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..k {
        let j = i + rng.index(total - i);
        idx.swap(i, j);
    }
    let chosen = &idx[..k];
    let mut order = chosen.to_vec();
    rng.shuffle(&mut order);
    let src = img.data();
    let mut out = img.clone();
    let dst = out.data_mut();
    for (&to, &from) in chosen.iter().zip(&order) {
        dst[to * n..to * n + n].copy_from_slice(&src[from * n..from * n + n]);
    }
    Ok(out)
}

/// Box-downscales to `max(1, round(dim * ratio))` per axis, then upscales
/// back with nearest neighbor.
pub fn pixelization(img: &Raster, ratio: f64) -> Result<Raster> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid("pixelization", "ratio must lie in (0, 1]"));
    }
    if ratio == 1.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let sw = ((w as f64 * ratio).round() as usize).max(1);
    let sh = ((h as f64 * ratio).round() as usize).max(1);
    let n = img.channel_count();
    // block bounds: small pixel i covers [i*w/sw, (i+1)*w/sw)
    let xb: Vec<(usize, usize)> = (0..sw).map(|i| (i * w / sw, ((i + 1) * w / sw).max(i * w / sw + 1))).collect();
    let yb: Vec<(usize, usize)> = (0..sh).map(|i| (i * h / sh, ((i + 1) * h / sh).max(i * h / sh + 1))).collect();
    let mut small = vec![0u8; sw * sh * n];
    par::for_each_chunk_mut(&mut small, sw * n, |sy, row| {
        let (y0, y1) = yb[sy];
        for (sx, &(x0, x1)) in xb.iter().enumerate() {
            let count = ((x1 - x0) * (y1 - y0)) as u64;
            for c in 0..n {
                let mut sum = 0u64;
                for y in y0..y1 {
                    for x in x0..x1 {
                        sum += img.data()[(y * w + x) * n + c] as u64;
                    }
                }
                row[sx * n + c] = ((sum + count / 2) / count) as u8;
            }
        }
    });
    let mut out = vec![0u8; w * h * n];
    par::for_each_chunk_mut(&mut out, w * n, |y, row| {
        let sy = (y * sh / h).min(sh - 1);
        for x in 0..w {
            let sx = (x * sw / w).min(sw - 1);
            row[x * n..x * n + n].copy_from_slice(&small[(sy * sw + sx) * n..(sy * sw + sx) * n + n]);
        }
    });
    Raster::new(img.width(), img.height(), img.channels(), out)
}

/// Per-pixel blend `img * (1 - m) + overlay * m` with `m` the mask luma.
/// `overlay` and `mask` must already match `img`'s dimensions.
pub fn masked_composite(img: &Raster, overlay: &Raster, mask: &Raster) -> Result<Raster> {
    if overlay.dims() != img.dims() || mask.dims() != img.dims() {
        return Err(Error::invalid("masked_composite", "overlay and mask must match the image size"));
    }
    let n = img.channel_count();
    let overlay = overlay.with_channels(img.channels());
    let mn = mask.channel_count();
    let mut out = img.clone();
    let w = img.width() as usize;
    par::for_each_chunk_mut(out.data_mut(), w * n, |y, row| {
        for x in 0..w {
            let i = y * w + x;
            let m = gray_value(&mask.data()[i * mn..i * mn + 3]) as u32;
            for c in 0..n {
                let a = row[x * n + c] as u32;
                let b = overlay.data()[i * n + c] as u32;
                row[x * n + c] = ((a * (255 - m) + b * m + 127) / 255) as u8;
            }
        }
    });
    Ok(out)
}
