//! Spatial transforms: crops, pads, resampling, flips, rotations and shears.

use polyaug_core::{par, Error, Result};

use crate::raster::{Channels, Raster};

/// Per-output-sample source span and normalized weights along one axis.
struct AxisWeights {
    taps: Vec<(usize, Vec<f32>)>,
}

impl AxisWeights {
    /// Triangle (bilinear) kernel whose support widens when downscaling, so
    /// every source sample contributes. Equal sizes give unit weights.
    fn new(src: usize, dst: usize) -> Self {
        let scale = src as f64 / dst as f64;
        let stretch = scale.max(1.0);
        let taps = (0..dst)
            .map(|i| {
                let center = (i as f64 + 0.5) * scale;
                let lo = ((center - stretch).floor().max(0.0)) as usize;
                let hi = ((center + stretch).ceil() as usize).min(src);
                let mut weights: Vec<f64> = (lo..hi)
                    .map(|j| {
                        let d = ((j as f64 + 0.5 - center) / stretch).abs();
                        (1.0 - d).max(0.0)
                    })
                    .collect();
                let sum: f64 = weights.iter().sum();
                if sum <= 0.0 {
                    let nearest = (center.floor() as usize).min(src - 1);
                    return (nearest, vec![1.0]);
                }
                weights.iter_mut().for_each(|w| *w /= sum);
                (lo, weights.into_iter().map(|w| w as f32).collect())
            })
            .collect();
        Self { taps }
    }
}

/// Resizes with a separable triangle filter.
pub fn resize(img: &Raster, width: u32, height: u32) -> Result<Raster> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("resize", format!("target {width}x{height} is empty")));
    }
    if (width, height) == img.dims() {
        return Ok(img.clone());
    }
    let n = img.channel_count();
    let (sw, sh) = (img.width() as usize, img.height() as usize);
    let (dw, dh) = (width as usize, height as usize);
    let xw = AxisWeights::new(sw, dw);
    let yw = AxisWeights::new(sh, dh);
    let src = img.data();

    let mut horizontal = vec![0f32; sh * dw * n];
    par::for_each_chunk_mut(&mut horizontal, dw * n, |y, row| {
        let src_row = &src[y * sw * n..(y + 1) * sw * n];
        for (x, (start, weights)) in xw.taps.iter().enumerate() {
            for c in 0..n {
                let mut acc = 0f32;
                for (k, w) in weights.iter().enumerate() {
                    acc += w * src_row[(start + k) * n + c] as f32;
                }
                row[x * n + c] = acc;
            }
        }
    });

    let mut out = vec![0u8; dh * dw * n];
    par::for_each_chunk_mut(&mut out, dw * n, |y, row| {
        let (start, weights) = &yw.taps[y];
        for (i, v) in row.iter_mut().enumerate() {
            let mut acc = 0f32;
            for (k, w) in weights.iter().enumerate() {
                acc += w * horizontal[(start + k) * dw * n + i];
            }
            *v = quantize(acc);
        }
    });
    Raster::new(width, height, img.channels(), out)
}

#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn scale(img: &Raster, factor: f64) -> Result<Raster> {
    if !(factor > 0.0) {
        return Err(Error::invalid("scale", "factor must be positive"));
    }
    let w = ((img.width() as f64 * factor).round() as u32).max(1);
    let h = ((img.height() as f64 * factor).round() as u32).max(1);
    resize(img, w, h)
}

/// Multiplies the aspect ratio by `ratio` while keeping the pixel area.
pub fn change_aspect_ratio(img: &Raster, ratio: f64) -> Result<Raster> {
    if !(ratio > 0.0) {
        return Err(Error::invalid("change_aspect_ratio", "ratio must be positive"));
    }
    let r = ratio.sqrt();
    let w = ((img.width() as f64 * r).round() as u32).max(1);
    let h = ((img.height() as f64 / r).round() as u32).max(1);
    resize(img, w, h)
}

/// Rescales, keeping the aspect ratio, so that the pixel count lies within
/// `[min_resolution, max_resolution]`.
pub fn clip_image_size(img: &Raster, min_resolution: Option<u64>, max_resolution: Option<u64>) -> Result<Raster> {
    if let (Some(lo), Some(hi)) = (min_resolution, max_resolution) {
        if lo > hi {
            return Err(Error::invalid("clip_image_size", "min_resolution > max_resolution"));
        }
    }
    let target = clip_dims(img.dims(), min_resolution, max_resolution);
    if target == img.dims() {
        Ok(img.clone())
    } else {
        resize(img, target.0, target.1)
    }
}

/// Aspect-preserving dims whose pixel count lies within the bounds; the
/// source dims when already inside.
pub fn clip_dims(src: (u32, u32), min_resolution: Option<u64>, max_resolution: Option<u64>) -> (u32, u32) {
    let (w, h) = (src.0 as f64, src.1 as f64);
    let area = w * h;
    match (min_resolution, max_resolution) {
        (_, Some(hi)) if area > hi as f64 => {
            let s = (hi as f64 / area).sqrt();
            (((w * s).floor() as u32).max(1), ((h * s).floor() as u32).max(1))
        }
        (Some(lo), _) if area < lo as f64 => {
            let s = (lo as f64 / area).sqrt();
            ((w * s).ceil() as u32, (h * s).ceil() as u32)
        }
        _ => src,
    }
}

/// Pixel bounds of a fractional crop box.
pub fn crop_bounds(width: u32, height: u32, x1: f64, y1: f64, x2: f64, y2: f64) -> (u32, u32, u32, u32) {
    let fx = |f: f64| ((f * width as f64).round() as u32).min(width);
    let fy = |f: f64| ((f * height as f64).round() as u32).min(height);
    (fx(x1), fy(y1), fx(x2), fy(y2))
}

/// Crops to the box `[x1, x2) x [y1, y2)` given as fractions of the size.
pub fn crop(img: &Raster, x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Raster> {
    let (l, t, r, b) = crop_bounds(img.width(), img.height(), x1, y1, x2, y2);
    if r <= l || b <= t {
        return Err(Error::invalid(
            "crop",
            format!("box ({x1}, {y1}, {x2}, {y2}) is empty at {}x{}", img.width(), img.height()),
        ));
    }
    crop_pixels(img, l, t, r - l, b - t)
}

pub fn crop_pixels(img: &Raster, left: u32, top: u32, width: u32, height: u32) -> Result<Raster> {
    if width == 0 || height == 0 || left + width > img.width() || top + height > img.height() {
        return Err(Error::invalid("crop", "crop rectangle outside image"));
    }
    let n = img.channel_count();
    let row = img.row_len();
    let mut out = Vec::with_capacity(width as usize * height as usize * n);
    for y in top..top + height {
        let start = y as usize * row + left as usize * n;
        out.extend_from_slice(&img.data()[start..start + width as usize * n]);
    }
    Raster::new(width, height, img.channels(), out)
}

/// Places `img` on a `color` canvas with the given margins.
pub fn pad_pixels(img: &Raster, left: u32, top: u32, right: u32, bottom: u32, color: [u8; 4]) -> Raster {
    let w = img.width() + left + right;
    let h = img.height() + top + bottom;
    let mut out = Raster::filled(w, h, img.channels(), color);
    paste(&mut out, img, left as i64, top as i64);
    out
}

/// Pads each side by `w_factor * width` (left and right) and
/// `h_factor * height` (top and bottom).
pub fn pad(img: &Raster, w_factor: f64, h_factor: f64, color: [u8; 4]) -> Result<Raster> {
    if w_factor < 0.0 || h_factor < 0.0 {
        return Err(Error::invalid("pad", "factors must be non-negative"));
    }
    let dx = (w_factor * img.width() as f64).round() as u32;
    let dy = (h_factor * img.height() as f64).round() as u32;
    Ok(pad_pixels(img, dx, dy, dx, dy, color))
}

/// Pads the short side so the image becomes square, centering the content.
pub fn pad_square(img: &Raster, color: [u8; 4]) -> Raster {
    let (w, h) = img.dims();
    if w > h {
        let extra = w - h;
        pad_pixels(img, 0, extra / 2, 0, extra - extra / 2, color)
    } else {
        let extra = h - w;
        pad_pixels(img, extra / 2, 0, extra - extra / 2, 0, color)
    }
}

/// Copies `src` into `dst` with its top-left corner at `(x, y)`, clipping.
pub fn paste(dst: &mut Raster, src: &Raster, x: i64, y: i64) {
    for sy in 0..src.height() {
        let dy = y + sy as i64;
        if dy < 0 || dy >= dst.height() as i64 {
            continue;
        }
        for sx in 0..src.width() {
            let dx = x + sx as i64;
            if dx < 0 || dx >= dst.width() as i64 {
                continue;
            }
            dst.set_pixel(dx as u32, dy as u32, src.pixel(sx, sy));
        }
    }
}

pub fn hflip(img: &Raster) -> Raster {
    let n = img.channel_count();
    let mut out = img.clone();
    let row = img.row_len();
    par::for_each_chunk_mut(out.data_mut(), row, |_, r| {
        let w = r.len() / n;
        for x in 0..w / 2 {
            for c in 0..n {
                r.swap(x * n + c, (w - 1 - x) * n + c);
            }
        }
    });
    out
}

pub fn vflip(img: &Raster) -> Raster {
    let row = img.row_len();
    let mut data = Vec::with_capacity(img.data().len());
    for r in img.data().chunks_exact(row).rev() {
        data.extend_from_slice(r);
    }
    Raster::new(img.width(), img.height(), img.channels(), data).expect("same dims")
}

/// Counter-clockwise rotation by a multiple of 90 degrees as a permutation.
pub fn rotate_quarter_turns(img: &Raster, turns: u32) -> Raster {
    let (w, h) = img.dims();
    match turns % 4 {
        0 => img.clone(),
        2 => vflip(&hflip(img)),
        t => {
            let mut out = Raster::filled(h, w, img.channels(), [0; 4]);
            for y in 0..h {
                for x in 0..w {
                    let (nx, ny) = if t == 1 { (y, w - 1 - x) } else { (h - 1 - y, x) };
                    out.set_pixel(nx, ny, img.pixel(x, y));
                }
            }
            out
        }
    }
}

/// Bilinear sample at continuous coordinates (pixel centers at `i + 0.5`).
/// Returns `None` outside the image area.
#[inline]
pub(crate) fn sample_bilinear(img: &Raster, x: f64, y: f64) -> Option<[f32; 4]> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    if !(x >= 0.0 && y >= 0.0 && x <= w && y <= h) {
        return None;
    }
    let u = x - 0.5;
    let v = y - 0.5;
    let x0 = u.floor();
    let y0 = v.floor();
    let fx = (u - x0) as f32;
    let fy = (v - y0) as f32;
    let clampx = |i: f64| i.clamp(0.0, w - 1.0) as u32;
    let clampy = |i: f64| i.clamp(0.0, h - 1.0) as u32;
    let (xa, xb, ya, yb) = (clampx(x0), clampx(x0 + 1.0), clampy(y0), clampy(y0 + 1.0));
    let p00 = img.pixel(xa, ya);
    let p10 = img.pixel(xb, ya);
    let p01 = img.pixel(xa, yb);
    let p11 = img.pixel(xb, yb);
    let mut out = [0f32; 4];
    for c in 0..4 {
        let top = p00[c] as f32 * (1.0 - fx) + p10[c] as f32 * fx;
        let bot = p01[c] as f32 * (1.0 - fx) + p11[c] as f32 * fx;
        out[c] = top * (1.0 - fy) + bot * fy;
    }
    Some(out)
}

/// Inverse-mapped warp: for every output pixel center, `map` gives the
/// source coordinate to sample. Unmapped or out-of-source pixels get `fill`.
pub fn warp<F>(img: &Raster, out_w: u32, out_h: u32, fill: [u8; 4], map: F) -> Raster
where
    F: Fn(f64, f64) -> Option<(f64, f64)> + Sync + Send,
{
    let channels = img.channels();
    let n = channels.count();
    let mut data = vec![0u8; out_w as usize * out_h as usize * n];
    par::for_each_chunk_mut(&mut data, out_w as usize * n, |y, row| {
        for x in 0..out_w as usize {
            let px = map(x as f64 + 0.5, y as f64 + 0.5)
                .and_then(|(sx, sy)| sample_bilinear(img, sx, sy))
                .map(|p| [quantize(p[0]), quantize(p[1]), quantize(p[2]), quantize(p[3])])
                .unwrap_or(fill);
            row[x * n..x * n + n].copy_from_slice(&px[..n]);
        }
    });
    Raster::new(out_w, out_h, channels, data).expect("warp output dims")
}

/// Counter-clockwise rotation. The canvas grows to the rotated bounding box
/// and uncovered corners take `fill`. Multiples of 90 degrees are exact.
pub fn rotate(img: &Raster, degrees: f64, fill: [u8; 4]) -> Result<Raster> {
    if !degrees.is_finite() {
        return Err(Error::invalid("rotate", "degrees must be finite"));
    }
    let normalized = degrees.rem_euclid(360.0);
    if normalized % 90.0 == 0.0 {
        return Ok(rotate_quarter_turns(img, (normalized / 90.0) as u32));
    }
    let theta = degrees.to_radians();
    let (s, c) = theta.sin_cos();
    let (w, h) = (img.width() as f64, img.height() as f64);
    let out_w = ((w * c.abs() + h * s.abs()) - 1e-9).ceil().max(1.0) as u32;
    let out_h = ((w * s.abs() + h * c.abs()) - 1e-9).ceil().max(1.0) as u32;
    let (ocx, ocy) = (out_w as f64 / 2.0, out_h as f64 / 2.0);
    Ok(warp(img, out_w, out_h, fill, |x, y| {
        let dx = x - ocx;
        let dy = y - ocy;
        Some((w / 2.0 + c * dx - s * dy, h / 2.0 + s * dx + c * dy))
    }))
}

/// Shear along x (`axis = 0`) or y (`axis = 1`); the canvas grows to fit.
pub fn skew(img: &Raster, factor: f64, axis: u8, fill: [u8; 4]) -> Result<Raster> {
    if factor == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let k = factor;
    Ok(match axis {
        0 => {
            let extra = (k.abs() * h).round();
            let offset = if k < 0.0 { extra } else { 0.0 };
            warp(img, w as u32 + extra as u32, h as u32, fill, move |x, y| Some((x - k * y - offset, y)))
        }
        1 => {
            let extra = (k.abs() * w).round();
            let offset = if k < 0.0 { extra } else { 0.0 };
            warp(img, w as u32, h as u32 + extra as u32, fill, move |x, y| Some((x, y - k * x - offset)))
        }
        _ => return Err(Error::invalid("skew", "axis must be 0 or 1")),
    })
}

pub fn ensure_channels(img: &Raster, channels: Channels) -> Raster {
    img.with_channels(channels)
}
