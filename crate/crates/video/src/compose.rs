//! Spatial combinations of clips and drawn layers shared by every frame.

use std::sync::Arc;

use polyaug_core::{Error, Result, Rng};
use polyaug_image::font::blend_pixel;
use polyaug_image::overlay::{composite, overlay_image, overlay_onto_background};
use polyaug_image::perspective::{corners, draw_quad, warp_to_quad};
use polyaug_image::{geometry, Channels, Raster};

use crate::clip::VideoClip;
use crate::temporal::conform;

/// Frame `i` of `other`, looping it when it is shorter.
fn looped(other: &VideoClip, i: usize) -> &Raster {
    other.frame(i % other.len())
}

fn other_at_rate(clip: &VideoClip, other: &VideoClip) -> Result<VideoClip> {
    crate::temporal::change_fps(other, clip.fps())
}

/// Side by side (`horizontal`) or top to bottom; the shared edge must match.
/// The second clip loops to the first one's length; audio comes from the first.
pub fn stack(clip: &VideoClip, other: &VideoClip, horizontal: bool) -> Result<VideoClip> {
    let op = if horizontal { "hstack" } else { "vstack" };
    let (w, h) = clip.dims();
    let (ow, oh) = other.dims();
    if horizontal && oh != h {
        return Err(Error::failed(op, format!("heights differ ({h} vs {oh})")));
    }
    if !horizontal && ow != w {
        return Err(Error::failed(op, format!("widths differ ({w} vs {ow})")));
    }
    let other = other_at_rate(clip, other)?;
    let (cw, ch) = if horizontal { (w + ow, h) } else { (w, h + oh) };
    let channels = clip.channels();
    let frames = polyaug_core::par::map_range(clip.len(), |i| {
        let mut out = Raster::filled(cw, ch, channels, [0, 0, 0, 255]);
        geometry::paste(&mut out, clip.frame(i), 0, 0);
        let second = geometry::ensure_channels(looped(&other, i), channels);
        let (x, y) = if horizontal { (w as i64, 0) } else { (0, h as i64) };
        geometry::paste(&mut out, &second, x, y);
        Arc::new(out)
    });
    VideoClip::new(frames, clip.fps(), clip.audio().cloned())
}

/// Composites frames of `other`, scaled to `size` of the frame height, at
/// the relative position.
pub fn overlay(clip: &VideoClip, other: &VideoClip, opacity: f64, size: f64, x_pos: f64, y_pos: f64) -> Result<VideoClip> {
    let other = other_at_rate(clip, other)?;
    clip.map_frames(false, |i, f| Ok(overlay_image(f, looped(&other, i), opacity, size, x_pos, y_pos)?.0))
}

/// Per-pixel mix `(1 - alpha) * clip + alpha * other`.
pub fn blend(clip: &VideoClip, other: &VideoClip, alpha: f64) -> Result<VideoClip> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("blend_videos", "alpha must lie in [0, 1]"));
    }
    if alpha == 0.0 {
        return Ok(clip.clone());
    }
    let other = conform(other, clip)?;
    clip.map_frames(false, |i, f| {
        let g = looped(&other, i);
        let mut out = f.clone();
        for (a, b) in out.data_mut().iter_mut().zip(g.data()) {
            *a = ((1.0 - alpha) * *a as f64 + alpha * *b as f64).round() as u8;
        }
        Ok(out)
    })
}

/// Places each frame onto the matching frame of `background`; the output
/// takes the background's dims.
pub fn onto_background_video(clip: &VideoClip, background: &VideoClip, size: f64, x_pos: f64, y_pos: f64) -> Result<VideoClip> {
    let bg = other_at_rate(clip, background)?;
    let out = polyaug_core::par::map_range(clip.len(), |i| {
        overlay_onto_background(clip.frame(i), looped(&bg, i), size, x_pos, y_pos, false).map(|(r, _)| Arc::new(r))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    VideoClip::new(out, clip.fps(), clip.audio().cloned())
}

/// Composites one RGBA layer onto every frame.
pub fn apply_layer(clip: &VideoClip, layer: &Raster) -> Result<VideoClip> {
    clip.map_frames(true, |_, f| {
        let mut out = f.clone();
        composite(&mut out, layer, 0, 0, 1.0);
        Ok(out)
    })
}

fn transparent(w: u32, h: u32) -> Raster {
    Raster::filled(w, h, Channels::Rgba, [0, 0, 0, 0])
}

fn random_color(rng: &mut Rng, opacity: f64) -> [u8; 4] {
    let mut c = [0u8; 4];
    for v in c.iter_mut().take(3) {
        *v = rng.below(256) as u8;
    }
    c[3] = (opacity.clamp(0.0, 1.0) * 255.0).round() as u8;
    c
}

/// Filled circles of radius `radius_frac` of the shorter side, random
/// centers, one color unless `color` is `None` (then one per dot).
pub fn dots_layer(w: u32, h: u32, count: usize, radius_frac: f64, color: Option<[u8; 3]>, opacity: f64, rng: &mut Rng) -> Raster {
    let mut layer = transparent(w, h);
    let r = (radius_frac * w.min(h) as f64).max(0.5);
    let alpha = (opacity.clamp(0.0, 1.0) * 255.0).round() as u8;
    for _ in 0..count {
        let (cx, cy) = (rng.uniform(0.0, w as f64), rng.uniform(0.0, h as f64));
        let c = match color {
            Some([r, g, b]) => [r, g, b, alpha],
            None => random_color(rng, opacity),
        };
        fill(&mut layer, c, |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r, (cx - r, cy - r, cx + r, cy + r));
    }
    layer
}

pub const SHAPE_KINDS: [&str; 3] = ["rectangle", "ellipse", "triangle"];

/// Random rectangles, ellipses and triangles with sides between
/// `min_size` and `max_size` of the shorter frame side.
pub fn shapes_layer(w: u32, h: u32, count: usize, min_size: f64, max_size: f64, opacity: f64, rng: &mut Rng) -> Raster {
    let mut layer = transparent(w, h);
    let side = w.min(h) as f64;
    for _ in 0..count {
        let kind = rng.index(SHAPE_KINDS.len());
        let sw = rng.uniform(min_size, max_size) * side;
        let sh = rng.uniform(min_size, max_size) * side;
        let (x0, y0) = (rng.uniform(-sw / 2.0, w as f64 - sw / 2.0), rng.uniform(-sh / 2.0, h as f64 - sh / 2.0));
        let c = random_color(rng, opacity);
        let bounds = (x0, y0, x0 + sw, y0 + sh);
        let (cx, cy) = (x0 + sw / 2.0, y0 + sh / 2.0);
        match kind {
            0 => fill(&mut layer, c, |_, _| true, bounds),
            1 => fill(&mut layer, c, |x, y| ((x - cx) / (sw / 2.0)).powi(2) + ((y - cy) / (sh / 2.0)).powi(2) <= 1.0, bounds),
            // apex at top center
            _ => fill(&mut layer, c, |x, y| ((x - cx).abs() * 2.0 / sw) <= (y - y0) / sh, bounds),
        }
    }
    layer
}

/// Blends `color` into pixels whose centers pass `inside`, within `bounds`.
fn fill(layer: &mut Raster, color: [u8; 4], inside: impl Fn(f64, f64) -> bool, bounds: (f64, f64, f64, f64)) {
    let (w, h) = layer.dims();
    let x0 = bounds.0.floor().max(0.0) as u32;
    let y0 = bounds.1.floor().max(0.0) as u32;
    let x1 = (bounds.2.ceil().max(0.0) as u32).min(w);
    let y1 = (bounds.3.ceil().max(0.0) as u32).min(h);
    for y in y0..y1 {
        for x in x0..x1 {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            if px >= bounds.0 && px < bounds.2 && py >= bounds.1 && py < bounds.3 && inside(px, py) {
                blend_pixel(layer, x, y, color);
            }
        }
    }
}

/// One base quad drawn with `sigma`, then each frame jittered around it by
/// `shake_sigma`.
pub fn perspective_and_shake(clip: &VideoClip, sigma: f64, shake_sigma: f64, fill: [u8; 4], rng: &Rng) -> Result<VideoClip> {
    if !(sigma >= 0.0 && shake_sigma >= 0.0) {
        return Err(Error::invalid("perspective_transform_and_shake", "sigmas must be non-negative"));
    }
    if sigma == 0.0 && shake_sigma == 0.0 {
        return Ok(clip.clone());
    }
    let (w, h) = clip.dims();
    let (base, _) = draw_quad(&corners(w, h), sigma, &mut rng.derive(0))?;
    let shake = rng.derive(1);
    clip.map_frames(false, |i, f| {
        let (quad, _) = draw_quad(&base, shake_sigma, &mut shake.derive(i as u64))?;
        warp_to_quad(f, &quad, fill)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(n: usize, w: u32, h: u32, v: u8) -> VideoClip {
        VideoClip::still(Raster::filled(w, h, Channels::Rgb, [v, v, v, 255]), n, 10.0).unwrap()
    }

    #[test]
    fn stacking_dims() {
        let a = clip(2, 100, 100, 10);
        let b = clip(2, 100, 100, 200);
        let h = stack(&a, &b, true).unwrap();
        assert_eq!((h.len(), h.dims()), (2, (200, 100)));
        assert_eq!(h.frame(0).pixel(150, 50)[0], 200);
        assert_eq!(stack(&a, &b, false).unwrap().dims(), (100, 200));
        assert!(stack(&a, &clip(2, 100, 50, 0), true).is_err());
        assert!(stack(&a, &clip(2, 100, 50, 0), false).is_ok());
    }

    #[test]
    fn blend_endpoints() {
        let a = clip(3, 8, 8, 0);
        let b = clip(1, 4, 4, 200);
        assert_eq!(blend(&a, &b, 0.0).unwrap(), a);
        assert!(blend(&a, &b, 1.0).unwrap().frames().iter().all(|f| f.data().iter().all(|&v| v == 200)));
        assert_eq!(blend(&a, &b, 0.25).unwrap().frame(2).pixel(1, 1)[0], 50);
    }

    #[test]
    fn layers_stay_inside_and_shared() {
        let mut rng = Rng::new(4);
        let dots = dots_layer(32, 16, 5, 0.1, Some([255, 0, 0]), 1.0, &mut rng);
        assert!(dots.data().chunks(4).any(|p| p == [255, 0, 0, 255]));
        let shapes = shapes_layer(32, 16, 4, 0.2, 0.5, 0.5, &mut rng);
        assert!(shapes.data().chunks(4).any(|p| p[3] > 0));
        let c = clip(3, 32, 16, 0);
        let out = apply_layer(&c, &dots).unwrap();
        assert!(Arc::ptr_eq(&out.frames()[0], &out.frames()[2]));
    }

    #[test]
    fn shake_is_seeded() {
        let c = clip(3, 16, 16, 90);
        assert_eq!(perspective_and_shake(&c, 0.0, 0.0, [0; 4], &Rng::new(1)).unwrap(), c);
        let a = perspective_and_shake(&c, 2.0, 1.0, [0; 4], &Rng::new(1)).unwrap();
        let b = perspective_and_shake(&c, 2.0, 1.0, [0; 4], &Rng::new(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.frame(0), a.frame(1));
    }
}
