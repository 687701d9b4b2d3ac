//! Edits along the time axis. Frame selections carry the matching audio.

use std::sync::Arc;

use polyaug_audio::{ops as audio_ops, AudioBuffer};
use polyaug_audio::dsp::resample_rate;
use polyaug_core::{Error, Result};
use polyaug_image::{geometry, Raster};

use crate::clip::{samples_for, VideoClip};

/// Frames with start times in `[a, b)` seconds.
fn window(clip: &VideoClip, a: f64, b: f64) -> (usize, usize) {
    let n = clip.len();
    let idx = |t: f64| ((t * clip.fps() - 1e-9).ceil().max(0.0) as usize).min(n);
    (idx(a), idx(b).max(idx(a)))
}

/// Audio of the selected frames, concatenated.
fn gather_audio(clip: &VideoClip, picks: &[usize]) -> Option<AudioBuffer> {
    let a = clip.audio()?;
    let r = a.sample_rate();
    let mut chans: Vec<Vec<f32>> = vec![Vec::new(); a.num_channels()];
    for &i in picks {
        let (s, e) = (samples_for(i, clip.fps(), r), samples_for(i + 1, clip.fps(), r));
        let part = a.slice(s, e);
        for (c, p) in chans.iter_mut().zip(part.channels()) {
            c.extend_from_slice(p);
        }
    }
    AudioBuffer::new(chans, r).ok()
}

/// Keeps the listed frames (in order) with their audio.
pub fn select(clip: &VideoClip, picks: &[usize], op: &str) -> Result<VideoClip> {
    if picks.is_empty() {
        return Err(Error::failed(op, "no frames left"));
    }
    let frames = picks.iter().map(|&i| clip.frames()[i].clone()).collect();
    VideoClip::new(frames, clip.fps(), gather_audio(clip, picks))
}

fn span(clip: &VideoClip, start: usize, end: usize, op: &str) -> Result<VideoClip> {
    if start >= end {
        return Err(Error::failed(op, "window holds no frames"));
    }
    let frames = clip.frames()[start..end].to_vec();
    VideoClip::new(frames, clip.fps(), clip.audio_span(start, end))
}

/// Frames in `[offset, offset + duration)` of the clip duration.
pub fn time_crop(clip: &VideoClip, offset_factor: f64, duration_factor: f64) -> Result<VideoClip> {
    if offset_factor < 0.0 || duration_factor <= 0.0 || offset_factor + duration_factor > 1.0 + 1e-9 {
        return Err(Error::invalid("time_crop", "need 0 <= offset, 0 < duration, offset + duration <= 1"));
    }
    let d = clip.duration();
    let (s, e) = window(clip, offset_factor * d, (offset_factor + duration_factor) * d);
    span(clip, s, e, "time_crop")
}

/// Frames starting in `[start_s, end_s)`; a missing end means the clip end.
pub fn trim(clip: &VideoClip, start_s: f64, end_s: Option<f64>) -> Result<VideoClip> {
    let end = end_s.unwrap_or(clip.duration());
    if start_s < 0.0 || end <= start_s {
        return Err(Error::invalid("trim", "need 0 <= start < end"));
    }
    let (s, e) = window(clip, start_s, end);
    span(clip, s, e, "trim")
}

/// `n` extra repetitions of frames and audio.
pub fn loop_clip(clip: &VideoClip, n: usize) -> Result<VideoClip> {
    if n == 0 {
        return Ok(clip.clone());
    }
    let frames = clip.frames().iter().cycle().take(clip.len() * (n + 1)).cloned().collect();
    let audio = clip.audio().map(|a| audio_ops::loop_audio(a, n)).transpose()?;
    VideoClip::new(frames, clip.fps(), audio)
}

/// Alternates `on_s` seconds kept with `off_s` seconds dropped, from t = 0.
pub fn time_decimate(clip: &VideoClip, on_s: f64, off_s: f64) -> Result<VideoClip> {
    if !(on_s > 0.0) || off_s < 0.0 {
        return Err(Error::invalid("time_decimate", "need on > 0 and off >= 0"));
    }
    let period = on_s + off_s;
    let picks: Vec<usize> = (0..clip.len())
        .filter(|&i| {
            let t = i as f64 / clip.fps();
            t - (t / period + 1e-9).floor() * period < on_s - 1e-9
        })
        .collect();
    select(clip, &picks, "time_decimate")
}

/// Nearest-frame resampling to a new rate; duration is kept.
pub fn change_fps(clip: &VideoClip, fps: f64) -> Result<VideoClip> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::invalid("fps", "fps must be positive"));
    }
    if fps == clip.fps() {
        return Ok(clip.clone());
    }
    let n = ((clip.len() as f64 * fps / clip.fps()).round() as usize).max(1);
    let frames = (0..n)
        .map(|i| {
            let src = ((i as f64 * clip.fps() / fps + 1e-9).round() as usize).min(clip.len() - 1);
            clip.frames()[src].clone()
        })
        .collect();
    VideoClip::new(frames, fps, clip.audio().cloned())
}

/// Plays `factor` times faster: frame `i` shows source frame `floor(i * factor)`
/// and the audio is resampled by the same factor.
pub fn change_speed(clip: &VideoClip, factor: f64) -> Result<VideoClip> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid("change_video_speed", "factor must be positive"));
    }
    if factor == 1.0 {
        return Ok(clip.clone());
    }
    let n = ((clip.len() as f64 / factor).round() as usize).max(1);
    let frames = (0..n)
        .map(|i| clip.frames()[((i as f64 * factor + 1e-9).floor() as usize).min(clip.len() - 1)].clone())
        .collect();
    let audio = clip.audio().map(|a| audio_ops::speed(a, factor)).transpose()?;
    VideoClip::new(frames, clip.fps(), audio)
}

/// Delays the content by `offset_factor` of the duration: the front is filled
/// with `color` frames and silence, the tail is dropped.
pub fn shift(clip: &VideoClip, offset_factor: f64, color: [u8; 4]) -> Result<VideoClip> {
    let k = ((offset_factor.clamp(0.0, 1.0) * clip.len() as f64).round() as usize).min(clip.len());
    if k == 0 {
        return Ok(clip.clone());
    }
    let (w, h) = clip.dims();
    let fill = Arc::new(Raster::filled(w, h, clip.channels(), color));
    let mut frames = vec![fill; k];
    frames.extend_from_slice(&clip.frames()[..clip.len() - k]);
    let audio = clip.audio().map(|a| {
        let pad = samples_for(k, clip.fps(), a.sample_rate());
        let chans = a
            .channels()
            .iter()
            .map(|c| {
                let mut v = vec![0.0; pad];
                v.extend_from_slice(&c[..c.len().saturating_sub(pad)]);
                v
            })
            .collect();
        AudioBuffer::new(chans, a.sample_rate())
    });
    VideoClip::new(frames, clip.fps(), audio.transpose()?)
}

/// `other` brought to the dims, channel layout and frame rate of `like`.
pub fn conform(other: &VideoClip, like: &VideoClip) -> Result<VideoClip> {
    let other = change_fps(other, like.fps())?;
    let (w, h) = like.dims();
    let ch = like.channels();
    if other.dims() == (w, h) && other.channels() == ch {
        return Ok(other);
    }
    other.map_frames(true, |_, f| Ok(geometry::ensure_channels(&geometry::resize(f, w, h)?, ch)))
}

/// Audio of `clip` at the given rate and channel count, or silence.
fn audio_like(clip: &VideoClip, rate: u32, channels: usize) -> Result<AudioBuffer> {
    let frames = samples_for(clip.len(), clip.fps(), rate);
    let Some(a) = clip.audio() else {
        return AudioBuffer::silence(channels, frames, rate);
    };
    let chans: Vec<Vec<f64>> = (0..channels)
        .map(|c| {
            let src = if a.num_channels() == channels {
                a.channel_f64(c)
            } else {
                let k = a.num_channels() as f64;
                (0..a.len()).map(|i| a.channels().iter().map(|ch| ch[i] as f64).sum::<f64>() / k).collect()
            };
            resample_rate(&src, a.sample_rate(), rate)
        })
        .collect();
    Ok(AudioBuffer::from_f64(chans, rate)?.fit_length(frames))
}

fn joined_audio(parts: &[&VideoClip]) -> Result<Option<AudioBuffer>> {
    let Some(first) = parts.iter().find_map(|c| c.audio()) else { return Ok(None) };
    let (rate, channels) = (first.sample_rate(), first.num_channels());
    let mut chans = vec![Vec::new(); channels];
    for p in parts {
        let a = audio_like(p, rate, channels)?;
        for (c, src) in chans.iter_mut().zip(a.channels()) {
            c.extend_from_slice(src);
        }
    }
    Ok(Some(AudioBuffer::new(chans, rate)?))
}

/// The clip followed by `others`, each conformed to the first.
pub fn concat(clip: &VideoClip, others: &[VideoClip]) -> Result<VideoClip> {
    let conformed = others.iter().map(|o| conform(o, clip)).collect::<Result<Vec<_>>>()?;
    let parts: Vec<&VideoClip> = std::iter::once(clip).chain(conformed.iter()).collect();
    let frames = parts.iter().flat_map(|p| p.frames().iter().cloned()).collect();
    VideoClip::new(frames, clip.fps(), joined_audio(&parts)?)
}

/// Splices the clip into `background` at `offset_factor` of its length.
pub fn insert_in_background(clip: &VideoClip, background: &VideoClip, offset_factor: f64) -> Result<VideoClip> {
    let bg = conform(background, clip)?;
    let at = (offset_factor.clamp(0.0, 1.0) * bg.len() as f64).round() as usize;
    let head = if at > 0 { Some(span(&bg, 0, at, "insert_in_background")?) } else { None };
    let tail = if at < bg.len() { Some(span(&bg, at, bg.len(), "insert_in_background")?) } else { None };
    let parts: Vec<&VideoClip> = head.iter().chain(std::iter::once(clip)).chain(tail.iter()).collect();
    let frames = parts.iter().flat_map(|p| p.frames().iter().cloned()).collect();
    VideoClip::new(frames, clip.fps(), joined_audio(&parts)?)
}

/// Frame range `[offset, offset + duration)` of the clip length.
pub fn frame_window(n: usize, offset_factor: f64, duration_factor: f64) -> (usize, usize) {
    let s = ((offset_factor.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let e = (((offset_factor + duration_factor).clamp(0.0, 1.0) * n as f64).round() as usize).clamp(s, n);
    (s, e)
}

/// Replaces the frames in a window with frames of `replacement`, looped.
pub fn replace_frames(clip: &VideoClip, replacement: &VideoClip, offset_factor: f64, duration_factor: f64) -> Result<VideoClip> {
    let (s, e) = frame_window(clip.len(), offset_factor, duration_factor);
    if s == e {
        return Ok(clip.clone());
    }
    let rep = conform(replacement, clip)?;
    let mut frames = clip.frames().to_vec();
    for (k, f) in frames[s..e].iter_mut().enumerate() {
        *f = rep.frames()[k % rep.len()].clone();
    }
    clip.with_frames(frames)
}

pub fn replace_with_color_frames(clip: &VideoClip, offset_factor: f64, duration_factor: f64, color: [u8; 4]) -> Result<VideoClip> {
    let (w, h) = clip.dims();
    let still = VideoClip::still(Raster::filled(w, h, clip.channels(), color), 1, clip.fps())?;
    replace_frames(clip, &still, offset_factor, duration_factor)
}
