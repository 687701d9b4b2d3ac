//! Buffer-level audio transforms. Inputs are never mutated; every output is
//! clipped to `[-1, 1]`.

use polyaug_core::{par, Error, Result, Rng};

use crate::buffer::AudioBuffer;
use crate::dsp::{self, Biquad};
use crate::stft::{self, Component};

/// Runs `f` on every channel (in parallel) and rebuilds a clipped buffer.
pub fn map_channels<F>(audio: &AudioBuffer, f: F) -> Result<AudioBuffer>
where
    F: Fn(usize, Vec<f64>) -> Result<Vec<f64>> + Send + Sync,
{
    let idx: Vec<usize> = (0..audio.num_channels()).collect();
    let out = par::try_map(&idx, |_, &c| f(c, audio.channel_f64(c)))?;
    AudioBuffer::from_f64(out, audio.sample_rate())
}

fn window_check(op: &str, audio: &AudioBuffer) -> Result<()> {
    if audio.len() < stft::WINDOW {
        return Err(Error::failed(op, format!("needs at least {} samples, got {}", stft::WINDOW, audio.len())));
    }
    Ok(())
}

/// Shifts pitch by `n_semitones` keeping duration: a phase-vocoder stretch by
/// `2^(-n/12)` read back at the original length.
pub fn pitch_shift(audio: &AudioBuffer, n_semitones: f64) -> Result<AudioBuffer> {
    if n_semitones.abs() > 24.0 {
        return Err(Error::invalid("pitch_shift", "at most 24 semitones either way"));
    }
    window_check("pitch_shift", audio)?;
    let rate = 2f64.powf(-n_semitones / 12.0);
    map_channels(audio, |_, x| {
        let stretched = stft::time_stretch(&x, rate)?;
        Ok(dsp::resample(&stretched, 1.0 / rate, x.len()))
    })
}

/// Changes duration to `len / rate` keeping pitch.
pub fn time_stretch(audio: &AudioBuffer, rate: f64) -> Result<AudioBuffer> {
    window_check("time_stretch", audio)?;
    map_channels(audio, |_, x| stft::time_stretch(&x, rate))
}

pub fn hpss(audio: &AudioBuffer, component: Component, kernel: usize) -> Result<AudioBuffer> {
    window_check(if component == Component::Harmonic { "harmonic" } else { "percussive" }, audio)?;
    map_channels(audio, |_, x| stft::hpss(&x, component, kernel))
}

pub fn filter(audio: &AudioBuffer, biquad: &Biquad) -> Result<AudioBuffer> {
    map_channels(audio, |_, x| Ok(biquad.run(&x)))
}

/// Brings `src` to `n` channels: kept when counts match, otherwise mixed to
/// mono and copied to every channel.
fn match_channels(src: &AudioBuffer, n: usize) -> Vec<Vec<f64>> {
    if src.num_channels() == n {
        return (0..n).map(|c| src.channel_f64(c)).collect();
    }
    let mono = to_mono_samples(src);
    vec![mono; n]
}

fn to_mono_samples(src: &AudioBuffer) -> Vec<f64> {
    let k = src.num_channels() as f64;
    (0..src.len()).map(|i| src.channels().iter().map(|c| c[i] as f64).sum::<f64>() / k).collect()
}

/// Loops or truncates `x` to `len`.
fn loop_to(x: &[f64], len: usize) -> Vec<f64> {
    if x.is_empty() {
        return vec![0.0; len];
    }
    x.iter().cycle().take(len).copied().collect()
}

/// Gaussian white noise, one stream per channel.
pub fn white_noise(channels: usize, len: usize, std_dev: f64, rate: u32, rng: &Rng) -> Result<AudioBuffer> {
    let chans = (0..channels.max(1))
        .map(|c| {
            let mut r = rng.derive(c as u64);
            (0..len).map(|_| r.gaussian(0.0, std_dev)).collect()
        })
        .collect();
    AudioBuffer::from_f64(chans, rate)
}

/// `background` at the audio's rate and channel count, looped to `len`.
fn conform(background: &AudioBuffer, audio: &AudioBuffer, len: Option<usize>) -> Vec<Vec<f64>> {
    match_channels(background, audio.num_channels())
        .into_iter()
        .map(|c| {
            let c = dsp::resample_rate(&c, background.sample_rate(), audio.sample_rate());
            match len {
                Some(n) => loop_to(&c, n),
                None => c,
            }
        })
        .collect()
}

/// The noise that `add_background_noise` sums in, before clipping: looped
/// to the input length and scaled to `snr_db` below the signal power.
pub fn scaled_noise(audio: &AudioBuffer, noise: &AudioBuffer, snr_db: f64) -> Result<Vec<Vec<f64>>> {
    let p_signal = audio.power();
    if p_signal == 0.0 {
        return Err(Error::failed("add_background_noise", "silent input has no defined SNR"));
    }
    let noise = conform(noise, audio, Some(audio.len()));
    let n = (noise.len() * audio.len()).max(1) as f64;
    let p_noise = noise.iter().flatten().map(|s| s * s).sum::<f64>() / n;
    if p_noise == 0.0 {
        return Err(Error::failed("add_background_noise", "silent noise cannot reach the SNR"));
    }
    let gain = (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    Ok(noise.into_iter().map(|c| c.into_iter().map(|s| s * gain).collect()).collect())
}

pub fn add_background_noise(audio: &AudioBuffer, noise: &AudioBuffer, snr_db: f64) -> Result<AudioBuffer> {
    let noise = scaled_noise(audio, noise, snr_db)?;
    map_channels(audio, |c, x| Ok(x.iter().zip(&noise[c]).map(|(a, b)| a + b).collect()))
}

/// Plays the audio `factor` times faster, scaling both duration and pitch.
pub fn speed(audio: &AudioBuffer, factor: f64) -> Result<AudioBuffer> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid("speed", "factor must be positive"));
    }
    let out_len = (audio.len() as f64 / factor).round() as usize;
    map_channels(audio, |_, x| Ok(dsp::resample(&x, factor, out_len)))
}

pub fn reverb(audio: &AudioBuffer, room_size: f64, damping: f64, wet: f64) -> Result<AudioBuffer> {
    let rate = audio.sample_rate();
    map_channels(audio, |c, x| Ok(dsp::reverb(&x, rate, c, room_size, damping, wet)))
}

/// Splices the audio into `background` at `offset_factor` of its length.
pub fn insert_in_background(audio: &AudioBuffer, background: &AudioBuffer, offset_factor: f64) -> Result<AudioBuffer> {
    let bg = conform(background, audio, None);
    let at = (offset_factor.clamp(0.0, 1.0) * bg[0].len() as f64).round() as usize;
    map_channels(audio, |c, x| {
        let mut out = bg[c][..at].to_vec();
        out.extend(x);
        out.extend(&bg[c][at..]);
        Ok(out)
    })
}

pub fn change_volume(audio: &AudioBuffer, volume_db: f64) -> Result<AudioBuffer> {
    if volume_db == 0.0 {
        return Ok(audio.clone());
    }
    let gain = 10f64.powf(volume_db / 20.0);
    map_channels(audio, |_, x| Ok(x.into_iter().map(|s| s * gain).collect()))
}

pub fn to_mono(audio: &AudioBuffer) -> Result<AudioBuffer> {
    if audio.num_channels() == 1 {
        return Ok(audio.clone());
    }
    AudioBuffer::from_f64(vec![to_mono_samples(audio)], audio.sample_rate())
}

/// Scales so the peak magnitude equals `target`; silence is returned as is.
pub fn normalize(audio: &AudioBuffer, target: f64) -> Result<AudioBuffer> {
    let peak = audio.peak() as f64;
    if peak == 0.0 {
        return Ok(audio.clone());
    }
    map_channels(audio, |_, x| Ok(x.into_iter().map(|s| s / peak * target).collect()))
}

/// Adds a click every `interval` seconds starting at zero.
pub fn clicks(audio: &AudioBuffer, interval: f64, amplitude: f64) -> Result<AudioBuffer> {
    if !(interval > 0.0) {
        return Err(Error::invalid("clicks", "interval must be positive"));
    }
    let click = dsp::click(audio.sample_rate());
    let step = interval * audio.sample_rate() as f64;
    map_channels(audio, |_, mut x| {
        let mut k = 0usize;
        loop {
            let start = (k as f64 * step).round() as usize;
            if start >= x.len() {
                break;
            }
            for (s, c) in x[start..].iter_mut().zip(&click) {
                *s += amplitude * c;
            }
            k += 1;
        }
        Ok(x)
    })
}

/// `n` extra repetitions.
pub fn loop_audio(audio: &AudioBuffer, n: usize) -> Result<AudioBuffer> {
    if n == 0 {
        return Ok(audio.clone());
    }
    let channels = audio.channels().iter().map(|c| c.repeat(n + 1)).collect();
    AudioBuffer::new(channels, audio.sample_rate())
}

pub fn invert_channels(audio: &AudioBuffer) -> Result<AudioBuffer> {
    let mut channels = audio.channels().to_vec();
    channels.reverse();
    AudioBuffer::new(channels, audio.sample_rate())
}

/// Samples `[round(offset * len), + round(duration * len))`, cut at the end.
pub fn clip(audio: &AudioBuffer, offset_factor: f64, duration_factor: f64) -> Result<AudioBuffer> {
    let len = audio.len() as f64;
    let start = (offset_factor * len).round() as usize;
    let n = (duration_factor * len).round() as usize;
    let out = audio.slice(start, start.saturating_add(n));
    if out.is_empty() {
        return Err(Error::failed("clip", "excerpt is empty"));
    }
    Ok(out)
}
