//! Short-time Fourier transform with a periodic Hann window, centered frames
//! and zero padding, plus the phase vocoder and median-filter HPSS built on it.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use polyaug_core::{par, Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub const WINDOW: usize = 2048;
pub const HOP: usize = 512;
pub const HPSS_KERNEL: usize = 17;

pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos()).collect()
}

/// Frame-major spectra with `window / 2 + 1` bins per frame.
#[derive(Debug, Clone)]
pub struct Stft {
    pub window_size: usize,
    pub hop: usize,
    pub frames: Vec<Vec<Complex64>>,
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

impl Stft {
    /// Errors when the signal is shorter than one window.
    pub fn forward(x: &[f64], window_size: usize, hop: usize) -> Result<Self> {
        if window_size < 2 || hop == 0 || hop > window_size {
            return Err(Error::invalid("stft", "need 0 < hop <= window and window >= 2"));
        }
        if x.len() < window_size {
            return Err(Error::failed("stft", format!("signal of {} samples is shorter than one window", x.len())));
        }
        let pad = window_size / 2;
        let n_frames = 1 + x.len() / hop;
        let win = hann(window_size);
        let fft = plan(window_size, false);
        let bins = window_size / 2 + 1;
        let frames = par::map_range(n_frames, |f| {
            let start = (f * hop) as isize - pad as isize;
            let mut buf: Vec<Complex64> = (0..window_size)
                .map(|i| {
                    let j = start + i as isize;
                    let s = if j >= 0 && (j as usize) < x.len() { x[j as usize] } else { 0.0 };
                    Complex64::new(s * win[i], 0.0)
                })
                .collect();
            fft.process(&mut buf);
            buf.truncate(bins);
            buf
        });
        Ok(Self { window_size, hop, frames })
    }

    pub fn bins(&self) -> usize {
        self.window_size / 2 + 1
    }

    pub fn with_frames(&self, frames: Vec<Vec<Complex64>>) -> Self {
        Self { window_size: self.window_size, hop: self.hop, frames }
    }

    /// Weighted overlap-add inverse, normalized by the summed squared window.
    /// Returns exactly `len` samples; samples beyond the frames are zero.
    pub fn inverse(&self, len: usize) -> Vec<f64> {
        let n = self.window_size;
        let pad = n / 2;
        let win = hann(n);
        let ifft = plan(n, true);
        let bins = self.bins();
        let chunks: Vec<Vec<f64>> = par::map(&self.frames, |_, spec| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            buf[..bins].copy_from_slice(&spec[..bins]);
            for k in 1..n - bins + 1 {
                buf[n - k] = spec[k].conj();
            }
            buf[0].im = 0.0;
            if n.is_multiple_of(2) {
                buf[n / 2].im = 0.0;
            }
            ifft.process(&mut buf);
            buf.iter().zip(&win).map(|(c, w)| c.re / n as f64 * w).collect()
        });
        let total = (self.frames.len().saturating_sub(1)) * self.hop + n;
        let mut out = vec![0.0; total.max(len + pad)];
        let mut norm = vec![0.0; out.len()];
        for (f, chunk) in chunks.iter().enumerate() {
            let start = f * self.hop;
            for (i, v) in chunk.iter().enumerate() {
                out[start + i] += v;
                norm[start + i] += win[i] * win[i];
            }
        }
        (0..len)
            .map(|i| {
                let j = i + pad;
                if norm[j] > 1e-10 {
                    out[j] / norm[j]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn wrap_phase(p: f64) -> f64 {
    p - TAU * ((p + PI) / TAU).floor()
}

/// Phase-vocoder time scaling: reads the input frames at steps of `rate`,
/// interpolating magnitudes and propagating phase from the measured
/// per-bin frequency.
pub fn phase_vocoder(stft: &Stft, rate: f64) -> Stft {
    let bins = stft.bins();
    let n_in = stft.frames.len();
    let advance: Vec<f64> = (0..bins).map(|k| TAU * stft.hop as f64 * k as f64 / stft.window_size as f64).collect();
    let zero = vec![Complex64::new(0.0, 0.0); bins];
    let frame = |i: usize| if i < n_in { &stft.frames[i] } else { &zero };
    let mut phase: Vec<f64> = stft.frames[0].iter().map(|c| c.arg()).collect();
    let mut out = Vec::new();
    let mut t = 0.0f64;
    while t < n_in as f64 {
        let c = t.floor() as usize;
        let alpha = t - c as f64;
        let (a, b) = (frame(c), frame(c + 1));
        let spec: Vec<Complex64> = (0..bins)
            .map(|k| {
                let mag = (1.0 - alpha) * a[k].norm() + alpha * b[k].norm();
                Complex64::from_polar(mag, phase[k])
            })
            .collect();
        out.push(spec);
        for k in 0..bins {
            let dphase = wrap_phase(b[k].arg() - a[k].arg() - advance[k]);
            phase[k] += advance[k] + dphase;
        }
        t += rate;
    }
    stft.with_frames(out)
}

/// Time-scales one channel by `1 / rate` without changing pitch; the output
/// has `round(len / rate)` samples.
pub fn time_stretch(x: &[f64], rate: f64) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("time_stretch", "rate must be positive"));
    }
    let stft = Stft::forward(x, WINDOW, HOP)?;
    let out_len = (x.len() as f64 / rate).round() as usize;
    Ok(phase_vocoder(&stft, rate).inverse(out_len))
}

/// Median of `v` (odd or even length: the upper median for even).
fn median(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    *v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b)).1
}

/// Harmonic and percussive soft masks from median-filtered magnitudes; for
/// every bin the two masks sum to one.
pub fn hpss_masks(stft: &Stft, kernel: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n_frames = stft.frames.len();
    let bins = stft.bins();
    let half = kernel as isize / 2;
    let mag: Vec<Vec<f64>> = stft.frames.iter().map(|f| f.iter().map(|c| c.norm()).collect()).collect();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let masks: Vec<(Vec<f64>, Vec<f64>)> = par::map_range(n_frames, |t| {
        let mut window = Vec::with_capacity(kernel);
        let mut h_mask = Vec::with_capacity(bins);
        let mut p_mask = Vec::with_capacity(bins);
        for k in 0..bins {
            window.clear();
            window.extend((-half..=half).map(|d| mag[clamp(t as isize + d, n_frames)][k]));
            let h = median(&mut window);
            window.clear();
            window.extend((-half..=half).map(|d| mag[t][clamp(k as isize + d, bins)]));
            let p = median(&mut window);
            let (h2, p2) = (h * h, p * p);
            let mh = if h2 + p2 > 0.0 { h2 / (h2 + p2) } else { 0.5 };
            h_mask.push(mh);
            p_mask.push(1.0 - mh);
        }
        (h_mask, p_mask)
    });
    masks.into_iter().unzip()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Harmonic,
    Percussive,
}

/// Keeps one component of a median-filter harmonic/percussive separation.
pub fn hpss(x: &[f64], component: Component, kernel: usize) -> Result<Vec<f64>> {
    let stft = Stft::forward(x, WINDOW, HOP)?;
    let (h, p) = hpss_masks(&stft, kernel);
    let mask = if component == Component::Harmonic { h } else { p };
    let frames = stft
        .frames
        .iter()
        .zip(&mask)
        .map(|(f, m)| f.iter().zip(m).map(|(c, w)| c * w).collect())
        .collect();
    Ok(stft.with_frames(frames).inverse(x.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyaug_core::Rng;

    fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
        (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
    }

    #[test]
    fn round_trip_is_exact_enough() {
        let mut rng = Rng::new(7);
        let x: Vec<f64> = (0..10_000).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let stft = Stft::forward(&x, WINDOW, HOP).unwrap();
        assert_eq!(stft.frames.len(), 1 + x.len() / HOP);
        assert!(rms_diff(&stft.inverse(x.len()), &x) < 1e-6);
    }

    #[test]
    fn short_signal_is_an_error() {
        assert!(Stft::forward(&[0.0; 100], WINDOW, HOP).is_err());
    }

    #[test]
    fn unit_rate_vocoder_is_near_identity() {
        let x: Vec<f64> = (0..20_000).map(|i| (i as f64 * 0.05).sin() * 0.5).collect();
        let y = time_stretch(&x, 1.0).unwrap();
        assert_eq!(y.len(), x.len());
        assert!(rms_diff(&x, &y) < 1e-3);
    }

    #[test]
    fn masks_partition_unity() {
        let mut rng = Rng::new(3);
        let x: Vec<f64> = (0..8192).map(|_| rng.gaussian(0.0, 0.3)).collect();
        let stft = Stft::forward(&x, WINDOW, HOP).unwrap();
        let (h, p) = hpss_masks(&stft, HPSS_KERNEL);
        for (hf, pf) in h.iter().zip(&p) {
            for (a, b) in hf.iter().zip(pf) {
                assert_eq!(a + b, 1.0);
            }
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [5.0]), 5.0);
    }
}
