//! Filters, resampling and the reverberator.

use std::f64::consts::{PI, TAU};

use polyaug_core::{par, Error, Result};

/// Normalized second-order section (`a0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

fn check_freq(op: &str, freq: f64, rate: u32) -> Result<()> {
    if freq > 0.0 && freq < rate as f64 / 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(op, format!("frequency {freq} Hz must lie in (0, {}) Hz", rate as f64 / 2.0)))
    }
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Self { b: [b[0] / a[0], b[1] / a[0], b[2] / a[0]], a: [a[1] / a[0], a[2] / a[0]] }
    }

    pub fn low_pass(cutoff: f64, q: f64, rate: u32) -> Result<Self> {
        check_freq("low_pass_filter", cutoff, rate)?;
        let w0 = TAU * cutoff / rate as f64;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        Ok(Self::normalized([(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0], [1.0 + alpha, -2.0 * cos, 1.0 - alpha]))
    }

    pub fn high_pass(cutoff: f64, q: f64, rate: u32) -> Result<Self> {
        check_freq("high_pass_filter", cutoff, rate)?;
        let w0 = TAU * cutoff / rate as f64;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        Ok(Self::normalized([(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0], [1.0 + alpha, -2.0 * cos, 1.0 - alpha]))
    }

    pub fn peaking(center: f64, q: f64, gain_db: f64, rate: u32) -> Result<Self> {
        check_freq("peaking_equalizer", center, rate)?;
        let amp = 10f64.powf(gain_db / 40.0);
        let w0 = TAU * center / rate as f64;
        let (cos, alpha) = (w0.cos(), w0.sin() / (2.0 * q));
        Ok(Self::normalized(
            [1.0 + alpha * amp, -2.0 * cos, 1.0 - alpha * amp],
            [1.0 + alpha / amp, -2.0 * cos, 1.0 - alpha / amp],
        ))
    }

    /// Direct form I from zero state.
    pub fn run(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = self.b[0] * x0 + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
                (x2, x1, y2, y1) = (x1, x0, y1, y0);
                y0
            })
            .collect()
    }

    /// Magnitude response at `freq`.
    pub fn gain_at(&self, freq: f64, rate: u32) -> f64 {
        use rustfft::num_complex::Complex64;
        let z1 = Complex64::from_polar(1.0, -TAU * freq / rate as f64);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z1 + self.a[1] * z2;
        (num / den).norm()
    }
}

/// Zero crossings of the sinc kernel on each side of the output sample.
pub const SINC_ZERO_CROSSINGS: usize = 16;

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn blackman(u: f64) -> f64 {
    0.42 + 0.5 * (PI * u).cos() + 0.08 * (TAU * u).cos()
}

/// Band-limited interpolation: output sample `n` reads the input at position
/// `n * step` through a Blackman-windowed sinc, low-passed to the output
/// Nyquist when `step > 1`. A unit step copies the input.
pub fn resample(x: &[f64], step: f64, out_len: usize) -> Vec<f64> {
    if step == 1.0 {
        let mut y = x[..x.len().min(out_len)].to_vec();
        y.resize(out_len, 0.0);
        return y;
    }
    let fc = (1.0 / step).min(1.0);
    let half = SINC_ZERO_CROSSINGS as f64 / fc;
    par::map_range(out_len, |n| {
        let t = n as f64 * step;
        let lo = ((t - half).ceil() as isize).max(0);
        let hi = ((t + half).floor() as isize).min(x.len() as isize - 1);
        let mut acc = 0.0;
        for k in lo..=hi {
            let d = t - k as f64;
            acc += x[k as usize] * fc * sinc(fc * d) * blackman(d / half);
        }
        acc
    })
}

/// Sample rate conversion keeping duration.
pub fn resample_rate(x: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to {
        return x.to_vec();
    }
    let out_len = (x.len() as f64 * to as f64 / from as f64).round() as usize;
    resample(x, from as f64 / to as f64, out_len)
}

/// Comb delays in samples at 44.1 kHz.
pub const COMB_DELAYS: [usize; 4] = [1116, 1188, 1277, 1356];
pub const ALLPASS_DELAYS: [usize; 2] = [556, 441];
/// Extra delay for odd channels, decorrelating stereo tails.
pub const STEREO_SPREAD: usize = 23;

/// Schroeder reverberator: four damped feedback combs in parallel into two
/// series allpasses. `room_size` and `damping` are in `[0, 1]`; the output
/// mixes `wet` of the reverb with `1 - wet` of the input and keeps the input
/// length.
pub fn reverb(x: &[f64], rate: u32, channel: usize, room_size: f64, damping: f64, wet: f64) -> Vec<f64> {
    if wet == 0.0 {
        return x.to_vec();
    }
    let scale = rate as f64 / 44_100.0;
    let spread = if channel % 2 == 1 { STEREO_SPREAD } else { 0 };
    let delay = |d: usize| (((d + spread) as f64 * scale).round() as usize).max(1);
    let feedback = 0.7 + 0.28 * room_size;
    let damp = 0.4 * damping;
    let mut tail = vec![0.0; x.len()];
    for &d in &COMB_DELAYS {
        let mut buf = vec![0.0; delay(d)];
        let mut store = 0.0;
        let mut i = 0;
        for (n, &s) in x.iter().enumerate() {
            let out = buf[i];
            store = out * (1.0 - damp) + store * damp;
            buf[i] = s * (1.0 - feedback) + store * feedback;
            i = (i + 1) % buf.len();
            tail[n] += out;
        }
    }
    for &d in &ALLPASS_DELAYS {
        let mut buf = vec![0.0; delay(d)];
        let mut i = 0;
        for s in tail.iter_mut() {
            let delayed = buf[i];
            let out = delayed - *s;
            buf[i] = *s + delayed * 0.5;
            i = (i + 1) % buf.len();
            *s = out;
        }
    }
    x.iter().zip(&tail).map(|(d, t)| (1.0 - wet) * d + wet * t).collect()
}

/// A 1 kHz tone burst whose envelope falls ten octaves over 100 ms.
pub fn click(rate: u32) -> Vec<f64> {
    let n = (0.1 * rate as f64).round().max(1.0) as usize;
    (0..n)
        .map(|i| {
            let env = 2f64.powf(-10.0 * i as f64 / n as f64);
            env * (TAU * 1000.0 * i as f64 / rate as f64).sin()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbj_gains() {
        let lp = Biquad::low_pass(1000.0, std::f64::consts::FRAC_1_SQRT_2, 44_100).unwrap();
        assert!((lp.gain_at(0.0, 44_100) - 1.0).abs() < 1e-12);
        assert!((lp.gain_at(1000.0, 44_100) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        let hp = Biquad::high_pass(1000.0, std::f64::consts::FRAC_1_SQRT_2, 44_100).unwrap();
        assert!(hp.gain_at(0.0, 44_100) < 1e-12);
        let pk = Biquad::peaking(1000.0, 1.0, 6.0, 44_100).unwrap();
        assert!((20.0 * pk.gain_at(1000.0, 44_100).log10() - 6.0).abs() < 1e-9);
        let flat = Biquad::peaking(1000.0, 1.0, 0.0, 44_100).unwrap();
        assert_eq!(flat.b, [1.0, flat.a[0], flat.a[1]]);
        assert!(Biquad::low_pass(30_000.0, 0.7, 44_100).is_err());
        assert!(Biquad::low_pass(0.0, 0.7, 44_100).is_err());
    }

    #[test]
    fn resampling_preserves_a_slow_tone() {
        let x: Vec<f64> = (0..4000).map(|i| (TAU * 100.0 * i as f64 / 8000.0).sin()).collect();
        let y = resample_rate(&x, 8000, 16000);
        assert_eq!(y.len(), 8000);
        for n in (400..7600).step_by(37) {
            let want = (TAU * 100.0 * n as f64 / 16000.0).sin();
            assert!((y[n] - want).abs() < 1e-3, "{n}: {} vs {want}", y[n]);
        }
        assert_eq!(resample(&x, 1.0, 4000), x);
    }

    #[test]
    fn reverb_is_causal_and_dry_when_wet_is_zero() {
        let mut x = vec![0.0; 5000];
        x[0] = 1.0;
        assert_eq!(reverb(&x, 44_100, 0, 0.5, 0.5, 0.0), x);
        let y = reverb(&x, 44_100, 0, 0.5, 0.5, 1.0);
        assert!(y[..COMB_DELAYS[0]].iter().all(|&v| v == 0.0));
        assert!(y[2000..].iter().any(|v| v.abs() > 1e-6));
        assert!(y.iter().all(|v| v.is_finite()));
    }
}
