use std::io::{Read, Seek, Write};
use std::path::Path;

use polyaug_core::{Error, Result};

/// Planar float PCM. Samples are finite and in `[-1, 1]`; every channel has
/// the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f32>>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Clips samples into `[-1, 1]`; rejects ragged channels, non-finite
    /// samples and a zero rate.
    pub fn new(mut channels: Vec<Vec<f32>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Format("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::Format("audio needs at least one channel".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Format("channels differ in length".into()));
        }
        for c in &mut channels {
            for s in c.iter_mut() {
                if !s.is_finite() {
                    return Err(Error::Format("non-finite sample".into()));
                }
                *s = s.clamp(-1.0, 1.0);
            }
        }
        Ok(Self { channels, sample_rate })
    }

    pub fn from_f64(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        Self::new(channels.into_iter().map(|c| c.into_iter().map(|s| s as f32).collect()).collect(), sample_rate)
    }

    pub fn mono(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn silence(channels: usize, frames: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![vec![0.0; frames]; channels.max(1)], sample_rate)
    }

    /// A sine tone of `amplitude` on every channel.
    pub fn sine(freq: f64, amplitude: f64, seconds: f64, channels: usize, sample_rate: u32) -> Result<Self> {
        let n = (seconds * sample_rate as f64).round() as usize;
        let tone: Vec<f32> = (0..n)
            .map(|i| (amplitude * (std::f64::consts::TAU * freq * i as f64 / sample_rate as f64).sin()) as f32)
            .collect();
        Self::new(vec![tone; channels.max(1)], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, i: usize) -> &[f32] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f32>> {
        self.channels
    }

    pub fn channel_f64(&self, i: usize) -> Vec<f64> {
        self.channels[i].iter().map(|&s| s as f64).collect()
    }

    /// Mean power over all samples.
    pub fn power(&self) -> f64 {
        let n = (self.len() * self.num_channels()).max(1) as f64;
        self.channels.iter().flatten().map(|&s| (s as f64) * (s as f64)).sum::<f64>() / n
    }

    pub fn peak(&self) -> f32 {
        self.channels.iter().flatten().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    /// Truncates or zero-pads every channel to `frames`.
    pub fn fit_length(&self, frames: usize) -> AudioBuffer {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mut c = c[..c.len().min(frames)].to_vec();
                c.resize(frames, 0.0);
                c
            })
            .collect();
        Self { channels, sample_rate: self.sample_rate }
    }

    /// Samples `[start, end)` of every channel; bounds are clamped.
    pub fn slice(&self, start: usize, end: usize) -> AudioBuffer {
        let end = end.min(self.len());
        let start = start.min(end);
        Self { channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(), sample_rate: self.sample_rate }
    }

    /// Interleaved samples, frame-major.
    pub fn interleaved(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.len() * self.num_channels());
        for i in 0..self.len() {
            out.extend(self.channels.iter().map(|c| c[i]));
        }
        out
    }

    pub fn from_interleaved(samples: &[f32], channels: usize, sample_rate: u32) -> Result<Self> {
        if channels == 0 || !samples.len().is_multiple_of(channels) {
            return Err(Error::Format(format!("{} samples do not split into {channels} channels", samples.len())));
        }
        let planar = (0..channels).map(|c| samples.iter().skip(c).step_by(channels).copied().collect()).collect();
        Self::new(planar, sample_rate)
    }

    pub fn read_wav<R: Read>(reader: R) -> Result<Self> {
        let mut wav = hound::WavReader::new(reader).map_err(wav_err)?;
        let spec = wav.spec();
        let samples: Vec<f32> = match spec.sample_format {
            hound::SampleFormat::Float => wav.samples::<f32>().collect::<Result<_, _>>().map_err(wav_err)?,
            hound::SampleFormat::Int => {
                let scale = (1u64 << (spec.bits_per_sample - 1)) as f32;
                wav.samples::<i32>().map(|s| s.map(|v| v as f32 / scale)).collect::<Result<_, _>>().map_err(wav_err)?
            }
        };
        Self::from_interleaved(&samples, spec.channels as usize, spec.sample_rate)
    }

    /// Writes 32-bit float WAV, or 16-bit PCM when `pcm16` is set.
    pub fn write_wav<W: Write + Seek>(&self, writer: W, pcm16: bool) -> Result<()> {
        let spec = hound::WavSpec {
            channels: self.num_channels() as u16,
            sample_rate: self.sample_rate,
            bits_per_sample: if pcm16 { 16 } else { 32 },
            sample_format: if pcm16 { hound::SampleFormat::Int } else { hound::SampleFormat::Float },
        };
        let mut w = hound::WavWriter::new(writer, spec).map_err(wav_err)?;
        for s in self.interleaved() {
            if pcm16 {
                w.write_sample((s * 32767.0).round() as i16).map_err(wav_err)?;
            } else {
                w.write_sample(s).map_err(wav_err)?;
            }
        }
        w.finalize().map_err(wav_err)
    }

    /// Interleaved little-endian f32 with no header.
    pub fn read_raw(bytes: &[u8], channels: usize, sample_rate: u32) -> Result<Self> {
        if !bytes.len().is_multiple_of(4) {
            return Err(Error::Format("raw f32le length is not a multiple of 4".into()));
        }
        let samples: Vec<f32> = bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
        Self::from_interleaved(&samples, channels, sample_rate)
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.interleaved().iter().flat_map(|s| s.to_le_bytes()).collect()
    }

    /// Loads `.wav` files, or raw f32le with a `<file>.json` sidecar holding
    /// `{"sample_rate": .., "channels": ..}`.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
            let f = std::fs::File::open(path)?;
            return Self::read_wav(std::io::BufReader::new(f));
        }
        let sidecar = path.with_extension(format!(
            "{}.json",
            path.extension().and_then(|e| e.to_str()).unwrap_or_default()
        ));
        let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(&sidecar).map_err(|e| {
            Error::Format(format!("{}: raw audio needs a sidecar ({e})", sidecar.display()))
        })?)?;
        let rate = meta["sample_rate"].as_u64().ok_or_else(|| Error::Format("sidecar lacks sample_rate".into()))?;
        let channels = meta["channels"].as_u64().unwrap_or(1);
        Self::read_raw(&std::fs::read(path)?, channels as usize, rate as u32)
    }

    /// Writes WAV (float) for `.wav` paths, otherwise raw f32le plus sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
            let f = std::fs::File::create(path)?;
            return self.write_wav(std::io::BufWriter::new(f), false);
        }
        std::fs::write(path, self.to_raw())?;
        let sidecar = path.with_extension(format!(
            "{}.json",
            path.extension().and_then(|e| e.to_str()).unwrap_or_default()
        ));
        let meta = serde_json::json!({"sample_rate": self.sample_rate, "channels": self.num_channels()});
        std::fs::write(sidecar, meta.to_string())?;
        Ok(())
    }
}

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Format(format!("wav: {other}")),
    }
}
