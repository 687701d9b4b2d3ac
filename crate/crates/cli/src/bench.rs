//! `polyaug bench`: time every catalog op on a fixed synthetic input.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use polyaug_audio::AudioBuffer;
use polyaug_core::{Rng, TransformSpec};
use polyaug_image::{Channels, Raster};
use polyaug_text::TextDoc;
use polyaug_video::VideoClip;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::modality::{Datum, Envs, Kind};

pub const MIN_ITERATIONS: usize = 5;

/// Input sizes. `standard`: image 1080x1080 RGB, audio 10 s stereo 44.1 kHz,
/// text 1000 chars, video 30 frames 720x720 with 1 s of stereo 44.1 kHz
/// audio. `small` shrinks all of them for smoke runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Standard,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub modality: &'static str,
    pub op: String,
    pub mean_s: f64,
    pub std_s: f64,
    pub iterations: usize,
    pub input: String,
    /// Why the op could not be timed.
    pub skipped: Option<String>,
}

const SENTENCE: &str = "He said she'd bring her brother's camera, but they don't know if it is Tuesday. ";

fn image_input(w: u32, h: u32) -> Raster {
    Raster::from_fn(w, h, Channels::Rgb, |x, y| {
        [(x * 255 / w.max(1)) as u8, (y * 255 / h.max(1)) as u8, ((x ^ y) & 0xff) as u8, 255]
    })
}

fn audio_input(seconds: f64, rate: u32) -> AudioBuffer {
    let n = (seconds * rate as f64).round() as usize;
    let ch = |f1: f64, f2: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / rate as f64;
                0.4 * (2.0 * std::f64::consts::PI * f1 * t).sin() + 0.2 * (2.0 * std::f64::consts::PI * f2 * t).sin()
            })
            .collect()
    };
    AudioBuffer::from_f64(vec![ch(440.0, 1250.0), ch(330.0, 2100.0)], rate).expect("valid synthetic audio")
}

fn text_input(chars: usize) -> TextDoc {
    let s: String = SENTENCE.chars().cycle().take(chars).collect();
    TextDoc::new(s)
}

fn video_input(frames: usize, side: u32, fps: f64, rate: u32) -> VideoClip {
    let rasters = (0..frames)
        .map(|i| Raster::from_fn(side, side, Channels::Rgb, |x, y| [((x + i as u32 * 3) % 256) as u8, (y % 256) as u8, 90, 255]))
        .collect();
    let audio = audio_input(frames as f64 / fps, rate);
    VideoClip::from_rasters(rasters, fps, Some(audio)).expect("valid synthetic clip")
}

/// The benchmark input for a modality and its description.
pub fn input(kind: Kind, preset: Preset) -> (Datum, String) {
    match (kind, preset) {
        (Kind::Image, Preset::Standard) => (Datum::Image(image_input(1080, 1080)), "1080x1080 RGB".into()),
        (Kind::Image, Preset::Small) => (Datum::Image(image_input(96, 96)), "96x96 RGB".into()),
        (Kind::Audio, Preset::Standard) => (Datum::Audio(audio_input(10.0, 44_100)), "10 s stereo 44.1 kHz".into()),
        (Kind::Audio, Preset::Small) => (Datum::Audio(audio_input(0.5, 16_000)), "0.5 s stereo 16 kHz".into()),
        (Kind::Text, Preset::Standard) => (Datum::Text(text_input(1000)), "1000 chars".into()),
        (Kind::Text, Preset::Small) => (Datum::Text(text_input(200)), "200 chars".into()),
        (Kind::Video, Preset::Standard) => (Datum::Video(video_input(30, 720, 30.0, 44_100)), "30 frames 720x720 + audio".into()),
        (Kind::Video, Preset::Small) => (Datum::Video(video_input(6, 48, 30.0, 16_000)), "6 frames 48x48 + audio".into()),
    }
}

/// Files some ops need, kept alive for the duration of a run.
pub struct BenchAssets {
    dir: tempfile::TempDir,
}

impl BenchAssets {
    pub fn create() -> Result<Self> {
        let dir = tempfile::tempdir()?;
        audio_input(1.0, 16_000).save(&dir.path().join("swap.wav"))?;
        Ok(Self { dir })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }
}

/// Default params, except where an op needs a file or a size-relative value.
pub fn spec_for(kind: Kind, op: &str, datum: &Datum, assets: &BenchAssets) -> TransformSpec {
    let side = match datum {
        Datum::Image(r) => r.width().min(r.height()),
        Datum::Video(v) => v.dims().0.min(v.dims().1),
        _ => 0,
    };
    let spec = TransformSpec::new(op);
    match (kind, op) {
        (Kind::Image, "perspective_transform") => spec.with("sigma", side as f64 * 0.05),
        (Kind::Video, "perspective_transform_and_shake") => spec.with("sigma", side as f64 * 0.05).with("shake_sigma", side as f64 * 0.01),
        (Kind::Video, "audio_swap") => spec.with("audio_path", assets.path().join("swap.wav").display().to_string()),
        (Kind::Video, "augment_audio") => spec.with("audio_pipeline", json!([{"op": "change_volume", "params": {"volume_db": -6.0}}])),
        _ => spec,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// One row per catalog op: a warm-up run, then `iterations` timed runs.
/// Rows are sorted by mean, slowest first; skipped rows go last.
pub fn run(kind: Kind, iterations: usize, preset: Preset, envs: &Envs) -> Result<Vec<BenchRow>> {
    if iterations < MIN_ITERATIONS {
        return Err(CliError::Validation(format!("need at least {MIN_ITERATIONS} iterations")));
    }
    let assets = BenchAssets::create()?;
    let (datum, desc) = input(kind, preset);
    let mut rows = Vec::new();
    for op in kind.op_names() {
        let pipeline = polyaug_core::Pipeline::of([spec_for(kind, op, &datum, &assets)]);
        let mut row = BenchRow {
            modality: kind.name(),
            op: op.to_string(),
            mean_s: 0.0,
            std_s: 0.0,
            iterations: 0,
            input: desc.clone(),
            skipped: None,
        };
        if let Err(e) = datum.augment(&pipeline, envs, &Rng::new(0)) {
            row.skipped = Some(e.to_string());
            rows.push(row);
            continue;
        }
        let mut times = Vec::with_capacity(iterations);
        for i in 0..iterations {
            let rng = Rng::new(i as u64 + 1);
            let t = Instant::now();
            let out = datum.augment(&pipeline, envs, &rng);
            let dt = t.elapsed().as_secs_f64();
            if let Err(e) = out {
                row.skipped = Some(e.to_string());
                break;
            }
            times.push(dt.max(f64::MIN_POSITIVE));
        }
        if row.skipped.is_none() {
            (row.mean_s, row.std_s) = mean_std(&times);
            row.iterations = iterations;
        }
        rows.push(row);
    }
    rows.sort_by(|a, b| match (&a.skipped, &b.skipped) {
        (None, None) => b.mean_s.total_cmp(&a.mean_s),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(_), Some(_)) => a.op.cmp(&b.op),
    });
    Ok(rows)
}

pub const CSV_HEADER: [&str; 7] = ["modality", "augmentation", "mean_s", "std_s", "iterations", "input", "skipped"];

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.modality,
            &r.op,
            &format!("{:e}", r.mean_s),
            &format!("{:e}", r.std_s),
            &r.iterations.to_string(),
            &r.input,
            r.skipped.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table.
pub fn format_table(rows: &[BenchRow]) -> String {
    let width = rows.iter().map(|r| r.op.len()).max().unwrap_or(0).max("augmentation".len());
    let mut s = format!("{:<8} {:<width$} {:>12} {:>12} {:>5}\n", "modality", "augmentation", "mean (s)", "std (s)", "iters");
    for r in rows {
        match &r.skipped {
            None => s.push_str(&format!(
                "{:<8} {:<width$} {:>12.3e} {:>12.3e} {:>5}\n",
                r.modality, r.op, r.mean_s, r.std_s, r.iterations
            )),
            Some(why) => s.push_str(&format!("{:<8} {:<width$} skipped: {why}\n", r.modality, r.op)),
        }
    }
    s
}
