use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyaug_audio::AudioBuffer;
use polyaug_core::{par, Error, Result};
use polyaug_image::{Channels, Raster};
use serde::{Deserialize, Serialize};

/// Frames plus an optional soundtrack. Frames share dims and channel layout;
/// they are reference counted so temporal edits do not copy pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    frames: Vec<Arc<Raster>>,
    fps: f64,
    audio: Option<AudioBuffer>,
}

/// Audio samples that span `frames` frames.
pub fn samples_for(frames: usize, fps: f64, rate: u32) -> usize {
    (frames as f64 / fps * rate as f64).round() as usize
}

impl VideoClip {
    /// Validates the frames and truncates or silence-pads the audio to the
    /// frame duration.
    pub fn new(frames: Vec<Arc<Raster>>, fps: f64, audio: Option<AudioBuffer>) -> Result<Self> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::Format(format!("fps must be positive, got {fps}")));
        }
        let first = frames.first().ok_or_else(|| Error::Format("a clip needs at least one frame".into()))?;
        let (dims, channels) = (first.dims(), first.channels());
        if let Some(i) = frames.iter().position(|f| f.dims() != dims || f.channels() != channels) {
            return Err(Error::Format(format!("frame {i} differs in size or channels from frame 0")));
        }
        let audio = audio.map(|a| {
            let want = samples_for(frames.len(), fps, a.sample_rate());
            if a.len() == want {
                a
            } else {
                a.fit_length(want)
            }
        });
        Ok(Self { frames, fps, audio })
    }

    pub fn from_rasters(frames: Vec<Raster>, fps: f64, audio: Option<AudioBuffer>) -> Result<Self> {
        Self::new(frames.into_iter().map(Arc::new).collect(), fps, audio)
    }

    /// `n` copies of one image.
    pub fn still(image: Raster, n: usize, fps: f64) -> Result<Self> {
        let frame = Arc::new(image);
        Self::new(vec![frame; n.max(1)], fps, None)
    }

    pub fn frames(&self) -> &[Arc<Raster>] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &Raster {
        &self.frames[i]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn dims(&self) -> (u32, u32) {
        self.frames[0].dims()
    }

    pub fn channels(&self) -> Channels {
        self.frames[0].channels()
    }

    pub fn audio(&self) -> Option<&AudioBuffer> {
        self.audio.as_ref()
    }

    pub fn with_audio(&self, audio: Option<AudioBuffer>) -> Result<Self> {
        Self::new(self.frames.clone(), self.fps, audio)
    }

    pub fn with_frames(&self, frames: Vec<Arc<Raster>>) -> Result<Self> {
        Self::new(frames, self.fps, self.audio.clone())
    }

    /// Applies `f` to every frame in parallel. Runs of the same shared frame
    /// are transformed once when `f` is deterministic per frame content,
    /// which the caller signals with `dedup`.
    pub fn map_frames<F>(&self, dedup: bool, f: F) -> Result<Self>
    where
        F: Fn(usize, &Raster) -> Result<Raster> + Send + Sync,
    {
        let leaders: Vec<usize> = (0..self.len())
            .filter(|&i| !dedup || i == 0 || !Arc::ptr_eq(&self.frames[i], &self.frames[i - 1]))
            .collect();
        let done = par::try_map(&leaders, |_, &i| f(i, &self.frames[i]).map(Arc::new))?;
        let mut out = Vec::with_capacity(self.len());
        let mut k = 0;
        for i in 0..self.len() {
            if k < leaders.len() && leaders[k] == i {
                out.push(done[k].clone());
                k += 1;
            } else {
                out.push(out[i - 1].clone());
            }
        }
        self.with_frames(out)
    }

    /// Audio samples of frames `[start, end)`.
    pub fn audio_span(&self, start: usize, end: usize) -> Option<AudioBuffer> {
        self.audio.as_ref().map(|a| {
            let r = a.sample_rate();
            a.slice(samples_for(start, self.fps, r), samples_for(end, self.fps, r))
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        ClipReader::open(dir)?.read_all()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut w = ClipWriter::create(dir, self.fps)?;
        for f in &self.frames {
            w.push(f)?;
        }
        w.finish(self.audio.as_ref())
    }

    /// Clip directories are read directly; any other path goes through the
    /// external transcoder.
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_dir() {
            return Self::load(path);
        }
        let tmp = tempfile::tempdir()?;
        crate::bridge::decode(path, tmp.path())?;
        Self::load(tmp.path())
    }

    /// Writes a clip directory, or encodes through the transcoder when the
    /// path has a file extension.
    pub fn write(&self, path: &Path) -> Result<()> {
        if path.extension().is_none() {
            return self.save(path);
        }
        let tmp = tempfile::tempdir()?;
        self.save(tmp.path())?;
        crate::bridge::encode(tmp.path(), path)
    }
}

pub const FORMAT: &str = "polyaug-clip";
pub const MANIFEST: &str = "manifest.json";
pub const FRAMES_DIR: &str = "frames";
pub const AUDIO_FILE: &str = "audio.f32le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioManifest {
    pub sample_rate: u32,
    pub channels: usize,
    pub samples: usize,
}

/// `manifest.json` of a clip directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub fps: f64,
    pub frame_count: usize,
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub audio: Option<AudioManifest>,
}

pub fn frame_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(FRAMES_DIR).join(format!("{i:06}.png"))
}

/// Lazy access to a clip directory, one frame at a time.
pub struct ClipReader {
    dir: PathBuf,
    manifest: Manifest,
}

impl ClipReader {
    pub fn open(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| Error::Format(format!("{}: not a clip directory ({e})", dir.display())))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format != FORMAT {
            return Err(Error::Format(format!("unknown clip format `{}`", manifest.format)));
        }
        Ok(Self { dir: dir.to_path_buf(), manifest })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn frame(&self, i: usize) -> Result<Raster> {
        let f = Raster::load(frame_path(&self.dir, i))?;
        if f.dims() != (self.manifest.width, self.manifest.height) || f.channel_count() != self.manifest.channels {
            return Err(Error::Format(format!("frame {i} does not match the manifest")));
        }
        Ok(f)
    }

    pub fn frames(&self) -> impl Iterator<Item = Result<Raster>> + '_ {
        (0..self.manifest.frame_count).map(|i| self.frame(i))
    }

    pub fn audio(&self) -> Result<Option<AudioBuffer>> {
        let Some(a) = &self.manifest.audio else { return Ok(None) };
        let bytes = std::fs::read(self.dir.join(AUDIO_FILE))?;
        let buf = AudioBuffer::read_raw(&bytes, a.channels, a.sample_rate)?;
        if buf.len() != a.samples {
            return Err(Error::Format("audio length does not match the manifest".into()));
        }
        Ok(Some(buf))
    }

    pub fn read_all(&self) -> Result<VideoClip> {
        let idx: Vec<usize> = (0..self.manifest.frame_count).collect();
        let frames = par::try_map(&idx, |_, &i| self.frame(i).map(Arc::new))?;
        VideoClip::new(frames, self.manifest.fps, self.audio()?)
    }
}

/// Streams frames into a clip directory; the manifest is written last.
pub struct ClipWriter {
    dir: PathBuf,
    fps: f64,
    count: usize,
    shape: Option<((u32, u32), usize)>,
}

impl ClipWriter {
    pub fn create(dir: &Path, fps: f64) -> Result<Self> {
        std::fs::create_dir_all(dir.join(FRAMES_DIR))?;
        Ok(Self { dir: dir.to_path_buf(), fps, count: 0, shape: None })
    }

    pub fn push(&mut self, frame: &Raster) -> Result<()> {
        let shape = (frame.dims(), frame.channel_count());
        if *self.shape.get_or_insert(shape) != shape {
            return Err(Error::Format(format!("frame {} differs in size from frame 0", self.count)));
        }
        std::fs::write(frame_path(&self.dir, self.count), frame.encode_png()?)?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(self, audio: Option<&AudioBuffer>) -> Result<()> {
        let ((width, height), channels) = self.shape.ok_or_else(|| Error::Format("no frames written".into()))?;
        let audio_path = self.dir.join(AUDIO_FILE);
        let audio = match audio {
            Some(a) => {
                let a = a.fit_length(samples_for(self.count, self.fps, a.sample_rate()));
                std::fs::write(&audio_path, a.to_raw())?;
                Some(AudioManifest { sample_rate: a.sample_rate(), channels: a.num_channels(), samples: a.len() })
            }
            None => {
                if audio_path.exists() {
                    std::fs::remove_file(&audio_path)?;
                }
                None
            }
        };
        let manifest = Manifest {
            format: FORMAT.into(),
            version: 1,
            fps: self.fps,
            frame_count: self.count,
            width,
            height,
            channels,
            audio,
        };
        std::fs::write(self.dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

/// Streams `f` over the frames of a clip directory into another, holding one
/// frame at a time. The soundtrack is copied.
pub fn map_dir<F>(input: &Path, output: &Path, mut f: F) -> Result<()>
where
    F: FnMut(usize, Raster) -> Result<Raster>,
{
    let reader = ClipReader::open(input)?;
    let mut writer = ClipWriter::create(output, reader.manifest().fps)?;
    for (i, frame) in reader.frames().enumerate() {
        writer.push(&f(i, frame?)?)?;
    }
    writer.finish(reader.audio()?.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize) -> Vec<Raster> {
        (0..n).map(|i| Raster::filled(4, 3, Channels::Rgb, [i as u8 * 10, 0, 0, 255])).collect()
    }

    #[test]
    fn audio_is_fitted_to_frames() {
        let audio = AudioBuffer::silence(2, 100, 1000).unwrap();
        let clip = VideoClip::from_rasters(frames(5), 10.0, Some(audio)).unwrap();
        assert_eq!(clip.audio().unwrap().len(), 500);
        assert!((clip.audio().unwrap().duration() - clip.duration()).abs() <= 1.0 / clip.fps());
    }

    #[test]
    fn rejects_bad_clips() {
        assert!(VideoClip::from_rasters(vec![], 10.0, None).is_err());
        assert!(VideoClip::from_rasters(frames(2), 0.0, None).is_err());
        let mut f = frames(2);
        f.push(Raster::filled(5, 3, Channels::Rgb, [0; 4]));
        assert!(VideoClip::from_rasters(f, 10.0, None).is_err());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let audio = AudioBuffer::sine(440.0, 0.3, 0.3, 2, 8000).unwrap();
        let clip = VideoClip::from_rasters(frames(3), 10.0, Some(audio)).unwrap();
        clip.save(dir.path()).unwrap();
        assert!(frame_path(dir.path(), 2).exists());
        assert_eq!(VideoClip::load(dir.path()).unwrap(), clip);
        let m = ClipReader::open(dir.path()).unwrap().manifest().clone();
        assert_eq!((m.frame_count, m.width, m.height, m.channels), (3, 4, 3, 3));
        assert_eq!(m.audio.unwrap().samples, 2400);
    }

    #[test]
    fn map_frames_dedups_shared_frames() {
        let clip = VideoClip::still(Raster::filled(2, 2, Channels::Rgb, [1, 2, 3, 255]), 4, 5.0).unwrap();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let out = clip
            .map_frames(true, |_, f| {
                calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                Ok(polyaug_image::geometry::hflip(f))
            })
            .unwrap();
        assert_eq!(calls.into_inner(), 1);
        assert_eq!(out.len(), 4);
    }
}
