//! Modality dispatch: loading, saving and augmenting any supported datum.

use std::path::Path;
use std::sync::Arc;

use clap::ValueEnum;
use polyaug_audio::{AudioBuffer, AudioEnv};
use polyaug_core::{Pipeline, Rng, TransformMetadata};
use polyaug_image::{AssetStore, ImageEnv, Raster};
use polyaug_text::{TextDoc, TextEnv};
use polyaug_video::{VideoClip, VideoEnv};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Kind {
    Audio,
    Image,
    Text,
    Video,
}

const IMAGE_EXT: [&str; 3] = ["png", "jpg", "jpeg"];
const AUDIO_EXT: [&str; 1] = ["wav"];
const TEXT_EXT: [&str; 1] = ["txt"];
/// Containers handed to the external transcoder.
const MEDIA_EXT: [&str; 6] = ["mp4", "mov", "avi", "mkv", "webm", "gif"];

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Audio, Kind::Image, Kind::Text, Kind::Video];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Audio => "audio",
            Kind::Image => "image",
            Kind::Text => "text",
            Kind::Video => "video",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Validation(format!("unknown modality `{s}`")))
    }

    pub fn op_names(self) -> Vec<&'static str> {
        match self {
            Kind::Audio => polyaug_audio::catalog().names().collect(),
            Kind::Image => polyaug_image::catalog().names().collect(),
            Kind::Text => polyaug_text::catalog().names().collect(),
            Kind::Video => polyaug_video::catalog().names().collect(),
        }
    }

    /// Clip directories are video; otherwise the extension decides. Raw
    /// audio needs its `<file>.json` sidecar.
    pub fn infer(path: &Path) -> Result<Kind> {
        if path.is_dir() {
            return if path.join(polyaug_video::clip::MANIFEST).is_file() {
                Ok(Kind::Video)
            } else {
                Err(CliError::Validation(format!("{}: directory is not a clip directory", path.display())))
            };
        }
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
        let ext = ext.as_str();
        if IMAGE_EXT.contains(&ext) {
            Ok(Kind::Image)
        } else if AUDIO_EXT.contains(&ext) || sidecar(path).is_file() {
            Ok(Kind::Audio)
        } else if TEXT_EXT.contains(&ext) {
            Ok(Kind::Text)
        } else if MEDIA_EXT.contains(&ext) {
            Ok(Kind::Video)
        } else {
            Err(CliError::Validation(format!("{}: cannot infer modality from the file name", path.display())))
        }
    }
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Envs for every modality, built once per run.
#[derive(Clone)]
pub struct Envs {
    pub image: ImageEnv,
    pub audio: AudioEnv,
    pub text: TextEnv,
    pub video: VideoEnv,
}

impl Default for Envs {
    fn default() -> Self {
        Self::with_assets(Arc::new(AssetStore::builtin()))
    }
}

impl Envs {
    pub fn with_assets(assets: Arc<AssetStore>) -> Self {
        let image = ImageEnv::new(assets);
        let audio = AudioEnv::default();
        Self { video: VideoEnv::new(image.clone(), audio.clone()), image, audio, text: TextEnv::default() }
    }

    /// Honors the asset directory override in the environment.
    pub fn from_env() -> Result<Self> {
        Ok(Self::with_assets(AssetStore::from_env()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    Audio(AudioBuffer),
    Image(Raster),
    Text(TextDoc),
    Video(VideoClip),
}

impl Datum {
    pub fn kind(&self) -> Kind {
        match self {
            Datum::Audio(_) => Kind::Audio,
            Datum::Image(_) => Kind::Image,
            Datum::Text(_) => Kind::Text,
            Datum::Video(_) => Kind::Video,
        }
    }

    pub fn load(kind: Kind, path: &Path) -> Result<Datum> {
        Ok(match kind {
            Kind::Audio => Datum::Audio(AudioBuffer::load(path)?),
            Kind::Image => Datum::Image(Raster::load(path)?),
            Kind::Text => Datum::Text(TextDoc::new(std::fs::read_to_string(path)?)),
            Kind::Video => Datum::Video(VideoClip::open(path)?),
        })
    }

    /// Video goes to a clip directory unless `path` has a media extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            Datum::Audio(a) => a.save(path)?,
            Datum::Image(r) => r.save(path)?,
            Datum::Text(t) => std::fs::write(path, t.as_str())?,
            Datum::Video(v) => {
                let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
                match ext {
                    Some(e) if MEDIA_EXT.contains(&e.as_str()) => v.write(path)?,
                    _ => v.save(path)?,
                }
            }
        }
        Ok(())
    }

    /// Runs `pipeline` through the matching catalog.
    pub fn augment(&self, pipeline: &Pipeline, envs: &Envs, rng: &Rng) -> Result<(Datum, Vec<TransformMetadata>)> {
        Ok(match self {
            Datum::Audio(a) => {
                let (o, m) = polyaug_audio::augmenter(&envs.audio).compose(pipeline, a, rng)?;
                (Datum::Audio(o), m)
            }
            Datum::Image(r) => {
                let (o, m) = polyaug_image::augmenter(&envs.image).compose(pipeline, r, rng)?;
                (Datum::Image(o), m)
            }
            Datum::Text(t) => {
                let (o, m) = polyaug_text::augmenter(&envs.text).compose(pipeline, t, rng)?;
                (Datum::Text(o), m)
            }
            Datum::Video(v) => {
                let (o, m) = polyaug_video::augmenter(&envs.video).compose(pipeline, v, rng)?;
                (Datum::Video(o), m)
            }
        })
    }
}

/// Checks a pipeline against one modality's catalog without running it.
pub fn validate(kind: Kind, pipeline: &Pipeline, envs: &Envs) -> Result<()> {
    match kind {
        Kind::Audio => polyaug_audio::augmenter(&envs.audio).validate(pipeline)?,
        Kind::Image => polyaug_image::augmenter(&envs.image).validate(pipeline)?,
        Kind::Text => polyaug_text::augmenter(&envs.text).validate(pipeline)?,
        Kind::Video => polyaug_video::augmenter(&envs.video).validate(pipeline)?,
    }
    Ok(())
}
