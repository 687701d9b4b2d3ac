//! Subprocess contract for codecs. The transcoder (`$POLYAUG_TRANSCODER`,
//! default `transcode`) is called as `transcode <media file> <clip dir>` to
//! decode and `transcode <clip dir> <media file>` to encode; it must exit 0
//! and leave a valid clip directory or media file behind.

use std::path::Path;
use std::process::Command;

use polyaug_core::{Error, Result};

pub const ENV_VAR: &str = "POLYAUG_TRANSCODER";
pub const DEFAULT: &str = "transcode";

pub fn program() -> String {
    std::env::var(ENV_VAR).unwrap_or_else(|_| DEFAULT.to_string())
}

fn run(from: &Path, to: &Path) -> Result<()> {
    let prog = program();
    let out = Command::new(&prog)
        .arg(from)
        .arg(to)
        .output()
        .map_err(|e| Error::Format(format!("cannot run transcoder `{prog}`: {e}")))?;
    if !out.status.success() {
        return Err(Error::Format(format!(
            "transcoder `{prog}` failed ({}): {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(())
}

pub fn decode(media: &Path, clip_dir: &Path) -> Result<()> {
    run(media, clip_dir)
}

pub fn encode(clip_dir: &Path, media: &Path) -> Result<()> {
    run(clip_dir, media)
}
