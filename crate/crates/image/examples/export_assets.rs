//! Writes the builtin assets to a directory (default `assets/`).

use std::path::PathBuf;

fn main() -> polyaug_core::Result<()> {
    let dir = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("assets"));
    polyaug_image::AssetStore::builtin().save(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
