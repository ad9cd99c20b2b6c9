//! Frame image files on disk.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use tall_core::Frame;

use crate::error::{CliError, Result};

const FRAME_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

/// A frame file whose stem is its numeric index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFile {
    pub index: usize,
    pub path: PathBuf,
}

/// Lists frame images in `dir`, sorted by the numeric value of their file stem.
pub fn list_frames(dir: &Path) -> Result<Vec<FrameFile>> {
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| FRAME_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        if let Some(index) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()) {
            frames.push(FrameFile { index, path });
        }
    }
    frames.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.path.cmp(&b.path)));
    if let Some(w) = frames.windows(2).find(|w| w[0].index == w[1].index) {
        return Err(CliError::config(format!(
            "{} and {} share frame index {}",
            w[0].path.display(),
            w[1].path.display(),
            w[0].index
        )));
    }
    Ok(frames)
}

/// Decodes an image file into a `[0, 1]` frame with 1 or 3 channels.
pub fn load_frame(path: &Path, grayscale: bool) -> Result<Frame> {
    let img = image::open(path).map_err(|source| CliError::Image { path: path.into(), source })?;
    let frame = if grayscale {
        let g = img.into_luma8();
        Frame::from_u8_interleaved(1, g.height() as usize, g.width() as usize, g.as_raw())
    } else {
        let rgb = img.into_rgb8();
        Frame::from_u8_interleaved(3, rgb.height() as usize, rgb.width() as usize, rgb.as_raw())
    };
    Ok(frame?)
}

/// Encodes a frame as 8-bit PNG.
pub fn encode_png(frame: &Frame) -> Result<Vec<u8>> {
    let color = match frame.channels() {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Adaptive)
        .write_image(&frame.to_u8_interleaved(), frame.width() as u32, frame.height() as u32, color)
        .map_err(|source| CliError::Image { path: PathBuf::from("<png>"), source })?;
    Ok(out)
}

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn save_png(path: &Path, frame: &Frame) -> Result<()> {
    write_atomic(path, &encode_png(frame)?)
}
