//! Image loading and lossless saving.
//!
//! Covers may arrive as PNG, BMP or JPEG in any color layout; everything
//! is normalized to 8-bit RGB (gray planes replicate into all three
//! channels). Stego output must survive bit-exactly, so writing refuses
//! lossy extensions.

use crate::error::{io_err, CliError, Result};
use fuzzsteg::RgbImage;
use std::path::Path;

/// Dimension cap; larger inputs are almost certainly a mistake and the
/// similarity pass would take hours.
pub const MAX_DIM: usize = 8192;

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let dynamic = image::open(path).map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    let rgb = dynamic.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w > MAX_DIM || h > MAX_DIM {
        return Err(CliError::Usage(format!(
            "image {} is {w}x{h}; the limit is {MAX_DIM}x{MAX_DIM}",
            path.display()
        )));
    }
    RgbImage::from_raw(w, h, rgb.into_raw())
        .map_err(|e| io_err(&format!("decoding {}", path.display()), e))
}

fn ensure_lossless(path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "png" | "bmp" => Ok(()),
        other => Err(CliError::Usage(format!(
            "refusing to write image with lossy or unknown extension '.{other}' \
             ({}); LSB payloads only survive lossless formats, use .png or .bmp",
            path.display()
        ))),
    }
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    ensure_lossless(path)?;
    let buffer = image::RgbImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.as_raw().to_vec(),
    )
    .expect("dimensions match the buffer");
    buffer
        .save(path)
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

pub fn save_gray(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    ensure_lossless(path)?;
    let buffer = image::GrayImage::from_raw(width as u32, height as u32, pixels.to_vec())
        .expect("dimensions match the buffer");
    buffer
        .save(path)
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))
}
