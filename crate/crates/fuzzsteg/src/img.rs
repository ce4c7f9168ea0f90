//! Owned 8-bit RGB image buffer.
//!
//! Interleaved row-major storage; the stego codec addresses samples in
//! channel-major order independently of the storage layout.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageError {
    #[error("buffer length {len} does not match {width}x{height}x3")]
    BadBufferLength { len: usize, width: usize, height: usize },
    #[error("image dimensions {0}x{1} are empty")]
    EmptyImage(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage(width, height));
        }
        if data.len() != width * height * 3 {
            return Err(ImageError::BadBufferLength {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Solid-color image.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self::from_raw(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// One channel sample; `channel` is 0 (R), 1 (G) or 2 (B).
    #[inline]
    pub fn sample(&self, channel: usize, y: usize, x: usize) -> u8 {
        self.data[(y * self.width + x) * 3 + channel]
    }

    #[inline]
    pub fn set_sample(&mut self, channel: usize, y: usize, x: usize, value: u8) {
        self.data[(y * self.width + x) * 3 + channel] = value;
    }

    /// Pixel at clamped coordinates: out-of-range indices replicate the
    /// nearest edge pixel.
    #[inline]
    pub fn pixel_clamped(&self, y: isize, x: isize) -> [u8; 3] {
        let y = y.clamp(0, self.height as isize - 1) as usize;
        let x = x.clamp(0, self.width as isize - 1) as usize;
        self.pixel(y, x)
    }
}
