//! Similarity-gated k-bit LSB embedding and the sidecar key.
//!
//! Thresholding a similarity map gives an indicator matrix: the pixels
//! allowed to carry payload. Embedding walks the image channel-major
//! (all R samples row by row, then G, then B) and replaces the k least
//! significant bits of each selected sample with the next k message bits,
//! first-consumed bit in the most significant replaced position. The
//! extractor needs the indicator matrix, k and the message length; those
//! travel in a small binary sidecar ("stego key") with a CRC-32 footer
//! rather than inside the image, which would disturb the very similarity
//! map the indicator came from.

use crate::img::RgbImage;
use crate::similarity::{SimilarityMap, SimilarityMethod};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StegoError {
    #[error("message needs {required} bits but the indicator matrix at k = {k} only offers {available}")]
    MessageTooLong {
        required: usize,
        available: usize,
        k: u8,
    },
    #[error("shape mismatch: image is {img_w}x{img_h}, indicator is {ind_w}x{ind_h}")]
    ShapeMismatch {
        img_w: usize,
        img_h: usize,
        ind_w: usize,
        ind_h: usize,
    },
    #[error("bits per sample must be in 1..=8, got {0}")]
    BadBitDepth(u8),
    #[error("threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("message length {bits} bits exceeds the provided buffer of {have} bits")]
    MessageBufferTooShort { bits: usize, have: usize },
    #[error("key data truncated: need {need} bytes, got {got}")]
    Truncated { need: usize, got: usize },
    #[error("{extra} unexpected bytes after the key payload")]
    TrailingData { extra: usize },
    #[error("bad magic; not a stego key file")]
    BadMagic,
    #[error("unsupported key version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown similarity method id {0}")]
    BadMethodId(u8),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("key invariant violated: message of {bits} bits exceeds capacity {capacity}")]
    KeyOverCapacity { bits: u64, capacity: u64 },
}

/// Binary mask of embeddable pixels, one bit per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorMatrix {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl IndicatorMatrix {
    /// Thresholds a similarity map: a pixel is selected when its similarity
    /// reaches `th` (boundary inclusive).
    pub fn from_map(map: &SimilarityMap, th: f64) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            bits: map.values().iter().map(|&v| v >= th).collect(),
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height);
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Exact payload room: three channels, k bits each per selected pixel.
    pub fn capacity_bits(&self, k: u8) -> usize {
        3 * k as usize * self.ones()
    }

    /// Hidden-to-total bit ratio as a percentage: `100 k ones / (8 H W)`.
    pub fn capacity_percent(&self, k: u8) -> f64 {
        100.0 * k as f64 * self.ones() as f64 / (8.0 * (self.width * self.height) as f64)
    }

    /// Row-major bit packing, most significant bit first within each byte.
    pub fn pack(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &bit) in self.bits.iter().enumerate() {
            if bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn unpack(width: usize, height: usize, bytes: &[u8]) -> Result<Self, StegoError> {
        let need = (width * height).div_ceil(8);
        if bytes.len() < need {
            return Err(StegoError::Truncated {
                need,
                got: bytes.len(),
            });
        }
        let bits = (0..width * height)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Ok(Self {
            width,
            height,
            bits,
        })
    }
}

/// Embedding parameters: bit depth, threshold and the similarity measure
/// the indicator came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub k: u8,
    pub th: f64,
    pub method: SimilarityMethod,
}

impl EmbedConfig {
    pub fn new(k: u8, th: f64, method: SimilarityMethod) -> Result<Self, StegoError> {
        if !(1..=8).contains(&k) {
            return Err(StegoError::BadBitDepth(k));
        }
        if !(0.0..=1.0).contains(&th) {
            return Err(StegoError::BadThreshold(th));
        }
        Ok(Self { k, th, method })
    }
}

/// Everything the extractor needs: dimensions, bit depth, threshold and
/// method provenance, exact message bit length, and the indicator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StegoKey {
    pub method: SimilarityMethod,
    pub k: u8,
    pub th: f64,
    pub message_bit_length: u64,
    pub indicator: IndicatorMatrix,
}

impl StegoKey {
    pub const MAGIC: [u8; 4] = *b"ITS2";
    pub const VERSION: u8 = 1;

    /// Wire format, all integers big-endian: magic, version, method id, k,
    /// reserved zero byte, height u32, width u32, threshold f64,
    /// message bit length u64, packed indicator, CRC-32 (IEEE) of all
    /// preceding bytes.
    pub fn serialize(&self) -> Vec<u8> {
        let mask = self.indicator.pack();
        let mut out = Vec::with_capacity(32 + mask.len() + 4);
        out.extend_from_slice(&Self::MAGIC);
        out.push(Self::VERSION);
        out.push(self.method.id());
        out.push(self.k);
        out.push(0);
        out.extend_from_slice(&(self.indicator.height() as u32).to_be_bytes());
        out.extend_from_slice(&(self.indicator.width() as u32).to_be_bytes());
        out.extend_from_slice(&self.th.to_be_bytes());
        out.extend_from_slice(&self.message_bit_length.to_be_bytes());
        out.extend_from_slice(&mask);
        let crc = crc32(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, StegoError> {
        const HEADER: usize = 32;
        if bytes.len() < HEADER + 4 {
            return Err(StegoError::Truncated {
                need: HEADER + 4,
                got: bytes.len(),
            });
        }
        if bytes[0..4] != Self::MAGIC {
            return Err(StegoError::BadMagic);
        }
        if bytes[4] != Self::VERSION {
            return Err(StegoError::UnsupportedVersion(bytes[4]));
        }
        let method = SimilarityMethod::from_id(bytes[5]).ok_or(StegoError::BadMethodId(bytes[5]))?;
        let k = bytes[6];
        if !(1..=8).contains(&k) {
            return Err(StegoError::BadBitDepth(k));
        }
        let height = u32::from_be_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let width = u32::from_be_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let th = f64::from_be_bytes(bytes[16..24].try_into().unwrap());
        let message_bit_length = u64::from_be_bytes(bytes[24..32].try_into().unwrap());
        let mask_len = (width * height).div_ceil(8);
        let need = HEADER + mask_len + 4;
        if bytes.len() < need {
            return Err(StegoError::Truncated {
                need,
                got: bytes.len(),
            });
        }
        if bytes.len() > need {
            return Err(StegoError::TrailingData {
                extra: bytes.len() - need,
            });
        }
        let stored = u32::from_be_bytes(bytes[need - 4..need].try_into().unwrap());
        let computed = crc32(&bytes[..need - 4]);
        if stored != computed {
            return Err(StegoError::ChecksumMismatch { stored, computed });
        }
        let indicator = IndicatorMatrix::unpack(width, height, &bytes[HEADER..HEADER + mask_len])?;
        let capacity = indicator.capacity_bits(k) as u64;
        if message_bit_length > capacity {
            return Err(StegoError::KeyOverCapacity {
                bits: message_bit_length,
                capacity,
            });
        }
        Ok(Self {
            method,
            k,
            th,
            message_bit_length,
            indicator,
        })
    }
}

/// Replaces the k LSBs of every selected channel sample with message bits.
///
/// Traversal is channel-major, then rows, then columns. The first message
/// bit lands in the most significant replaced position of the first
/// selected sample. If the message ends mid-sample, only the top bits of
/// that sample's k-bit field are replaced; every sample after exhaustion
/// is untouched. `message_bits` counts the valid bits in `message`
/// (MSB-first within each byte).
pub fn embed(
    cover: &RgbImage,
    indicator: &IndicatorMatrix,
    config: &EmbedConfig,
    message: &[u8],
    message_bits: usize,
) -> Result<(RgbImage, StegoKey), StegoError> {
    let k = config.k;
    if !(1..=8).contains(&k) {
        return Err(StegoError::BadBitDepth(k));
    }
    if cover.width() != indicator.width() || cover.height() != indicator.height() {
        return Err(StegoError::ShapeMismatch {
            img_w: cover.width(),
            img_h: cover.height(),
            ind_w: indicator.width(),
            ind_h: indicator.height(),
        });
    }
    if message_bits > message.len() * 8 {
        return Err(StegoError::MessageBufferTooShort {
            bits: message_bits,
            have: message.len() * 8,
        });
    }
    let available = indicator.capacity_bits(k);
    if message_bits > available {
        return Err(StegoError::MessageTooLong {
            required: message_bits,
            available,
            k,
        });
    }

    let mut stego = cover.clone();
    let mut reader = BitReader::new(message, message_bits);
    'outer: for channel in 0..3 {
        for y in 0..cover.height() {
            for x in 0..cover.width() {
                if !indicator.get(y, x) {
                    continue;
                }
                let take = reader.remaining().min(k as usize);
                if take == 0 {
                    break 'outer;
                }
                let bits = reader.read(take);
                let old = stego.sample(channel, y, x);
                let replaced_mask = (((1u16 << take) - 1) as u8) << (k - take as u8);
                let new = (old & !replaced_mask) | (bits << (k - take as u8));
                stego.set_sample(channel, y, x, new);
            }
        }
    }

    let key = StegoKey {
        method: config.method,
        k,
        th: config.th,
        message_bit_length: message_bits as u64,
        indicator: indicator.clone(),
    };
    Ok((stego, key))
}

/// Reads back the embedded bit stream. Walks the identical traversal,
/// takes the k LSBs of each selected sample (most significant replaced
/// position first), and truncates the concatenation to the key's message
/// bit length. Returns the bits packed MSB-first, zero-padded to whole
/// bytes.
pub fn extract(stego: &RgbImage, key: &StegoKey) -> Result<Vec<u8>, StegoError> {
    let ind = &key.indicator;
    if stego.width() != ind.width() || stego.height() != ind.height() {
        return Err(StegoError::ShapeMismatch {
            img_w: stego.width(),
            img_h: stego.height(),
            ind_w: ind.width(),
            ind_h: ind.height(),
        });
    }
    let total = key.message_bit_length as usize;
    let mut writer = BitWriter::with_capacity(total);
    'outer: for channel in 0..3 {
        for y in 0..stego.height() {
            for x in 0..stego.width() {
                if !ind.get(y, x) {
                    continue;
                }
                if writer.len() >= total {
                    break 'outer;
                }
                let take = (total - writer.len()).min(key.k as usize);
                let sample = stego.sample(channel, y, x);
                let bits = (sample >> (key.k - take as u8)) & (((1u16 << take) - 1) as u8);
                writer.push(bits, take);
            }
        }
    }
    if writer.len() < total {
        // Only reachable with a hand-built key whose message length exceeds
        // what the indicator can hold.
        return Err(StegoError::KeyOverCapacity {
            bits: total as u64,
            capacity: ind.capacity_bits(key.k) as u64,
        });
    }
    Ok(writer.into_bytes())
}

/// MSB-first bit cursor over a byte slice.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    len: usize,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], len: usize) -> Self {
        Self { data, pos: 0, len }
    }

    fn remaining(&self) -> usize {
        self.len - self.pos
    }

    /// Next `n` bits (n <= 8) right-aligned in the returned byte.
    fn read(&mut self, n: usize) -> u8 {
        let mut out = 0u8;
        for _ in 0..n {
            let byte = self.data[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            out = (out << 1) | bit;
            self.pos += 1;
        }
        out
    }
}

/// MSB-first bit sink.
struct BitWriter {
    data: Vec<u8>,
    len: usize,
}

impl BitWriter {
    fn with_capacity(bits: usize) -> Self {
        Self {
            data: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    /// Appends the `n` low bits of `value`, most significant first.
    fn push(&mut self, value: u8, n: usize) {
        for i in (0..n).rev() {
            let bit = (value >> i) & 1;
            if self.len.is_multiple_of(8) {
                self.data.push(0);
            }
            if bit != 0 {
                *self.data.last_mut().unwrap() |= 0x80 >> (self.len % 8);
            }
            self.len += 1;
        }
    }

    fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}

/// CRC-32, IEEE 802.3 polynomial (the PNG/zlib one).
pub fn crc32(data: &[u8]) -> u32 {
    const TABLE: [u32; 256] = crc32_table();
    let mut crc = 0xFFFF_FFFFu32;
    for &byte in data {
        crc = (crc >> 8) ^ TABLE[((crc ^ byte as u32) & 0xFF) as usize];
    }
    !crc
}

const fn crc32_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut bit = 0;
        while bit < 8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            bit += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}
