//! Browser bindings for the fuzzsteg pipeline.
//!
//! The page works with canvas RGBA buffers; everything here converts to
//! the library's RGB images, runs the same code the CLI uses, and hands
//! back flat arrays the page can draw. See `www/index.html` for the demo.
//!
//! Build with `wasm-pack build --target web crates/fuzzsteg-wasm`.

mod ops;

use wasm_bindgen::prelude::*;

/// Stateful demo handle: keeps one lazily built evaluator per similarity
/// method so repeated interactions reuse the difference cache.
#[wasm_bindgen]
pub struct FuzzstegDemo {
    inner: ops::Lab,
}

/// Everything the page needs after an embed: the stego pixels, the sidecar
/// key, and the quality numbers.
#[wasm_bindgen]
pub struct EmbedOutcome {
    stego_rgba: Vec<u8>,
    key: Vec<u8>,
    capacity_bits: u32,
    bits_embedded: u32,
    capacity_pct: f64,
    psnr_db: f64,
    ssim: f64,
    uqi: f64,
}

#[wasm_bindgen]
impl EmbedOutcome {
    #[wasm_bindgen(getter)]
    pub fn stego_rgba(&self) -> Vec<u8> {
        self.stego_rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn key(&self) -> Vec<u8> {
        self.key.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn capacity_bits(&self) -> u32 {
        self.capacity_bits
    }

    #[wasm_bindgen(getter)]
    pub fn bits_embedded(&self) -> u32 {
        self.bits_embedded
    }

    #[wasm_bindgen(getter)]
    pub fn capacity_pct(&self) -> f64 {
        self.capacity_pct
    }

    #[wasm_bindgen(getter)]
    pub fn psnr_db(&self) -> f64 {
        self.psnr_db
    }

    #[wasm_bindgen(getter)]
    pub fn ssim(&self) -> f64 {
        self.ssim
    }

    #[wasm_bindgen(getter)]
    pub fn uqi(&self) -> f64 {
        self.uqi
    }
}

#[wasm_bindgen]
impl FuzzstegDemo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> FuzzstegDemo {
        FuzzstegDemo {
            inner: ops::Lab::new(),
        }
    }

    /// Per-pixel similarity values (row-major, `[0, 1]`) of an RGBA image
    /// under one method: `"it2fls"`, `"t1fls"` or `"sm"`. The page turns
    /// this into heatmaps and threshold overlays without recomputing.
    pub fn similarity_map(
        &mut self,
        rgba: &[u8],
        width: u32,
        height: u32,
        method: &str,
    ) -> Result<Vec<f64>, JsError> {
        self.inner
            .similarity_map(rgba, width as usize, height as usize, method)
            .map_err(|e| JsError::new(&e))
    }

    /// Embeds `message` into the pixels whose similarity reaches `th`,
    /// replacing `k` low bits per channel value, and scores the result.
    #[allow(clippy::too_many_arguments)]
    pub fn embed(
        &mut self,
        rgba: &[u8],
        width: u32,
        height: u32,
        k: u8,
        th: f64,
        method: &str,
        message: &[u8],
    ) -> Result<EmbedOutcome, JsError> {
        let out = self
            .inner
            .embed(rgba, width as usize, height as usize, k, th, method, message)
            .map_err(|e| JsError::new(&e))?;
        Ok(EmbedOutcome {
            stego_rgba: out.stego_rgba,
            key: out.key,
            capacity_bits: out.capacity_bits as u32,
            bits_embedded: out.bits_embedded as u32,
            capacity_pct: out.capacity_pct,
            psnr_db: out.psnr_db,
            ssim: out.ssim,
            uqi: out.uqi,
        })
    }

    /// Recovers the embedded bytes from stego RGBA pixels and a key blob.
    pub fn extract(
        &self,
        rgba: &[u8],
        width: u32,
        height: u32,
        key: &[u8],
    ) -> Result<Vec<u8>, JsError> {
        ops::extract(rgba, width as usize, height as usize, key).map_err(|e| JsError::new(&e))
    }

    /// Similarity of a uniform difference `(d, d, d)` for every d in
    /// 0..=255; the method's response curve.
    pub fn response_curve(&mut self, method: &str) -> Result<Vec<f64>, JsError> {
        self.inner.response_curve(method).map_err(|e| JsError::new(&e))
    }

    /// Membership curves for plotting. `which` is `"color"` (3 terms over
    /// gray differences) or `"similarity"` (5 terms over `[0, 1]`).
    /// Layout: per term, `samples` lower values then `samples` upper values.
    pub fn membership_curves(&self, which: &str, samples: u32) -> Result<Vec<f64>, JsError> {
        ops::membership_curves(which, samples as usize).map_err(|e| JsError::new(&e))
    }

    /// Deterministic demo cover as RGBA. `kind` is `"texture"`,
    /// `"gradient"` or `"noise"`.
    pub fn generate_cover(
        &self,
        kind: &str,
        width: u32,
        height: u32,
        seed: u64,
    ) -> Result<Vec<u8>, JsError> {
        ops::generate_cover(kind, width as usize, height as usize, seed)
            .map_err(|e| JsError::new(&e))
    }
}

impl Default for FuzzstegDemo {
    fn default() -> Self {
        Self::new()
    }
}
