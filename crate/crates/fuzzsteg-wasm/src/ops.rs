//! Plain-Rust demo operations behind the wasm bindings; testable on any
//! target.

use fuzzsteg::fuzzy::{ColorVocabulary, SimilarityVocabulary};
use fuzzsteg::metrics;
use fuzzsteg::similarity::{CacheMode, ChannelDiff, SimilarityEvaluator, SimilarityMethod};
use fuzzsteg::stego::{self, EmbedConfig, IndicatorMatrix, StegoKey};
use fuzzsteg::{synth, InferenceEngine, RgbImage};

pub struct Lab {
    evaluators: [Option<SimilarityEvaluator>; 3],
}

pub struct EmbedOut {
    pub stego_rgba: Vec<u8>,
    pub key: Vec<u8>,
    pub capacity_bits: usize,
    pub bits_embedded: usize,
    pub capacity_pct: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub uqi: f64,
}

fn parse_method(name: &str) -> Result<SimilarityMethod, String> {
    name.parse::<SimilarityMethod>()
}

fn rgba_to_rgb(rgba: &[u8], width: usize, height: usize) -> Result<RgbImage, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!(
            "expected {}x{}x4 = {} RGBA bytes, got {}",
            width,
            height,
            width * height * 4,
            rgba.len()
        ));
    }
    let mut rgb = Vec::with_capacity(width * height * 3);
    for px in rgba.chunks_exact(4) {
        rgb.extend_from_slice(&px[..3]);
    }
    RgbImage::from_raw(width, height, rgb).map_err(|e| e.to_string())
}

fn rgb_to_rgba(img: &RgbImage) -> Vec<u8> {
    let mut rgba = Vec::with_capacity(img.width() * img.height() * 4);
    for px in img.as_raw().chunks_exact(3) {
        rgba.extend_from_slice(px);
        rgba.push(255);
    }
    rgba
}

impl Lab {
    pub fn new() -> Self {
        Self {
            evaluators: [None, None, None],
        }
    }

    fn evaluator(&mut self, method: SimilarityMethod) -> &SimilarityEvaluator {
        let slot = &mut self.evaluators[method.id() as usize];
        if slot.is_none() {
            *slot = Some(
                SimilarityEvaluator::new(method, InferenceEngine::standard(), CacheMode::Lazy)
                    .expect("built-in configuration is valid"),
            );
        }
        slot.as_ref().unwrap()
    }

    pub fn similarity_map(
        &mut self,
        rgba: &[u8],
        width: usize,
        height: usize,
        method: &str,
    ) -> Result<Vec<f64>, String> {
        let img = rgba_to_rgb(rgba, width, height)?;
        let ev = self.evaluator(parse_method(method)?);
        let map = ev.similarity_map(&img).map_err(|e| e.to_string())?;
        Ok(map.values().to_vec())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn embed(
        &mut self,
        rgba: &[u8],
        width: usize,
        height: usize,
        k: u8,
        th: f64,
        method: &str,
        message: &[u8],
    ) -> Result<EmbedOut, String> {
        let method = parse_method(method)?;
        let cover = rgba_to_rgb(rgba, width, height)?;
        let ev = self.evaluator(method);
        let map = ev.similarity_map(&cover).map_err(|e| e.to_string())?;
        let indicator = IndicatorMatrix::from_map(&map, th);
        let config = EmbedConfig::new(k, th, method).map_err(|e| e.to_string())?;
        let bits = message.len() * 8;
        let (stego, key) =
            stego::embed(&cover, &indicator, &config, message, bits).map_err(|e| e.to_string())?;
        let psnr_db = metrics::psnr(&cover, &stego).map_err(|e| e.to_string())?;
        let ssim = metrics::ssim(&cover, &stego).map_err(|e| e.to_string())?;
        // A flat region can make UQI undefined; report NaN rather than fail.
        let uqi = metrics::uqi(&cover, &stego).unwrap_or(f64::NAN);
        Ok(EmbedOut {
            stego_rgba: rgb_to_rgba(&stego),
            key: key.serialize(),
            capacity_bits: indicator.capacity_bits(k),
            bits_embedded: bits,
            capacity_pct: indicator.capacity_percent(k),
            psnr_db,
            ssim,
            uqi,
        })
    }

    pub fn response_curve(&mut self, method: &str) -> Result<Vec<f64>, String> {
        let ev = self.evaluator(parse_method(method)?);
        (0..=255u8)
            .map(|d| {
                ev.pair_similarity(ChannelDiff::new(d, d, d))
                    .map_err(|e| e.to_string())
            })
            .collect()
    }
}

impl Default for Lab {
    fn default() -> Self {
        Self::new()
    }
}

pub fn extract(rgba: &[u8], width: usize, height: usize, key: &[u8]) -> Result<Vec<u8>, String> {
    let img = rgba_to_rgb(rgba, width, height)?;
    let key = StegoKey::deserialize(key).map_err(|e| e.to_string())?;
    stego::extract(&img, &key).map_err(|e| e.to_string())
}

pub fn membership_curves(which: &str, samples: usize) -> Result<Vec<f64>, String> {
    if samples < 2 {
        return Err("need at least 2 samples".into());
    }
    let (mfs, lo, hi): (Vec<fuzzsteg::It2TriangularMf>, f64, f64) = match which {
        "color" => (
            ColorVocabulary::default().mfs().to_vec(),
            ColorVocabulary::DOMAIN.0,
            ColorVocabulary::DOMAIN.1,
        ),
        "similarity" => (
            SimilarityVocabulary::default().mfs().to_vec(),
            SimilarityVocabulary::DOMAIN.0,
            SimilarityVocabulary::DOMAIN.1,
        ),
        other => return Err(format!("unknown vocabulary '{other}'")),
    };
    let mut out = Vec::with_capacity(mfs.len() * samples * 2);
    for mf in &mfs {
        let mut uppers = Vec::with_capacity(samples);
        for i in 0..samples {
            let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let m = mf.evaluate(x).map_err(|e| e.to_string())?;
            out.push(m.lower);
            uppers.push(m.upper);
        }
        out.extend_from_slice(&uppers);
    }
    Ok(out)
}

pub fn generate_cover(
    kind: &str,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<Vec<u8>, String> {
    if width == 0 || height == 0 || width > 2048 || height > 2048 {
        return Err(format!("cover size {width}x{height} outside 1..=2048"));
    }
    let img = match kind {
        "gradient" => synth::gradient_cover(width, height),
        "noise" => synth::noise_cover(width, height, seed),
        "texture" => synth::texture_cover(width, height, 60.0, seed),
        other => return Err(format!("unknown cover kind '{other}'")),
    };
    Ok(rgb_to_rgba(&img))
}
