//! Per-pixel similarity maps over 3x3 neighborhoods.
//!
//! Every pixel gets a 3x3 window (replicate-edge padded at the borders).
//! The 36 unordered pixel pairs of that window each produce a similarity in
//! `[0, 1]` from one of three measures: the IT2 fuzzy system, the type-1
//! baseline, or a normalized Euclidean distance. Pair similarities fill a
//! symmetric 9x9 relation matrix; averaging each row (diagonal excluded)
//! and then the rows yields the window's per-pixel similarity. A memo
//! cache keyed on the exact difference triple makes full-image maps cheap:
//! the measure only depends on `(|dR|, |dG|, |dB|)`.

use crate::img::RgbImage;
use crate::inference::{InferenceEngine, InferenceError, Scratch};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("image {0}x{1} too small for 3x3 windows; need at least 3x3")]
    ImageTooSmall(usize, usize),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Absolute per-channel gray-level differences of a pixel pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelDiff {
    pub dr: u8,
    pub dg: u8,
    pub db: u8,
}

impl ChannelDiff {
    pub fn new(dr: u8, dg: u8, db: u8) -> Self {
        Self { dr, dg, db }
    }

    pub fn as_array(self) -> [u8; 3] {
        [self.dr, self.dg, self.db]
    }

    #[inline]
    fn table_index(self) -> usize {
        ((self.dr as usize) << 16) | ((self.dg as usize) << 8) | self.db as usize
    }
}

/// Absolute channel differences between two pixels.
#[inline]
pub fn channel_diff(p: [u8; 3], q: [u8; 3]) -> ChannelDiff {
    ChannelDiff {
        dr: p[0].abs_diff(q[0]),
        dg: p[1].abs_diff(q[1]),
        db: p[2].abs_diff(q[2]),
    }
}

/// Which similarity measure drives pixel selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityMethod {
    /// Interval type-2 fuzzy inference.
    It2Fls,
    /// Type-1 fuzzy inference on the zero-FOU (principal) vocabularies.
    T1Fls,
    /// `1 - D / 255` with `D = sqrt(dR^2 + dG^2 + dB^2) / 3`.
    EuclideanSm,
}

impl SimilarityMethod {
    pub const ALL: [SimilarityMethod; 3] = [
        SimilarityMethod::It2Fls,
        SimilarityMethod::T1Fls,
        SimilarityMethod::EuclideanSm,
    ];

    /// Wire identifier used in the stego-key sidecar.
    pub fn id(self) -> u8 {
        match self {
            SimilarityMethod::It2Fls => 0,
            SimilarityMethod::T1Fls => 1,
            SimilarityMethod::EuclideanSm => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(SimilarityMethod::It2Fls),
            1 => Some(SimilarityMethod::T1Fls),
            2 => Some(SimilarityMethod::EuclideanSm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMethod::It2Fls => "it2fls",
            SimilarityMethod::T1Fls => "t1fls",
            SimilarityMethod::EuclideanSm => "sm",
        }
    }
}

impl std::fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SimilarityMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "it2fls" | "it2" => Ok(SimilarityMethod::It2Fls),
            "t1fls" | "t1" => Ok(SimilarityMethod::T1Fls),
            "sm" | "euclidean" => Ok(SimilarityMethod::EuclideanSm),
            other => Err(format!(
                "unknown method '{other}'; expected it2fls, t1fls or sm"
            )),
        }
    }
}

/// Memoization policy for pair similarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// No memoization; every pair runs the full measure.
    Off,
    /// Memoize difference triples on first use.
    Lazy,
    /// Precompute the full 256^3 table up front. 128 MiB of values; pays
    /// off when many images share one evaluator.
    Dense,
}

impl std::str::FromStr for CacheMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(CacheMode::Off),
            "lazy" => Ok(CacheMode::Lazy),
            "dense" => Ok(CacheMode::Dense),
            other => Err(format!(
                "unknown cache mode '{other}'; expected lazy, dense or off"
            )),
        }
    }
}

impl std::fmt::Display for CacheMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CacheMode::Off => "off",
            CacheMode::Lazy => "lazy",
            CacheMode::Dense => "dense",
        })
    }
}

#[cfg(feature = "parallel")]
type LazyMap = dashmap::DashMap<u32, f64>;
#[cfg(not(feature = "parallel"))]
type LazyMap = std::sync::Mutex<std::collections::HashMap<u32, f64>>;

enum DiffCache {
    Off,
    Lazy(LazyMap),
    Dense(Vec<f64>),
}

/// Symmetric 9x9 pair-similarity matrix of one window, unit diagonal.
/// Window pixels are indexed in row-major order, center at index 4.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRelationMatrix {
    s: [[f64; 9]; 9],
}

impl SimilarityRelationMatrix {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.s[m][n]
    }

    pub fn as_rows(&self) -> &[[f64; 9]; 9] {
        &self.s
    }

    /// Row average excluding the diagonal.
    pub fn pixel_similarity(&self, i: usize) -> f64 {
        let mut sum = 0.0;
        for n in 0..9 {
            if n != i {
                sum += self.s[i][n];
            }
        }
        sum / 8.0
    }

    /// Window-level similarity: mean of the nine per-pixel averages.
    pub fn window_similarity(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..9 {
            sum += self.pixel_similarity(i);
        }
        sum / 9.0
    }
}

/// Per-pixel similarity values of a whole image, row-major in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SimilarityMap {
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Row-major 64-bit little-endian dump.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(width: usize, height: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != width * height * 8 {
            return None;
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Some(Self {
            width,
            height,
            values,
        })
    }

    /// 8-bit grayscale heatmap (`value * 255`, rounded).
    pub fn heatmap(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// One similarity measure bound to its inference engine and memo cache.
pub struct SimilarityEvaluator {
    method: SimilarityMethod,
    engine: InferenceEngine,
    cache: DiffCache,
}

impl SimilarityEvaluator {
    pub fn new(
        method: SimilarityMethod,
        engine: InferenceEngine,
        cache: CacheMode,
    ) -> Result<Self, SimilarityError> {
        let mut evaluator = Self {
            method,
            engine,
            cache: DiffCache::Off,
        };
        evaluator.cache = match cache {
            CacheMode::Off => DiffCache::Off,
            CacheMode::Lazy => DiffCache::Lazy(LazyMap::default()),
            CacheMode::Dense => DiffCache::Dense(evaluator.build_dense_table()?),
        };
        Ok(evaluator)
    }

    /// Standard engine, lazy cache.
    pub fn with_defaults(method: SimilarityMethod) -> Self {
        Self::new(method, InferenceEngine::standard(), CacheMode::Lazy)
            .expect("built-in configuration is valid")
    }

    pub fn method(&self) -> SimilarityMethod {
        self.method
    }

    pub fn engine(&self) -> &InferenceEngine {
        &self.engine
    }

    fn compute(&self, scratch: &mut Scratch, d: ChannelDiff) -> Result<f64, SimilarityError> {
        let v = match self.method {
            SimilarityMethod::It2Fls => self.engine.infer_it2_with(scratch, d.as_array())?,
            SimilarityMethod::T1Fls => self.engine.infer_t1_with(scratch, d.as_array())?,
            SimilarityMethod::EuclideanSm => euclidean_similarity(d),
        };
        Ok(v)
    }

    /// Similarity of one difference triple, memoized per the cache mode.
    pub fn pair_similarity(&self, d: ChannelDiff) -> Result<f64, SimilarityError> {
        self.pair_similarity_with(&mut self.engine.scratch(), d)
    }

    fn pair_similarity_with(
        &self,
        scratch: &mut Scratch,
        d: ChannelDiff,
    ) -> Result<f64, SimilarityError> {
        match &self.cache {
            DiffCache::Off => self.compute(scratch, d),
            DiffCache::Dense(table) => Ok(table[d.table_index()]),
            DiffCache::Lazy(map) => {
                let key = d.table_index() as u32;
                if let Some(v) = lazy_get(map, key) {
                    return Ok(v);
                }
                let v = self.compute(scratch, d)?;
                lazy_insert(map, key, v);
                Ok(v)
            }
        }
    }

    /// Relation matrix and window similarity of one 3x3 window given in
    /// row-major order.
    pub fn window_similarity(
        &self,
        window: &[[u8; 3]; 9],
    ) -> Result<(SimilarityRelationMatrix, f64), SimilarityError> {
        self.window_similarity_with(&mut self.engine.scratch(), window)
    }

    fn window_similarity_with(
        &self,
        scratch: &mut Scratch,
        window: &[[u8; 3]; 9],
    ) -> Result<(SimilarityRelationMatrix, f64), SimilarityError> {
        let mut s = [[1.0f64; 9]; 9];
        for m in 0..9 {
            for n in (m + 1)..9 {
                let v = self.pair_similarity_with(scratch, channel_diff(window[m], window[n]))?;
                s[m][n] = v;
                s[n][m] = v;
            }
        }
        let matrix = SimilarityRelationMatrix { s };
        let s_a = matrix.window_similarity();
        Ok((matrix, s_a))
    }

    /// Similarity map of a whole image: each pixel's 3x3 window similarity,
    /// replicate-edge padded at the borders. Deterministic regardless of
    /// worker count or cache mode.
    pub fn similarity_map(&self, img: &RgbImage) -> Result<SimilarityMap, SimilarityError> {
        let (w, h) = (img.width(), img.height());
        if w < 3 || h < 3 {
            return Err(SimilarityError::ImageTooSmall(w, h));
        }
        let mut values = vec![0.0f64; w * h];

        #[cfg(feature = "parallel")]
        {
            values
                .par_chunks_mut(w)
                .enumerate()
                .map_init(
                    || self.engine.scratch(),
                    |scratch, (y, row)| {
                        for (x, slot) in row.iter_mut().enumerate() {
                            *slot = self.window_value(scratch, img, y, x)?;
                        }
                        Ok(())
                    },
                )
                .collect::<Result<Vec<()>, SimilarityError>>()?;
        }

        #[cfg(not(feature = "parallel"))]
        {
            let mut scratch = self.engine.scratch();
            for y in 0..h {
                for x in 0..w {
                    values[y * w + x] = self.window_value(&mut scratch, img, y, x)?;
                }
            }
        }

        Ok(SimilarityMap {
            width: w,
            height: h,
            values,
        })
    }

    fn window_value(
        &self,
        scratch: &mut Scratch,
        img: &RgbImage,
        y: usize,
        x: usize,
    ) -> Result<f64, SimilarityError> {
        let mut window = [[0u8; 3]; 9];
        let mut i = 0;
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                window[i] = img.pixel_clamped(y as isize + dy, x as isize + dx);
                i += 1;
            }
        }
        let (_, s_a) = self.window_similarity_with(scratch, &window)?;
        Ok(s_a)
    }

    /// Number of memoized triples (dense mode reports the full table).
    pub fn cached_entries(&self) -> usize {
        match &self.cache {
            DiffCache::Off => 0,
            DiffCache::Dense(t) => t.len(),
            DiffCache::Lazy(map) => lazy_len(map),
        }
    }

    fn build_dense_table(&self) -> Result<Vec<f64>, SimilarityError> {
        // When the rule base treats the three channels interchangeably
        // (the built-in table does), the measure is invariant under
        // permutations of the difference triple: only sorted triples need
        // computing, a 5.8x saving.
        if self.rulebase_is_symmetric() {
            self.build_dense_symmetric()
        } else {
            self.build_dense_full()
        }
    }

    fn rulebase_is_symmetric(&self) -> bool {
        if self.method == SimilarityMethod::EuclideanSm {
            return true;
        }
        let rules = self.engine.rules();
        rules.rules().iter().all(|rule| {
            let mut sorted = rule.antecedent;
            sorted.sort_by_key(|t| t.index());
            rules
                .rules()
                .iter()
                .find(|r| r.antecedent == sorted)
                .map(|r| r.consequent == rule.consequent)
                .unwrap_or(false)
        })
    }

    fn build_dense_symmetric(&self) -> Result<Vec<f64>, SimilarityError> {
        let mut sorted_triples = Vec::new();
        for a in 0..=255u8 {
            for b in a..=255u8 {
                for c in b..=255u8 {
                    sorted_triples.push(ChannelDiff::new(a, b, c));
                }
            }
        }
        let values = self.compute_batch(&sorted_triples)?;

        let mut table = vec![0.0f64; 1 << 24];
        for (d, &v) in sorted_triples.iter().zip(values.iter()) {
            let (a, b, c) = (d.dr as usize, d.dg as usize, d.db as usize);
            for (i, j, k) in [
                (a, b, c),
                (a, c, b),
                (b, a, c),
                (b, c, a),
                (c, a, b),
                (c, b, a),
            ] {
                table[(i << 16) | (j << 8) | k] = v;
            }
        }
        Ok(table)
    }

    fn build_dense_full(&self) -> Result<Vec<f64>, SimilarityError> {
        let triples: Vec<ChannelDiff> = (0..(1usize << 24))
            .map(|i| ChannelDiff::new((i >> 16) as u8, (i >> 8) as u8, i as u8))
            .collect();
        self.compute_batch(&triples)
    }

    fn compute_batch(&self, triples: &[ChannelDiff]) -> Result<Vec<f64>, SimilarityError> {
        #[cfg(feature = "parallel")]
        {
            triples
                .par_iter()
                .map_init(
                    || self.engine.scratch(),
                    |scratch, &d| self.compute(scratch, d),
                )
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut scratch = self.engine.scratch();
            triples
                .iter()
                .map(|&d| self.compute(&mut scratch, d))
                .collect()
        }
    }
}

/// `1 - D / 255` with `D` the scaled Euclidean distance
/// `sqrt(dR^2 + dG^2 + dB^2) / 3`; maps a zero difference to exactly 1.
pub fn euclidean_similarity(d: ChannelDiff) -> f64 {
    let (dr, dg, db) = (d.dr as f64, d.dg as f64, d.db as f64);
    let dist = (dr * dr + dg * dg + db * db).sqrt() / 3.0;
    1.0 - dist / 255.0
}

#[cfg(feature = "parallel")]
fn lazy_get(map: &LazyMap, key: u32) -> Option<f64> {
    map.get(&key).map(|v| *v)
}

#[cfg(feature = "parallel")]
fn lazy_insert(map: &LazyMap, key: u32, value: f64) {
    map.insert(key, value);
}

#[cfg(feature = "parallel")]
fn lazy_len(map: &LazyMap) -> usize {
    map.len()
}

#[cfg(not(feature = "parallel"))]
fn lazy_get(map: &LazyMap, key: u32) -> Option<f64> {
    map.lock().unwrap().get(&key).copied()
}

#[cfg(not(feature = "parallel"))]
fn lazy_insert(map: &LazyMap, key: u32, value: f64) {
    map.lock().unwrap().insert(key, value);
}

#[cfg(not(feature = "parallel"))]
fn lazy_len(map: &LazyMap) -> usize {
    map.lock().unwrap().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn channel_diff_examples() {
        assert_eq!(
            channel_diff([5, 5, 5], [5, 5, 5]),
            ChannelDiff::new(0, 0, 0)
        );
        assert_eq!(
            channel_diff([200, 100, 50], [180, 120, 40]),
            ChannelDiff::new(20, 20, 10)
        );
        assert_eq!(
            channel_diff([0, 0, 0], [255, 255, 255]),
            ChannelDiff::new(255, 255, 255)
        );
    }

    #[test]
    fn euclidean_extremes() {
        assert_eq!(euclidean_similarity(ChannelDiff::new(0, 0, 0)), 1.0);
        let s = euclidean_similarity(ChannelDiff::new(255, 255, 255));
        assert!((s - (1.0 - 1.0 / 3.0f64.sqrt())).abs() < 1e-12);
        assert!((s - 0.42265).abs() < 1e-5);
    }

    #[test]
    fn euclidean_is_strictly_decreasing_in_the_norm() {
        let mut prev = f64::INFINITY;
        for d in 0..=255u8 {
            let s = euclidean_similarity(ChannelDiff::new(d, d, d));
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn fls_methods_rank_identical_above_opposite() {
        for method in [SimilarityMethod::It2Fls, SimilarityMethod::T1Fls] {
            let ev = SimilarityEvaluator::with_defaults(method);
            let same = ev.pair_similarity(ChannelDiff::new(0, 0, 0)).unwrap();
            let far = ev.pair_similarity(ChannelDiff::new(255, 255, 255)).unwrap();
            assert!(same > far, "{method}: {same} <= {far}");
            assert!(same > 0.81, "{method}: max similarity {same} too low");
        }
    }

    #[test]
    fn it2_similarity_decreases_from_low_into_medium_range() {
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
        let near = ev.pair_similarity(ChannelDiff::new(30, 30, 30)).unwrap();
        let far = ev.pair_similarity(ChannelDiff::new(60, 60, 60)).unwrap();
        assert!(near >= far, "{near} < {far}");
    }

    #[test]
    fn pair_similarity_is_symmetric_in_the_pixels() {
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
        let mut rng = StdRng::seed_from_u64(0x5eed_0011);
        for _ in 0..50 {
            let p: [u8; 3] = rng.gen();
            let q: [u8; 3] = rng.gen();
            let a = ev.pair_similarity(channel_diff(p, q)).unwrap();
            let b = ev.pair_similarity(channel_diff(q, p)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn constant_window_collapses_to_the_zero_diff_similarity() {
        for method in SimilarityMethod::ALL {
            let ev = SimilarityEvaluator::with_defaults(method);
            let window = [[120u8, 7, 200]; 9];
            let (matrix, s_a) = ev.window_similarity(&window).unwrap();
            let base = ev.pair_similarity(ChannelDiff::new(0, 0, 0)).unwrap();
            // Averaging 36 copies of the same value accumulates rounding.
            assert!((s_a - base).abs() < 1e-12);
            for m in 0..9 {
                for n in 0..9 {
                    let expected = if m == n { 1.0 } else { base };
                    assert_eq!(matrix.get(m, n), expected);
                }
            }
        }
    }

    #[test]
    fn window_similarity_is_permutation_invariant() {
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
        let mut rng = StdRng::seed_from_u64(0x5eed_0012);
        for _ in 0..30 {
            let mut window = [[0u8; 3]; 9];
            for p in window.iter_mut() {
                *p = rng.gen();
            }
            let (_, s_a) = ev.window_similarity(&window).unwrap();
            let mut shuffled = window;
            for i in (1..9).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let (_, s_b) = ev.window_similarity(&shuffled).unwrap();
            assert!((s_a - s_b).abs() < 1e-12, "{s_a} vs {s_b}");

            // Swapping the two pixels of every pair is exact: the diffs
            // are absolute values.
            let mut reversed = window;
            reversed.reverse();
            let (_, s_c) = ev.window_similarity(&reversed).unwrap();
            assert!((s_a - s_c).abs() < 1e-12);
        }
    }

    #[test]
    fn window_similarity_matches_a_scalar_double_loop() {
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
        let mut rng = StdRng::seed_from_u64(0x5eed_0013);
        for _ in 0..20 {
            let mut window = [[0u8; 3]; 9];
            for p in window.iter_mut() {
                *p = rng.gen();
            }
            let (_, s_a) = ev.window_similarity(&window).unwrap();

            // Literal re-computation of the row/window averages.
            let mut total = 0.0;
            for i in 0..9 {
                let mut row = 0.0;
                for n in 0..9 {
                    if n != i {
                        row += ev
                            .pair_similarity(channel_diff(window[i], window[n]))
                            .unwrap();
                    }
                }
                total += row / 8.0;
            }
            let oracle = total / 9.0;
            assert_eq!(s_a, oracle);
        }
    }

    #[test]
    fn constant_image_gives_a_constant_map() {
        let img = RgbImage::filled(6, 5, [90, 90, 90]).unwrap();
        for method in SimilarityMethod::ALL {
            let ev = SimilarityEvaluator::with_defaults(method);
            let map = ev.similarity_map(&img).unwrap();
            let base = ev.pair_similarity(ChannelDiff::new(0, 0, 0)).unwrap();
            assert!(map.values().iter().all(|&v| (v - base).abs() < 1e-12));
            // Every pixel sees the same window, so the map is constant.
            assert!(map.values().iter().all(|&v| v == map.values()[0]));
        }
    }

    #[test]
    fn map_is_identical_across_cache_modes() {
        let img = synth::texture_cover(10, 9, 60.0, 0x5eed_0014);
        let engine = InferenceEngine::standard();
        let with_cache =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine.clone(), CacheMode::Lazy)
                .unwrap();
        let without =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine, CacheMode::Off).unwrap();
        let a = with_cache.similarity_map(&img).unwrap();
        let b = without.similarity_map(&img).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(with_cache.cached_entries() > 0);
    }

    #[test]
    fn map_matches_per_pixel_window_oracle() {
        let img = synth::texture_cover(5, 5, 80.0, 0x5eed_0015);
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
        let map = ev.similarity_map(&img).unwrap();
        for y in 0..5isize {
            for x in 0..5isize {
                let mut window = [[0u8; 3]; 9];
                let mut i = 0;
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        window[i] = img.pixel_clamped(y + dy, x + dx);
                        i += 1;
                    }
                }
                let (_, s_a) = ev.window_similarity(&window).unwrap();
                assert_eq!(map.get(y as usize, x as usize), s_a);
            }
        }
    }

    #[test]
    fn cache_agrees_with_direct_computation() {
        let engine = InferenceEngine::standard();
        let cached =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine.clone(), CacheMode::Lazy)
                .unwrap();
        let direct =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine, CacheMode::Off).unwrap();
        let mut rng = StdRng::seed_from_u64(0x5eed_0016);
        for _ in 0..10_000 {
            let d = ChannelDiff::new(rng.gen(), rng.gen(), rng.gen());
            // Twice through the cache: the second hit must reproduce the
            // inserted value.
            let a1 = cached.pair_similarity(d).unwrap();
            let a2 = cached.pair_similarity(d).unwrap();
            let b = direct.pair_similarity(d).unwrap();
            assert_eq!(a1, b);
            assert_eq!(a2, b);
        }
    }

    #[test]
    fn dense_cache_is_bit_identical_to_direct_computation() {
        let engine = InferenceEngine::standard();
        let dense =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine.clone(), CacheMode::Dense)
                .unwrap();
        let direct =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine, CacheMode::Off).unwrap();
        let mut rng = StdRng::seed_from_u64(0x5eed_0017);
        for _ in 0..5_000 {
            let d = ChannelDiff::new(rng.gen(), rng.gen(), rng.gen());
            assert_eq!(
                dense.pair_similarity(d).unwrap(),
                direct.pair_similarity(d).unwrap(),
                "triple {d:?}"
            );
        }
        // Permutations hit the shared sorted-triple entry.
        let a = dense.pair_similarity(ChannelDiff::new(9, 80, 200)).unwrap();
        let b = dense.pair_similarity(ChannelDiff::new(200, 9, 80)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn asymmetric_rulebases_are_detected_and_permutation_dependent() {
        use crate::fuzzy::{ColorTerm, ColorVocabulary, SimilarityTerm, SimilarityVocabulary};
        use crate::inference::RuleBase;
        // Swap one consequent so the red channel matters more than blue.
        let mut rules = RuleBase::standard().rules().to_vec();
        let idx = rules
            .iter()
            .position(|r| {
                r.antecedent
                    == [ColorTerm::High, ColorTerm::Low, ColorTerm::Low]
            })
            .unwrap();
        rules[idx].consequent = SimilarityTerm::NotSimilar;
        let engine = InferenceEngine::new(
            RuleBase::new(rules).unwrap(),
            ColorVocabulary::default(),
            SimilarityVocabulary::default(),
            101,
        )
        .unwrap();
        let ev = SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine, CacheMode::Lazy)
            .unwrap();
        assert!(!ev.rulebase_is_symmetric());
        let a = ev.pair_similarity(ChannelDiff::new(200, 0, 0)).unwrap();
        let b = ev.pair_similarity(ChannelDiff::new(0, 0, 200)).unwrap();
        assert!(a < b, "red-heavy diff should rank less similar: {a} vs {b}");
    }

    #[test]
    fn map_too_small_is_an_error() {
        let img = RgbImage::filled(2, 5, [0, 0, 0]).unwrap();
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::EuclideanSm);
        assert!(matches!(
            ev.similarity_map(&img),
            Err(SimilarityError::ImageTooSmall(2, 5))
        ));
    }

    #[test]
    fn map_round_trips_through_le_bytes() {
        let img = synth::gradient_cover(8, 6);
        let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::EuclideanSm);
        let map = ev.similarity_map(&img).unwrap();
        let bytes = map.to_le_bytes();
        assert_eq!(bytes.len(), 8 * 6 * 8);
        let back = SimilarityMap::from_le_bytes(8, 6, &bytes).unwrap();
        assert_eq!(back.values(), map.values());
    }

    #[test]
    fn heatmap_rounds_to_gray_levels() {
        let map = SimilarityMap::from_values(2, 1, vec![0.0, 0.5019]);
        assert_eq!(map.heatmap(), vec![0, 128]);
    }
}
