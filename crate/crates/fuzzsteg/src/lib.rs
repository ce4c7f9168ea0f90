//! Perceptual pixel-similarity steganography.
//!
//! This crate measures how similar every pixel of an RGB image is to its
//! 3x3 neighborhood with an interval type-2 (IT2) fuzzy logic system, then
//! uses the resulting similarity map to gate k-bit LSB embedding: only
//! pixels in smooth regions (similarity >= a threshold) carry payload.
//!
//! The pipeline, end to end:
//!
//! 1. [`fuzzy`] — IT2 triangular membership functions and the linguistic
//!    vocabularies for channel differences (Low/Medium/High) and similarity
//!    (NS/SS/MS/QS/ES).
//! 2. [`inference`] — the 27-rule Mamdani engine: product-t-norm firing
//!    intervals, max aggregation on a discretized output domain, enhanced
//!    Karnik-Mendel (EKM) type reduction and centroid defuzzification.
//!    A type-1 path backs the T1 baseline.
//! 3. [`similarity`] — per-window channel differences, the 9x9 similarity
//!    relation matrix, per-pixel similarity and the full-image map, with a
//!    memo cache keyed on exact difference triples. Euclidean-distance and
//!    type-1 baselines live here too.
//! 4. [`stego`] — thresholding to an indicator matrix, k-bit LSB embed and
//!    extract in a fixed channel-major traversal, and the binary sidecar
//!    key that makes extraction self-contained.
//! 5. [`metrics`] — MSE/PSNR/SSIM/UQI between cover and stego images plus
//!    the CSV/JSON report row used by the sweep harness.
//!
//! [`synth`] generates deterministic covers and payloads so sweeps are
//! reproducible without redistributing standard test images.

pub mod fuzzy;
pub mod img;
pub mod inference;
pub mod metrics;
pub mod stego;
pub mod similarity;
pub mod synth;

#[cfg(feature = "serde")]
pub mod config;

pub use fuzzy::{
    ColorTerm, ColorVocabulary, It2TriangularMf, MembershipInterval, SimilarityTerm,
    SimilarityVocabulary,
};
pub use img::RgbImage;
pub use inference::{InferenceEngine, Rule, RuleBase};
pub use metrics::MetricsReport;
pub use similarity::{CacheMode, ChannelDiff, SimilarityEvaluator, SimilarityMap, SimilarityMethod};
pub use stego::{EmbedConfig, IndicatorMatrix, StegoKey};
