//! Interval type-2 triangular membership functions and linguistic vocabularies.
//!
//! An IT2 membership function maps a crisp input to an interval
//! `[lower, upper]` of membership grades instead of a single number; the
//! band between the two bounding triangles is the footprint of uncertainty
//! (FOU). Five parameters describe one MF: the lower triangle
//! `(alpha_l, beta, gamma_l)` and the upper support ends `(alpha_u, gamma_u)`
//! sharing the same apex `beta`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FuzzyError {
    #[error("membership parameters out of order: need alpha_u <= alpha_l <= beta <= gamma_l <= gamma_u, got ({0}, {1}, {2}, {3}, {4})")]
    BadParameters(f64, f64, f64, f64, f64),
    #[error("input {x} outside the membership domain [{min}, {max}]")]
    OutOfDomain { x: f64, min: f64, max: f64 },
    #[error("empty domain: domain_min {0} >= domain_max {1}")]
    BadDomain(f64, f64),
    #[error("vocabulary does not cover its domain: no term has positive upper membership at {0}")]
    CoverageGap(f64),
}

/// A membership grade interval `[lower, upper]`, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipInterval {
    pub lower: f64,
    pub upper: f64,
}

impl MembershipInterval {
    /// Clamps both grades into `[0, 1]` and orders them.
    pub fn new(lower: f64, upper: f64) -> Self {
        let lower = lower.clamp(0.0, 1.0);
        let upper = upper.clamp(0.0, 1.0);
        debug_assert!(lower <= upper + 1e-12);
        Self {
            lower: lower.min(upper),
            upper,
        }
    }
}

/// Interval type-2 triangular membership function.
///
/// The lower triangle is `(alpha_l, beta, gamma_l)`, the upper triangle
/// `(alpha_u, beta, gamma_u)`; parameter ordering guarantees the upper MF
/// dominates the lower one pointwise. Shoulder MFs sit at domain ends:
/// `alpha_u == alpha_l == beta` is a left shoulder and
/// `beta == gamma_l == gamma_u` a right shoulder, evaluating to 1 on the
/// flat side. Support ends may lie outside the domain; evaluation is only
/// defined for inputs inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct It2TriangularMf {
    pub alpha_u: f64,
    pub alpha_l: f64,
    pub beta: f64,
    pub gamma_l: f64,
    pub gamma_u: f64,
    pub domain_min: f64,
    pub domain_max: f64,
}

impl It2TriangularMf {
    pub fn new(
        alpha_u: f64,
        alpha_l: f64,
        beta: f64,
        gamma_l: f64,
        gamma_u: f64,
        domain_min: f64,
        domain_max: f64,
    ) -> Result<Self, FuzzyError> {
        let ordered =
            alpha_u <= alpha_l && alpha_l <= beta && beta <= gamma_l && gamma_l <= gamma_u;
        if !ordered {
            return Err(FuzzyError::BadParameters(
                alpha_u, alpha_l, beta, gamma_l, gamma_u,
            ));
        }
        if domain_min >= domain_max || domain_min.is_nan() || domain_max.is_nan() {
            return Err(FuzzyError::BadDomain(domain_min, domain_max));
        }
        Ok(Self {
            alpha_u,
            alpha_l,
            beta,
            gamma_l,
            gamma_u,
            domain_min,
            domain_max,
        })
    }

    /// Zero-FOU MF with a single triangle `(a, b, c)`.
    pub fn degenerate(a: f64, b: f64, c: f64, domain_min: f64, domain_max: f64) -> Result<Self, FuzzyError> {
        Self::new(a, a, b, c, c, domain_min, domain_max)
    }

    /// Collapses the FOU to its midline: a zero-FOU MF with the same apex
    /// and flank midpoints. Used to derive type-1 vocabularies.
    pub fn principal(&self) -> Self {
        let a = 0.5 * (self.alpha_u + self.alpha_l);
        let c = 0.5 * (self.gamma_l + self.gamma_u);
        Self {
            alpha_u: a,
            alpha_l: a,
            beta: self.beta,
            gamma_l: c,
            gamma_u: c,
            domain_min: self.domain_min,
            domain_max: self.domain_max,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha_u == self.alpha_l && self.gamma_l == self.gamma_u
    }

    fn is_left_shoulder(&self) -> bool {
        self.alpha_u == self.alpha_l && self.alpha_l == self.beta
    }

    fn is_right_shoulder(&self) -> bool {
        self.beta == self.gamma_l && self.gamma_l == self.gamma_u
    }

    /// Evaluates both bounding triangles at `x`.
    pub fn evaluate(&self, x: f64) -> Result<MembershipInterval, FuzzyError> {
        if !(self.domain_min..=self.domain_max).contains(&x) {
            return Err(FuzzyError::OutOfDomain {
                x,
                min: self.domain_min,
                max: self.domain_max,
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Same as [`evaluate`](Self::evaluate) without the domain check; used
    /// on hot paths where inputs are integers inside the domain by
    /// construction.
    pub fn evaluate_unchecked(&self, x: f64) -> MembershipInterval {
        if self.is_left_shoulder() && x <= self.beta {
            return MembershipInterval::new(1.0, 1.0);
        }
        if self.is_right_shoulder() && x >= self.beta {
            return MembershipInterval::new(1.0, 1.0);
        }
        let lower = triangle(self.alpha_l, self.beta, self.gamma_l, x);
        let upper = triangle(self.alpha_u, self.beta, self.gamma_u, x);
        MembershipInterval::new(lower, upper)
    }

    /// Lower-triangle membership only. This is exactly the `lower`
    /// component of [`evaluate`](Self::evaluate); on a zero-FOU MF it is the
    /// type-1 membership grade.
    pub fn evaluate_t1(&self, x: f64) -> Result<f64, FuzzyError> {
        Ok(self.evaluate(x)?.lower)
    }
}

/// Piecewise-linear triangle `(a, b, c)` at `x`, apex grade 1 at `b`.
fn triangle(a: f64, b: f64, c: f64, x: f64) -> f64 {
    if x < a || x > c {
        0.0
    } else if x == b {
        1.0
    } else if x < b {
        (x - a) / (b - a)
    } else {
        (c - x) / (c - b)
    }
}

/// Channel-difference terms: how far apart two gray levels are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorTerm {
    Low,
    Medium,
    High,
}

impl ColorTerm {
    pub const ALL: [ColorTerm; 3] = [ColorTerm::Low, ColorTerm::Medium, ColorTerm::High];

    pub fn index(self) -> usize {
        match self {
            ColorTerm::Low => 0,
            ColorTerm::Medium => 1,
            ColorTerm::High => 2,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ColorTerm::Low => "L",
            ColorTerm::Medium => "M",
            ColorTerm::High => "H",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L" | "LOW" => Some(ColorTerm::Low),
            "M" | "MEDIUM" => Some(ColorTerm::Medium),
            "H" | "HIGH" => Some(ColorTerm::High),
            _ => None,
        }
    }
}

/// Similarity terms, from "not similar" to "exactly similar".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityTerm {
    NotSimilar,
    SlightlySimilar,
    ModeratelySimilar,
    QuiteSimilar,
    ExactlySimilar,
}

impl SimilarityTerm {
    pub const ALL: [SimilarityTerm; 5] = [
        SimilarityTerm::NotSimilar,
        SimilarityTerm::SlightlySimilar,
        SimilarityTerm::ModeratelySimilar,
        SimilarityTerm::QuiteSimilar,
        SimilarityTerm::ExactlySimilar,
    ];

    pub fn index(self) -> usize {
        match self {
            SimilarityTerm::NotSimilar => 0,
            SimilarityTerm::SlightlySimilar => 1,
            SimilarityTerm::ModeratelySimilar => 2,
            SimilarityTerm::QuiteSimilar => 3,
            SimilarityTerm::ExactlySimilar => 4,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SimilarityTerm::NotSimilar => "NS",
            SimilarityTerm::SlightlySimilar => "SS",
            SimilarityTerm::ModeratelySimilar => "MS",
            SimilarityTerm::QuiteSimilar => "QS",
            SimilarityTerm::ExactlySimilar => "ES",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NS" => Some(SimilarityTerm::NotSimilar),
            "SS" => Some(SimilarityTerm::SlightlySimilar),
            "MS" => Some(SimilarityTerm::ModeratelySimilar),
            "QS" => Some(SimilarityTerm::QuiteSimilar),
            "ES" => Some(SimilarityTerm::ExactlySimilar),
            _ => None,
        }
    }
}

/// The three channel-difference MFs over gray-level differences `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorVocabulary {
    mfs: [It2TriangularMf; 3],
}

impl ColorVocabulary {
    pub const DOMAIN: (f64, f64) = (0.0, 255.0);

    pub fn new(mfs: [It2TriangularMf; 3]) -> Result<Self, FuzzyError> {
        let vocab = Self { mfs };
        vocab.check_coverage()?;
        Ok(vocab)
    }

    pub fn mf(&self, term: ColorTerm) -> &It2TriangularMf {
        &self.mfs[term.index()]
    }

    pub fn mfs(&self) -> &[It2TriangularMf; 3] {
        &self.mfs
    }

    /// Zero-FOU copy with each MF collapsed to its FOU midline.
    pub fn principal(&self) -> Self {
        Self {
            mfs: [
                self.mfs[0].principal(),
                self.mfs[1].principal(),
                self.mfs[2].principal(),
            ],
        }
    }

    fn check_coverage(&self) -> Result<(), FuzzyError> {
        check_coverage(&self.mfs, Self::DOMAIN.0, Self::DOMAIN.1)
    }
}

impl Default for ColorVocabulary {
    /// Apexes sit at representatives of the Low/Medium/High difference
    /// ranges; upper supports overlap so every difference in `[0, 255]`
    /// fires at least one rule.
    fn default() -> Self {
        let (lo, hi) = Self::DOMAIN;
        Self {
            mfs: [
                It2TriangularMf::new(0.0, 0.0, 0.0, 70.0, 110.0, lo, hi).unwrap(),
                It2TriangularMf::new(60.0, 90.0, 128.0, 166.0, 196.0, lo, hi).unwrap(),
                It2TriangularMf::new(145.0, 185.0, 255.0, 255.0, 255.0, lo, hi).unwrap(),
            ],
        }
    }
}

/// The five similarity MFs over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVocabulary {
    mfs: [It2TriangularMf; 5],
}

impl SimilarityVocabulary {
    pub const DOMAIN: (f64, f64) = (0.0, 1.0);

    pub fn new(mfs: [It2TriangularMf; 5]) -> Result<Self, FuzzyError> {
        let vocab = Self { mfs };
        vocab.check_coverage()?;
        Ok(vocab)
    }

    pub fn mf(&self, term: SimilarityTerm) -> &It2TriangularMf {
        &self.mfs[term.index()]
    }

    pub fn mfs(&self) -> &[It2TriangularMf; 5] {
        &self.mfs
    }

    pub fn principal(&self) -> Self {
        Self {
            mfs: [
                self.mfs[0].principal(),
                self.mfs[1].principal(),
                self.mfs[2].principal(),
                self.mfs[3].principal(),
                self.mfs[4].principal(),
            ],
        }
    }

    fn check_coverage(&self) -> Result<(), FuzzyError> {
        check_coverage(&self.mfs, Self::DOMAIN.0, Self::DOMAIN.1)
    }
}

impl Default for SimilarityVocabulary {
    /// Uniform five-term ladder: apexes at 0, 0.25, 0.5, 0.75, 1; lower
    /// triangles of half-width 0.20 inside upper triangles of half-width
    /// 0.30, shoulders at both domain ends.
    fn default() -> Self {
        let (lo, hi) = Self::DOMAIN;
        Self {
            mfs: [
                It2TriangularMf::new(0.0, 0.0, 0.0, 0.20, 0.30, lo, hi).unwrap(),
                It2TriangularMf::new(-0.05, 0.05, 0.25, 0.45, 0.55, lo, hi).unwrap(),
                It2TriangularMf::new(0.20, 0.30, 0.50, 0.70, 0.80, lo, hi).unwrap(),
                It2TriangularMf::new(0.45, 0.55, 0.75, 0.95, 1.05, lo, hi).unwrap(),
                It2TriangularMf::new(0.70, 0.80, 1.0, 1.0, 1.0, lo, hi).unwrap(),
            ],
        }
    }
}

/// Built-in channel-difference and similarity vocabularies.
pub fn default_vocabularies() -> (ColorVocabulary, SimilarityVocabulary) {
    (ColorVocabulary::default(), SimilarityVocabulary::default())
}

fn check_coverage(mfs: &[It2TriangularMf], lo: f64, hi: f64) -> Result<(), FuzzyError> {
    const GRID: usize = 2048;
    for i in 0..=GRID {
        let x = lo + (hi - lo) * i as f64 / GRID as f64;
        let covered = mfs.iter().any(|mf| mf.evaluate_unchecked(x).upper > 0.0);
        if !covered {
            return Err(FuzzyError::CoverageGap(x));
        }
    }
    Ok(())
}
