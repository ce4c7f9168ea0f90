//! Toolkit configuration file.
//!
//! A TOML document can override the membership vocabularies (each term is
//! a name plus the five triangle parameters `[alpha_u, alpha_l, beta,
//! gamma_l, gamma_u]`), the rule base (27 lines of `"R G B -> S"` over term
//! names), the output discretization, the cache mode, the worker count and
//! the sweep defaults. Every section is optional; omitted sections keep
//! the built-in defaults. The whole document is validated on load.

use crate::fuzzy::{
    ColorTerm, ColorVocabulary, FuzzyError, It2TriangularMf, SimilarityTerm, SimilarityVocabulary,
};
use crate::inference::{InferenceEngine, InferenceError, Rule, RuleBase};
use crate::similarity::CacheMode;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bad term definition: {0}")]
    BadTerm(String),
    #[error("bad rule line '{0}': {1}")]
    BadRule(String, String),
    #[error("bad value: {0}")]
    BadValue(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Deserialize)]
struct RawTerm {
    name: String,
    mf: [f64; 5],
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    samples: Option<usize>,
    cache: Option<String>,
    workers: Option<usize>,
    k_values: Option<Vec<u8>>,
    thresholds: Option<Vec<f64>>,
    color_terms: Option<Vec<RawTerm>>,
    similarity_terms: Option<Vec<RawTerm>>,
    rules: Option<Vec<String>>,
}

/// Validated toolkit configuration.
#[derive(Debug, Clone)]
pub struct ToolkitConfig {
    pub color_vocab: ColorVocabulary,
    pub similarity_vocab: SimilarityVocabulary,
    pub rules: RuleBase,
    pub samples: usize,
    pub cache: CacheMode,
    /// 0 means "let the runtime pick".
    pub workers: usize,
    pub k_values: Vec<u8>,
    pub thresholds: Vec<f64>,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            color_vocab: ColorVocabulary::default(),
            similarity_vocab: SimilarityVocabulary::default(),
            rules: RuleBase::standard(),
            samples: InferenceEngine::DEFAULT_SAMPLES,
            cache: CacheMode::Lazy,
            workers: 0,
            k_values: vec![1, 2, 3, 4],
            thresholds: vec![0.75, 0.77, 0.80, 0.81],
        }
    }
}

impl ToolkitConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut config = Self::default();

        if let Some(samples) = raw.samples {
            if samples < 2 {
                return Err(ConfigError::BadValue(format!(
                    "samples must be at least 2, got {samples}"
                )));
            }
            config.samples = samples;
        }
        if let Some(cache) = raw.cache {
            config.cache = cache.parse().map_err(ConfigError::BadValue)?;
        }
        if let Some(workers) = raw.workers {
            config.workers = workers;
        }
        if let Some(ks) = raw.k_values {
            if ks.is_empty() || ks.iter().any(|k| !(1..=8).contains(k)) {
                return Err(ConfigError::BadValue(format!(
                    "k_values must be non-empty and within 1..=8, got {ks:?}"
                )));
            }
            config.k_values = ks;
        }
        if let Some(ths) = raw.thresholds {
            if ths.is_empty() || ths.iter().any(|t| !(0.0..=1.0).contains(t)) {
                return Err(ConfigError::BadValue(format!(
                    "thresholds must be non-empty and within [0, 1], got {ths:?}"
                )));
            }
            config.thresholds = ths;
        }
        if let Some(terms) = raw.color_terms {
            config.color_vocab = parse_color_terms(&terms)?;
        }
        if let Some(terms) = raw.similarity_terms {
            config.similarity_vocab = parse_similarity_terms(&terms)?;
        }
        if let Some(lines) = raw.rules {
            let rules: Result<Vec<Rule>, ConfigError> =
                lines.iter().map(|l| parse_rule_line(l)).collect();
            config.rules = RuleBase::new(rules?)?;
        }
        Ok(config)
    }

    /// Builds the inference engine this configuration describes.
    pub fn build_engine(&self) -> Result<InferenceEngine, InferenceError> {
        InferenceEngine::new(
            self.rules.clone(),
            self.color_vocab.clone(),
            self.similarity_vocab.clone(),
            self.samples,
        )
    }
}

fn parse_mf(term: &RawTerm, domain: (f64, f64)) -> Result<It2TriangularMf, ConfigError> {
    let [au, al, b, gl, gu] = term.mf;
    It2TriangularMf::new(au, al, b, gl, gu, domain.0, domain.1).map_err(ConfigError::from)
}

fn parse_color_terms(terms: &[RawTerm]) -> Result<ColorVocabulary, ConfigError> {
    let mut mfs: [Option<It2TriangularMf>; 3] = [None; 3];
    for term in terms {
        let Some(t) = ColorTerm::parse(&term.name) else {
            return Err(ConfigError::BadTerm(format!(
                "unknown color term '{}'; expected L, M or H",
                term.name
            )));
        };
        if mfs[t.index()].is_some() {
            return Err(ConfigError::BadTerm(format!(
                "color term '{}' defined twice",
                term.name
            )));
        }
        mfs[t.index()] = Some(parse_mf(term, ColorVocabulary::DOMAIN)?);
    }
    let mfs: Vec<It2TriangularMf> = mfs
        .into_iter()
        .enumerate()
        .map(|(i, mf)| {
            mf.ok_or_else(|| {
                ConfigError::BadTerm(format!(
                    "color term '{}' missing",
                    ColorTerm::ALL[i].short_name()
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(ColorVocabulary::new([mfs[0], mfs[1], mfs[2]])?)
}

fn parse_similarity_terms(terms: &[RawTerm]) -> Result<SimilarityVocabulary, ConfigError> {
    let mut mfs: [Option<It2TriangularMf>; 5] = [None; 5];
    for term in terms {
        let Some(t) = SimilarityTerm::parse(&term.name) else {
            return Err(ConfigError::BadTerm(format!(
                "unknown similarity term '{}'; expected NS, SS, MS, QS or ES",
                term.name
            )));
        };
        if mfs[t.index()].is_some() {
            return Err(ConfigError::BadTerm(format!(
                "similarity term '{}' defined twice",
                term.name
            )));
        }
        mfs[t.index()] = Some(parse_mf(term, SimilarityVocabulary::DOMAIN)?);
    }
    let mfs: Vec<It2TriangularMf> = mfs
        .into_iter()
        .enumerate()
        .map(|(i, mf)| {
            mf.ok_or_else(|| {
                ConfigError::BadTerm(format!(
                    "similarity term '{}' missing",
                    SimilarityTerm::ALL[i].short_name()
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SimilarityVocabulary::new([
        mfs[0], mfs[1], mfs[2], mfs[3], mfs[4],
    ])?)
}

/// Parses one `"R G B -> S"` rule line, e.g. `"L M H -> MS"`.
pub fn parse_rule_line(line: &str) -> Result<Rule, ConfigError> {
    let bad = |why: &str| ConfigError::BadRule(line.to_string(), why.to_string());
    let (lhs, rhs) = line
        .split_once("->")
        .ok_or_else(|| bad("missing '->' separator"))?;
    let antecedent: Vec<&str> = lhs.split_whitespace().collect();
    if antecedent.len() != 3 {
        return Err(bad("antecedent needs exactly three terms"));
    }
    let mut terms = [ColorTerm::Low; 3];
    for (i, name) in antecedent.iter().enumerate() {
        terms[i] = ColorTerm::parse(name)
            .ok_or_else(|| bad(&format!("unknown color term '{name}'")))?;
    }
    let consequent = SimilarityTerm::parse(rhs.trim())
        .ok_or_else(|| bad(&format!("unknown similarity term '{}'", rhs.trim())))?;
    Ok(Rule {
        antecedent: terms,
        consequent,
    })
}
