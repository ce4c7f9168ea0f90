//! Mamdani inference over interval type-2 sets with EKM type reduction.
//!
//! One inference takes the three channel-difference membership intervals,
//! fires the 27-rule base with a product t-norm, aggregates the scaled
//! consequents with pointwise maximum onto a discretized similarity domain,
//! reduces the resulting IT2 set to a centroid interval `[c_l, c_r]` with
//! the enhanced Karnik-Mendel switch-point iteration, and defuzzifies to
//! the interval midpoint. A scalar type-1 path (plain centroid) backs the
//! T1 baseline.

use crate::fuzzy::{
    ColorTerm, ColorVocabulary, FuzzyError, MembershipInterval, SimilarityTerm,
    SimilarityVocabulary,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("rule base invalid: {0}")]
    BadRuleBase(String),
    #[error("no rule fired for difference triple ({0}, {1}, {2}); the vocabulary does not cover its domain")]
    NoRuleFired(u8, u8, u8),
    #[error("discretized output set invalid: {0}")]
    BadDiscretization(String),
    #[error("output set is all-zero; nothing to type-reduce")]
    DegenerateOutput,
    #[error("output discretization needs at least 2 samples, got {0}")]
    BadSampleCount(usize),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// One fuzzy rule: a channel-difference term per channel implies a
/// similarity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: [ColorTerm; 3],
    pub consequent: SimilarityTerm,
}

/// The complete rule base: exactly one rule per antecedent combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBase {
    rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(rules: Vec<Rule>) -> Result<Self, InferenceError> {
        let mut seen = [[[false; 3]; 3]; 3];
        for rule in &rules {
            let [r, g, b] = rule.antecedent;
            let slot = &mut seen[r.index()][g.index()][b.index()];
            if *slot {
                return Err(InferenceError::BadRuleBase(format!(
                    "duplicate antecedent {} {} {}",
                    r.short_name(),
                    g.short_name(),
                    b.short_name()
                )));
            }
            *slot = true;
        }
        for r in ColorTerm::ALL {
            for g in ColorTerm::ALL {
                for b in ColorTerm::ALL {
                    if !seen[r.index()][g.index()][b.index()] {
                        return Err(InferenceError::BadRuleBase(format!(
                            "missing antecedent {} {} {}",
                            r.short_name(),
                            g.short_name(),
                            b.short_name()
                        )));
                    }
                }
            }
        }
        Ok(Self { rules })
    }

    /// The built-in 27-rule table. More channels in the High range push the
    /// consequent toward NotSimilar; all-Low differences are ExactlySimilar.
    pub fn standard() -> Self {
        use ColorTerm::*;
        use SimilarityTerm::*;
        const CONSEQUENTS: [SimilarityTerm; 27] = [
            ExactlySimilar,
            ExactlySimilar,
            QuiteSimilar,
            ExactlySimilar,
            QuiteSimilar,
            ModeratelySimilar,
            QuiteSimilar,
            ModeratelySimilar,
            SlightlySimilar,
            ExactlySimilar,
            QuiteSimilar,
            ModeratelySimilar,
            QuiteSimilar,
            ModeratelySimilar,
            SlightlySimilar,
            ModeratelySimilar,
            SlightlySimilar,
            NotSimilar,
            QuiteSimilar,
            ModeratelySimilar,
            SlightlySimilar,
            ModeratelySimilar,
            SlightlySimilar,
            NotSimilar,
            SlightlySimilar,
            NotSimilar,
            NotSimilar,
        ];
        let mut rules = Vec::with_capacity(27);
        let mut i = 0;
        for r in [Low, Medium, High] {
            for g in [Low, Medium, High] {
                for b in [Low, Medium, High] {
                    rules.push(Rule {
                        antecedent: [r, g, b],
                        consequent: CONSEQUENTS[i],
                    });
                    i += 1;
                }
            }
        }
        Self { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Product-t-norm firing strength interval of one rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiringInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Three-factor product in canonical (ascending) order. Rounding then no
/// longer depends on which channel supplied which factor, which keeps the
/// whole inference bit-identical under permutations of the difference
/// triple whenever the rule base is channel-symmetric; the dense cache
/// relies on that.
#[inline]
fn prod3(a: f64, b: f64, c: f64) -> f64 {
    // Multiplying the two smallest factors first fixes the rounding point;
    // within a pair, IEEE multiplication commutes exactly.
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if c <= hi {
        c * lo * hi
    } else {
        lo * hi * c
    }
}

/// Fuzzified inputs: a membership interval for each (channel, term) pair.
/// Outer index is the channel (R, G, B), inner the color term.
pub type ChannelMemberships = [[MembershipInterval; 3]; 3];

/// Fires every rule with the product t-norm over its three antecedent
/// memberships. Rules whose upper firing strength is zero are omitted.
/// Returns `(rule index, firing interval)` pairs in rule-base order.
pub fn fire_rules(
    rules: &RuleBase,
    inputs: &ChannelMemberships,
) -> Result<Vec<(usize, FiringInterval)>, InferenceError> {
    if rules.is_empty() {
        return Err(InferenceError::BadRuleBase("empty rule base".into()));
    }
    let mut fired = Vec::new();
    for (idx, rule) in rules.rules().iter().enumerate() {
        let [r, g, b] = rule.antecedent;
        let mr = inputs[0][r.index()];
        let mg = inputs[1][g.index()];
        let mb = inputs[2][b.index()];
        let upper = prod3(mr.upper, mg.upper, mb.upper);
        if upper == 0.0 {
            continue;
        }
        let lower = prod3(mr.lower, mg.lower, mb.lower);
        fired.push((idx, FiringInterval { lower, upper }));
    }
    Ok(fired)
}

/// An IT2 set sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedIt2Set {
    xs: Vec<f64>,
    mu_lower: Vec<f64>,
    mu_upper: Vec<f64>,
}

impl DiscretizedIt2Set {
    pub fn new(xs: Vec<f64>, mu_lower: Vec<f64>, mu_upper: Vec<f64>) -> Result<Self, InferenceError> {
        if xs.len() < 2 {
            return Err(InferenceError::BadSampleCount(xs.len()));
        }
        if xs.len() != mu_lower.len() || xs.len() != mu_upper.len() {
            return Err(InferenceError::BadDiscretization(format!(
                "length mismatch: {} xs, {} lower, {} upper",
                xs.len(),
                mu_lower.len(),
                mu_upper.len()
            )));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InferenceError::BadDiscretization(
                "sample points must be strictly increasing".into(),
            ));
        }
        for i in 0..xs.len() {
            let (lo, up) = (mu_lower[i], mu_upper[i]);
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&up) || lo > up {
                return Err(InferenceError::BadDiscretization(format!(
                    "membership pair ({lo}, {up}) at sample {i} out of order or range"
                )));
            }
        }
        if mu_upper.iter().sum::<f64>() <= 0.0 {
            return Err(InferenceError::DegenerateOutput);
        }
        Ok(Self {
            xs,
            mu_lower,
            mu_upper,
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn mu_lower(&self) -> &[f64] {
        &self.mu_lower
    }

    pub fn mu_upper(&self) -> &[f64] {
        &self.mu_upper
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Scales each fired rule's consequent by its firing interval (product
/// implication) and aggregates across rules with pointwise maximum, on
/// `samples` uniform points of `[0, 1]`.
pub fn aggregate_output(
    rules: &RuleBase,
    fired: &[(usize, FiringInterval)],
    vocabulary: &SimilarityVocabulary,
    samples: usize,
) -> Result<DiscretizedIt2Set, InferenceError> {
    if samples < 2 {
        return Err(InferenceError::BadSampleCount(samples));
    }
    if fired.is_empty() {
        return Err(InferenceError::BadDiscretization(
            "no fired rules to aggregate".into(),
        ));
    }
    // Group by consequent first: max(f1 * m, f2 * m) == max(f1, f2) * m for
    // m >= 0, so one scaled evaluation per term suffices.
    let mut strength = [FiringInterval {
        lower: 0.0,
        upper: 0.0,
    }; 5];
    for &(idx, f) in fired {
        let term = rules.rules()[idx].consequent.index();
        strength[term].lower = strength[term].lower.max(f.lower);
        strength[term].upper = strength[term].upper.max(f.upper);
    }
    let xs: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let mut mu_lower = vec![0.0f64; samples];
    let mut mu_upper = vec![0.0f64; samples];
    for (term_idx, f) in strength.iter().enumerate() {
        if f.upper == 0.0 {
            continue;
        }
        let mf = &vocabulary.mfs()[term_idx];
        for (i, &x) in xs.iter().enumerate() {
            let m = mf.evaluate_unchecked(x);
            mu_lower[i] = mu_lower[i].max(f.lower * m.lower);
            mu_upper[i] = mu_upper[i].max(f.upper * m.upper);
        }
    }
    DiscretizedIt2Set::new(xs, mu_lower, mu_upper)
}

/// Centroid interval of a type-reduced IT2 set with the switch points the
/// EKM iteration converged to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroidInterval {
    pub c_l: f64,
    pub c_r: f64,
    pub switch_left: usize,
    pub switch_right: usize,
}

/// Left centroid endpoint: minimizes the weighted average over all
/// embedded type-1 sets. Weights are the upper membership up to the switch
/// point and the lower membership after it; the switch index is found by
/// the EKM iteration starting from `round(N / 2.4)`.
pub fn ekm_left(set: &DiscretizedIt2Set) -> Result<(f64, usize), InferenceError> {
    ekm_endpoint(set.xs(), set.mu_lower(), set.mu_upper(), Side::Left).map(|r| (r.0, r.1))
}

/// Right centroid endpoint: the mirror maximization, lower weights up to
/// the switch point, upper after it, starting from `round(N / 1.7)`.
pub fn ekm_right(set: &DiscretizedIt2Set) -> Result<(f64, usize), InferenceError> {
    ekm_endpoint(set.xs(), set.mu_lower(), set.mu_upper(), Side::Right).map(|r| (r.0, r.1))
}

/// [`ekm_left`] plus the number of switch-point iterations taken.
pub fn ekm_left_counted(set: &DiscretizedIt2Set) -> Result<(f64, usize, usize), InferenceError> {
    ekm_endpoint(set.xs(), set.mu_lower(), set.mu_upper(), Side::Left)
}

/// [`ekm_right`] plus the number of switch-point iterations taken.
pub fn ekm_right_counted(set: &DiscretizedIt2Set) -> Result<(f64, usize, usize), InferenceError> {
    ekm_endpoint(set.xs(), set.mu_lower(), set.mu_upper(), Side::Right)
}

/// Midpoint of the centroid interval, clamped to the unit interval.
pub fn defuzzify(c: &CentroidInterval) -> f64 {
    (0.5 * (c.c_l + c.c_r)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

/// Weighted average with upper weights on one side of switch index `t`
/// (inclusive) and lower weights on the other. `t == usize::MAX` encodes
/// "no index uses the near-side weight".
fn switch_average(xs: &[f64], lo: &[f64], up: &[f64], t: usize, side: Side) -> Option<f64> {
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..xs.len() {
        let near = t != usize::MAX && i <= t;
        let w = match (side, near) {
            (Side::Left, true) | (Side::Right, false) => up[i],
            (Side::Left, false) | (Side::Right, true) => lo[i],
        };
        a += xs[i] * w;
        b += w;
    }
    (b > 0.0).then(|| a / b)
}

/// Exhaustive scan over every switch configuration (including the all-lower
/// and all-upper ones), skipping configurations with zero total weight.
/// Exact but O(N^2); used when the EKM iteration hits a zero denominator,
/// which only happens for sparse lower memberships.
fn switch_scan(xs: &[f64], lo: &[f64], up: &[f64], side: Side) -> Result<(f64, usize), InferenceError> {
    let n = xs.len();
    let mut best: Option<(f64, usize)> = None;
    for t in std::iter::once(usize::MAX).chain(0..n) {
        let Some(c) = switch_average(xs, lo, up, t, side) else {
            continue;
        };
        let better = match (side, best) {
            (_, None) => true,
            (Side::Left, Some((bc, _))) => c < bc,
            (Side::Right, Some((bc, _))) => c > bc,
        };
        if better {
            best = Some((c, if t == usize::MAX { 0 } else { t.min(n - 2) }));
        }
    }
    best.ok_or(InferenceError::DegenerateOutput)
}

fn ekm_endpoint(
    xs: &[f64],
    lo: &[f64],
    up: &[f64],
    side: Side,
) -> Result<(f64, usize, usize), InferenceError> {
    let n = xs.len();
    if n < 2 {
        return Err(InferenceError::BadSampleCount(n));
    }
    if up.iter().sum::<f64>() <= 0.0 {
        return Err(InferenceError::DegenerateOutput);
    }

    let divisor = match side {
        Side::Left => 2.4,
        Side::Right => 1.7,
    };
    // 1-based switch index in [1, N-1], then to 0-based.
    let mut k = ((n as f64 / divisor).round() as usize).clamp(1, n - 1) - 1;

    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..n {
        let w = match side {
            Side::Left => {
                if i <= k {
                    up[i]
                } else {
                    lo[i]
                }
            }
            Side::Right => {
                if i <= k {
                    lo[i]
                } else {
                    up[i]
                }
            }
        };
        a += xs[i] * w;
        b += w;
    }

    for iteration in 0..=n {
        if b <= 0.0 || !b.is_finite() {
            return switch_scan(xs, lo, up, side).map(|r| (r.0, r.1, iteration));
        }
        let c = a / b;
        if !c.is_finite() {
            return switch_scan(xs, lo, up, side).map(|r| (r.0, r.1, iteration));
        }
        // Locate c in the sample grid: k' such that x[k'] <= c < x[k'+1],
        // equality resolved on the left; c == x[n-1] clamps to the last
        // interval.
        let kp = match xs.partition_point(|&x| x <= c) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        if kp == k {
            return Ok((c, k, iteration + 1));
        }
        // Indices between the old and new switch point change weight class.
        let (lo_i, hi_i) = (k.min(kp) + 1, k.max(kp));
        let mut da = 0.0;
        let mut db = 0.0;
        for i in lo_i..=hi_i {
            let d = up[i] - lo[i];
            da += xs[i] * d;
            db += d;
        }
        let moving_right = kp > k;
        let gains_upper = match side {
            Side::Left => moving_right,
            Side::Right => !moving_right,
        };
        if gains_upper {
            a += da;
            b += db;
        } else {
            a -= da;
            b -= db;
        }
        k = kp;
    }
    // The switch point moves monotonically, so the loop above terminates
    // within N steps for well-formed sets.
    switch_scan(xs, lo, up, side).map(|r| (r.0, r.1, n + 1))
}

/// Builds an inference engine from a rule base, the two vocabularies and
/// the output discretization, precomputing every per-gray-level membership
/// and per-term consequent table the hot path needs.
#[derive(Debug, Clone)]
pub struct InferenceEngine {
    rules: RuleBase,
    color_vocab: ColorVocabulary,
    sim_vocab: SimilarityVocabulary,
    samples: usize,
    /// Output grid, `samples` uniform points of [0, 1].
    xs: Vec<f64>,
    /// Consequent term index per antecedent combination.
    consequent_of: [[[usize; 3]; 3]; 3],
    /// IT2 memberships for every integer gray-level difference.
    diff_memberships: Vec<[MembershipInterval; 3]>,
    /// Type-1 (principal) memberships for every integer difference.
    diff_memberships_t1: Vec<[f64; 3]>,
    /// Discretized similarity-term MFs: `[term][sample]`.
    cons_lower: [Vec<f64>; 5],
    cons_upper: [Vec<f64>; 5],
    cons_t1: [Vec<f64>; 5],
}

/// Reusable aggregation buffers for batch inference.
#[derive(Debug, Clone)]
pub struct Scratch {
    mu_lower: Vec<f64>,
    mu_upper: Vec<f64>,
}

impl InferenceEngine {
    pub const DEFAULT_SAMPLES: usize = 101;

    pub fn standard() -> Self {
        Self::new(
            RuleBase::standard(),
            ColorVocabulary::default(),
            SimilarityVocabulary::default(),
            Self::DEFAULT_SAMPLES,
        )
        .expect("built-in configuration is valid")
    }

    pub fn new(
        rules: RuleBase,
        color_vocab: ColorVocabulary,
        sim_vocab: SimilarityVocabulary,
        samples: usize,
    ) -> Result<Self, InferenceError> {
        if samples < 2 {
            return Err(InferenceError::BadSampleCount(samples));
        }
        let mut consequent_of = [[[0usize; 3]; 3]; 3];
        for rule in rules.rules() {
            let [r, g, b] = rule.antecedent;
            consequent_of[r.index()][g.index()][b.index()] = rule.consequent.index();
        }

        let color_t1 = color_vocab.principal();
        let mut diff_memberships = Vec::with_capacity(256);
        let mut diff_memberships_t1 = Vec::with_capacity(256);
        for d in 0..=255u32 {
            let x = d as f64;
            let mut it2 = [MembershipInterval::new(0.0, 0.0); 3];
            let mut t1 = [0.0; 3];
            for term in ColorTerm::ALL {
                it2[term.index()] = color_vocab.mf(term).evaluate_unchecked(x);
                t1[term.index()] = color_t1.mf(term).evaluate_unchecked(x).lower;
            }
            diff_memberships.push(it2);
            diff_memberships_t1.push(t1);
        }

        let xs: Vec<f64> = (0..samples)
            .map(|i| i as f64 / (samples - 1) as f64)
            .collect();
        let sim_t1 = sim_vocab.principal();
        let mut cons_lower: [Vec<f64>; 5] = Default::default();
        let mut cons_upper: [Vec<f64>; 5] = Default::default();
        let mut cons_t1: [Vec<f64>; 5] = Default::default();
        for term in SimilarityTerm::ALL {
            let i = term.index();
            cons_lower[i] = xs
                .iter()
                .map(|&x| sim_vocab.mf(term).evaluate_unchecked(x).lower)
                .collect();
            cons_upper[i] = xs
                .iter()
                .map(|&x| sim_vocab.mf(term).evaluate_unchecked(x).upper)
                .collect();
            cons_t1[i] = xs
                .iter()
                .map(|&x| sim_t1.mf(term).evaluate_unchecked(x).lower)
                .collect();
        }

        Ok(Self {
            rules,
            color_vocab,
            sim_vocab,
            samples,
            xs,
            consequent_of,
            diff_memberships,
            diff_memberships_t1,
            cons_lower,
            cons_upper,
            cons_t1,
        })
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn color_vocabulary(&self) -> &ColorVocabulary {
        &self.color_vocab
    }

    pub fn similarity_vocabulary(&self) -> &SimilarityVocabulary {
        &self.sim_vocab
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            mu_lower: vec![0.0; self.samples],
            mu_upper: vec![0.0; self.samples],
        }
    }

    /// Memberships of an integer gray-level difference against the three
    /// color terms, one interval triple per channel.
    pub fn fuzzify(&self, diff: [u8; 3]) -> ChannelMemberships {
        [
            self.diff_memberships[diff[0] as usize],
            self.diff_memberships[diff[1] as usize],
            self.diff_memberships[diff[2] as usize],
        ]
    }

    /// Full IT2 pipeline for one difference triple: fuzzify, fire, aggregate,
    /// type-reduce, defuzzify.
    pub fn infer_it2(&self, diff: [u8; 3]) -> Result<f64, InferenceError> {
        self.infer_it2_with(&mut self.scratch(), diff)
    }

    pub fn infer_it2_with(&self, scratch: &mut Scratch, diff: [u8; 3]) -> Result<f64, InferenceError> {
        // Max firing interval per consequent term; grouping before scaling
        // is exact because scaling by a non-negative factor is monotone.
        let mr = &self.diff_memberships[diff[0] as usize];
        let mg = &self.diff_memberships[diff[1] as usize];
        let mb = &self.diff_memberships[diff[2] as usize];
        let mut strength = [(0.0f64, 0.0f64); 5];
        let mut any = false;
        for (ri, r) in mr.iter().enumerate() {
            if r.upper == 0.0 {
                continue;
            }
            for (gi, g) in mg.iter().enumerate() {
                if g.upper == 0.0 {
                    continue;
                }
                for (bi, b) in mb.iter().enumerate() {
                    if b.upper == 0.0 {
                        continue;
                    }
                    let upper = prod3(r.upper, g.upper, b.upper);
                    let lower = prod3(r.lower, g.lower, b.lower);
                    let t = self.consequent_of[ri][gi][bi];
                    strength[t].0 = strength[t].0.max(lower);
                    strength[t].1 = strength[t].1.max(upper);
                    any = true;
                }
            }
        }
        if !any {
            return Err(InferenceError::NoRuleFired(diff[0], diff[1], diff[2]));
        }

        scratch.mu_lower.iter_mut().for_each(|v| *v = 0.0);
        scratch.mu_upper.iter_mut().for_each(|v| *v = 0.0);
        let mut total_upper = 0.0;
        for (t, &(fl, fu)) in strength.iter().enumerate() {
            if fu == 0.0 {
                continue;
            }
            let lo_t = &self.cons_lower[t];
            let up_t = &self.cons_upper[t];
            for i in 0..self.samples {
                scratch.mu_lower[i] = scratch.mu_lower[i].max(fl * lo_t[i]);
                let u = fu * up_t[i];
                scratch.mu_upper[i] = scratch.mu_upper[i].max(u);
            }
        }
        for &u in scratch.mu_upper.iter() {
            total_upper += u;
        }
        if total_upper <= 0.0 {
            return Err(InferenceError::DegenerateOutput);
        }

        let (c_l, _, _) = ekm_endpoint(&self.xs, &scratch.mu_lower, &scratch.mu_upper, Side::Left)?;
        let (c_r, _, _) = ekm_endpoint(&self.xs, &scratch.mu_lower, &scratch.mu_upper, Side::Right)?;
        Ok((0.5 * (c_l + c_r)).clamp(0.0, 1.0))
    }

    /// Type-1 baseline: scalar product Mamdani on the principal (zero-FOU)
    /// vocabularies, max aggregation, ordinary centroid.
    pub fn infer_t1(&self, diff: [u8; 3]) -> Result<f64, InferenceError> {
        self.infer_t1_with(&mut self.scratch(), diff)
    }

    pub fn infer_t1_with(&self, scratch: &mut Scratch, diff: [u8; 3]) -> Result<f64, InferenceError> {
        let mr = &self.diff_memberships_t1[diff[0] as usize];
        let mg = &self.diff_memberships_t1[diff[1] as usize];
        let mb = &self.diff_memberships_t1[diff[2] as usize];
        let mut strength = [0.0f64; 5];
        let mut any = false;
        for (ri, &r) in mr.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for (gi, &g) in mg.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                for (bi, &b) in mb.iter().enumerate() {
                    if b == 0.0 {
                        continue;
                    }
                    let t = self.consequent_of[ri][gi][bi];
                    strength[t] = strength[t].max(prod3(r, g, b));
                    any = true;
                }
            }
        }
        if !any {
            return Err(InferenceError::NoRuleFired(diff[0], diff[1], diff[2]));
        }

        scratch.mu_upper.iter_mut().for_each(|v| *v = 0.0);
        for (t, &f) in strength.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            let mf_t = &self.cons_t1[t];
            for (slot, &m) in scratch.mu_upper.iter_mut().zip(mf_t) {
                *slot = slot.max(f * m);
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.samples {
            num += self.xs[i] * scratch.mu_upper[i];
            den += scratch.mu_upper[i];
        }
        if den <= 0.0 {
            return Err(InferenceError::DegenerateOutput);
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn interval(lower: f64, upper: f64) -> MembershipInterval {
        MembershipInterval::new(lower, upper)
    }

    fn set(xs: &[f64], lo: &[f64], up: &[f64]) -> DiscretizedIt2Set {
        DiscretizedIt2Set::new(xs.to_vec(), lo.to_vec(), up.to_vec()).unwrap()
    }

    /// Brute force over every vertex assignment of the weight box
    /// `prod_i {lo_i, up_i}`; exact reference for the EKM endpoints.
    fn enumerate_centroid(xs: &[f64], lo: &[f64], up: &[f64]) -> (f64, f64) {
        let n = xs.len();
        assert!(n <= 16, "enumeration only for small sets");
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for mask in 0u32..(1 << n) {
            let mut a = 0.0;
            let mut b = 0.0;
            for i in 0..n {
                let w = if mask & (1 << i) != 0 { up[i] } else { lo[i] };
                a += xs[i] * w;
                b += w;
            }
            if b > 0.0 {
                let c = a / b;
                min = min.min(c);
                max = max.max(c);
            }
        }
        (min, max)
    }

    #[test]
    fn standard_rulebase_matches_the_table() {
        let rb = RuleBase::standard();
        assert_eq!(rb.len(), 27);
        RuleBase::new(rb.rules().to_vec()).unwrap();
        use ColorTerm::*;
        use SimilarityTerm::*;
        let find = |ant: [ColorTerm; 3]| {
            rb.rules()
                .iter()
                .find(|r| r.antecedent == ant)
                .unwrap()
                .consequent
        };
        assert_eq!(find([Low, Low, Low]), ExactlySimilar);
        assert_eq!(find([Low, Low, High]), QuiteSimilar);
        assert_eq!(find([Medium, Medium, Medium]), ModeratelySimilar);
        assert_eq!(find([Medium, High, High]), NotSimilar);
        assert_eq!(find([High, High, Low]), SlightlySimilar);
        assert_eq!(find([High, High, High]), NotSimilar);
        // Consequent depends only on the multiset of antecedent terms.
        for r in rb.rules() {
            let mut sorted = r.antecedent;
            sorted.sort_by_key(|t| t.index());
            assert_eq!(find(sorted), r.consequent);
        }
    }

    #[test]
    fn duplicate_and_missing_antecedents_rejected() {
        let mut rules = RuleBase::standard().rules().to_vec();
        rules[1].antecedent = rules[0].antecedent;
        assert!(matches!(
            RuleBase::new(rules),
            Err(InferenceError::BadRuleBase(_))
        ));
        let rules = RuleBase::standard().rules()[..26].to_vec();
        assert!(matches!(
            RuleBase::new(rules),
            Err(InferenceError::BadRuleBase(_))
        ));
    }

    #[test]
    fn firing_is_the_product_of_antecedent_memberships() {
        let rb = RuleBase::standard();
        let one = interval(1.0, 1.0);
        let inputs: ChannelMemberships = [[one; 3]; 3];
        let fired = fire_rules(&rb, &inputs).unwrap();
        // Every rule fires at full strength when every membership is {1,1}.
        assert_eq!(fired.len(), 27);
        assert!(fired
            .iter()
            .all(|(_, f)| f.lower == 1.0 && f.upper == 1.0));

        // Hand product: {0.26316, 0.58824} x {1, 1} x {0.5, 0.7}.
        let zero = interval(0.0, 0.0);
        let mut inputs: ChannelMemberships = [[zero; 3]; 3];
        inputs[0][0] = interval(0.26316, 0.58824);
        inputs[1][0] = one;
        inputs[2][0] = interval(0.5, 0.7);
        let fired = fire_rules(&rb, &inputs).unwrap();
        assert_eq!(fired.len(), 1); // only (L, L, L) has all-nonzero antecedents
        let f = fired[0].1;
        assert!((f.lower - 0.13158).abs() < 1e-9);
        assert!((f.upper - 0.411768).abs() < 1e-9);
    }

    #[test]
    fn zero_upper_membership_omits_the_rule() {
        let rb = RuleBase::standard();
        let zero = interval(0.0, 0.0);
        let inputs: ChannelMemberships = [[zero; 3]; 3];
        assert!(fire_rules(&rb, &inputs).unwrap().is_empty());
    }

    #[test]
    fn single_full_rule_reproduces_its_consequent() {
        let rb = RuleBase::standard();
        let vocab = SimilarityVocabulary::default();
        // Rule index 0 is (L,L,L) -> ES.
        let fired = vec![(
            0usize,
            FiringInterval {
                lower: 1.0,
                upper: 1.0,
            },
        )];
        let out = aggregate_output(&rb, &fired, &vocab, 101).unwrap();
        let es = vocab.mf(SimilarityTerm::ExactlySimilar);
        for (i, &x) in out.xs().iter().enumerate() {
            let m = es.evaluate_unchecked(x);
            assert_eq!(out.mu_lower()[i], m.lower);
            assert_eq!(out.mu_upper()[i], m.upper);
        }
    }

    #[test]
    fn half_strength_rule_scales_its_consequent() {
        let rb = RuleBase::standard();
        let vocab = SimilarityVocabulary::default();
        // (M,M,M) -> MS is rule index 13.
        assert_eq!(
            rb.rules()[13].antecedent,
            [ColorTerm::Medium, ColorTerm::Medium, ColorTerm::Medium]
        );
        let fired = vec![(
            13usize,
            FiringInterval {
                lower: 0.5,
                upper: 0.5,
            },
        )];
        let out = aggregate_output(&rb, &fired, &vocab, 101).unwrap();
        let ms = vocab.mf(SimilarityTerm::ModeratelySimilar);
        for (i, &x) in out.xs().iter().enumerate() {
            let m = ms.evaluate_unchecked(x);
            assert_eq!(out.mu_lower()[i], 0.5 * m.lower);
            assert_eq!(out.mu_upper()[i], 0.5 * m.upper);
        }
    }

    #[test]
    fn two_rules_aggregate_to_the_pointwise_max() {
        let rb = RuleBase::standard();
        let vocab = SimilarityVocabulary::default();
        // ES at {0.3, 0.4} (rule 0) and QS at {0.6, 0.8} (rule 2 = L,L,H -> QS).
        let fired = vec![
            (
                0usize,
                FiringInterval {
                    lower: 0.3,
                    upper: 0.4,
                },
            ),
            (
                2usize,
                FiringInterval {
                    lower: 0.6,
                    upper: 0.8,
                },
            ),
        ];
        let out = aggregate_output(&rb, &fired, &vocab, 101).unwrap();
        let es = vocab.mf(SimilarityTerm::ExactlySimilar);
        let qs = vocab.mf(SimilarityTerm::QuiteSimilar);
        for (i, &x) in out.xs().iter().enumerate() {
            let me = es.evaluate_unchecked(x);
            let mq = qs.evaluate_unchecked(x);
            assert_eq!(out.mu_lower()[i], (0.3 * me.lower).max(0.6 * mq.lower));
            assert_eq!(out.mu_upper()[i], (0.4 * me.upper).max(0.8 * mq.upper));
        }
    }

    #[test]
    fn degenerate_symmetric_set_reduces_to_the_plain_centroid() {
        let s = set(&[0.0, 0.5, 1.0], &[0.2, 1.0, 0.2], &[0.2, 1.0, 0.2]);
        let (cl, _) = ekm_left(&s).unwrap();
        let (cr, _) = ekm_right(&s).unwrap();
        assert!((cl - 0.5).abs() < 1e-12);
        assert!((cr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_set_has_known_endpoints() {
        let s = set(&[0.0, 1.0], &[0.5, 0.5], &[1.0, 1.0]);
        let (cl, _) = ekm_left(&s).unwrap();
        let (cr, _) = ekm_right(&s).unwrap();
        assert!((cl - 1.0 / 3.0).abs() < 1e-12);
        assert!((cr - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_upper_is_a_degenerate_set() {
        assert!(matches!(
            DiscretizedIt2Set::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]),
            Err(InferenceError::DegenerateOutput)
        ));
    }

    #[test]
    fn ekm_matches_exhaustive_enumeration_on_random_sets() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for trial in 0..300 {
            let n = rng.gen_range(2..=12);
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mut lo = Vec::with_capacity(n);
            let mut up = Vec::with_capacity(n);
            for _ in 0..n {
                let u: f64 = rng.gen_range(0.0..1.0);
                // Cover sparse lower memberships: a third of the samples
                // zero out the lower bound entirely.
                let l = if rng.gen_bool(0.33) {
                    0.0
                } else {
                    rng.gen_range(0.0..=u)
                };
                lo.push(l);
                up.push(u);
            }
            if up.iter().sum::<f64>() <= 0.0 {
                up[n - 1] = 0.5;
            }
            let s = set(&xs, &lo, &up);
            let (cl, _) = ekm_left(&s).unwrap();
            let (cr, _) = ekm_right(&s).unwrap();
            let (mn, mx) = enumerate_centroid(&xs, &lo, &up);
            assert!((cl - mn).abs() < 1e-9, "trial {trial}: c_l {cl} vs {mn}");
            assert!((cr - mx).abs() < 1e-9, "trial {trial}: c_r {cr} vs {mx}");
            assert!(cl <= cr + 1e-12);
        }
    }

    #[test]
    fn zero_fou_sets_reduce_to_the_plain_centroid() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0009);
        for _ in 0..200 {
            let n = rng.gen_range(2..=16);
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            if mu.iter().sum::<f64>() <= 0.0 {
                continue;
            }
            let s = set(&xs, &mu, &mu);
            let (cl, _) = ekm_left(&s).unwrap();
            let (cr, _) = ekm_right(&s).unwrap();
            let centroid = xs.iter().zip(&mu).map(|(x, m)| x * m).sum::<f64>()
                / mu.iter().sum::<f64>();
            assert!((cl - centroid).abs() < 1e-9);
            assert!((cr - centroid).abs() < 1e-9);
        }
    }

    #[test]
    fn ekm_terminates_within_n_iterations() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0007);
        for _ in 0..500 {
            let n = rng.gen_range(2..=64);
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mut lo = Vec::with_capacity(n);
            let mut up = Vec::with_capacity(n);
            for _ in 0..n {
                let u: f64 = rng.gen_range(0.0..1.0);
                lo.push(rng.gen_range(0.0..=u));
                up.push(u);
            }
            let s = set(&xs, &lo, &up);
            let (_, _, il) = ekm_left_counted(&s).unwrap();
            let (_, _, ir) = ekm_right_counted(&s).unwrap();
            assert!(il <= n, "left took {il} iterations for n = {n}");
            assert!(ir <= n, "right took {ir} iterations for n = {n}");
        }
    }

    #[test]
    fn widening_the_upper_membership_widens_the_centroid_interval() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for _ in 0..200 {
            let n = rng.gen_range(3..=10);
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.5)).collect();
            let up: Vec<f64> = lo.iter().map(|&l| l + rng.gen_range(0.0..0.5)).collect();
            let s = set(&xs, &lo, &up);
            let (cl, _) = ekm_left(&s).unwrap();
            let (cr, _) = ekm_right(&s).unwrap();

            let mut wider = up.clone();
            let i = rng.gen_range(0..n);
            wider[i] = (wider[i] + rng.gen_range(0.0..0.5)).min(1.0);
            let s2 = set(&xs, &lo, &wider);
            let (cl2, _) = ekm_left(&s2).unwrap();
            let (cr2, _) = ekm_right(&s2).unwrap();
            assert!(cl2 <= cl + 1e-12);
            assert!(cr2 >= cr - 1e-12);
        }
    }

    #[test]
    fn defuzzify_is_the_interval_midpoint() {
        let c = CentroidInterval {
            c_l: 0.5,
            c_r: 0.5,
            switch_left: 0,
            switch_right: 0,
        };
        assert_eq!(defuzzify(&c), 0.5);
        let c = CentroidInterval {
            c_l: 1.0 / 3.0,
            c_r: 2.0 / 3.0,
            ..c
        };
        assert!((defuzzify(&c) - 0.5).abs() < 1e-12);
        let c = CentroidInterval {
            c_l: 0.7,
            c_r: 0.9,
            ..c
        };
        assert!((defuzzify(&c) - 0.8).abs() < 1e-12);
    }

    /// Independent scalar centroid of a discretized triangle, for checking
    /// the T1 path end to end.
    fn discrete_centroid(mf: &crate::fuzzy::It2TriangularMf, samples: usize) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..samples {
            let x = i as f64 / (samples - 1) as f64;
            let m = mf.evaluate_unchecked(x).lower;
            num += x * m;
            den += m;
        }
        num / den
    }

    #[test]
    fn t1_extremes_hit_the_es_and_ns_centroids() {
        let engine = InferenceEngine::standard();
        let t1_vocab = SimilarityVocabulary::default().principal();
        let es = discrete_centroid(t1_vocab.mf(SimilarityTerm::ExactlySimilar), 101);
        let ns = discrete_centroid(t1_vocab.mf(SimilarityTerm::NotSimilar), 101);
        assert!((engine.infer_t1([0, 0, 0]).unwrap() - es).abs() < 1e-12);
        assert!((engine.infer_t1([255, 255, 255]).unwrap() - ns).abs() < 1e-12);
        // The two default extremes mirror each other on the unit interval.
        assert!((es + ns - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_fou_engine_agrees_with_the_t1_path() {
        let color = ColorVocabulary::default().principal();
        let sim = SimilarityVocabulary::default().principal();
        let engine =
            InferenceEngine::new(RuleBase::standard(), color, sim, 101).unwrap();
        for diff in [
            [0u8, 0, 0],
            [10, 20, 30],
            [60, 60, 60],
            [100, 150, 200],
            [255, 255, 255],
            [128, 0, 64],
        ] {
            let it2 = engine.infer_it2(diff).unwrap();
            let t1 = engine.infer_t1(diff).unwrap();
            assert!((it2 - t1).abs() < 1e-9, "diff {diff:?}: {it2} vs {t1}");
        }
    }

    #[test]
    fn engine_matches_the_step_by_step_pipeline() {
        let engine = InferenceEngine::standard();
        let rb = RuleBase::standard();
        let vocab = SimilarityVocabulary::default();
        let mut rng = StdRng::seed_from_u64(0x5eed_0003);
        for _ in 0..200 {
            let diff = [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()];
            let inputs = engine.fuzzify(diff);
            let fired = fire_rules(&rb, &inputs).unwrap();
            let out = aggregate_output(&rb, &fired, &vocab, 101).unwrap();
            let (c_l, switch_left) = ekm_left(&out).unwrap();
            let (c_r, switch_right) = ekm_right(&out).unwrap();
            let expected = defuzzify(&CentroidInterval {
                c_l,
                c_r,
                switch_left,
                switch_right,
            });
            let got = engine.infer_it2(diff).unwrap();
            assert_eq!(got, expected, "diff {diff:?}");
        }
    }

    #[test]
    fn inferred_similarity_is_bounded_on_a_grid() {
        let engine = InferenceEngine::standard();
        let mut scratch = engine.scratch();
        for r in (0..=255u16).step_by(17) {
            for g in (0..=255u16).step_by(17) {
                for b in (0..=255u16).step_by(17) {
                    let d = [r as u8, g as u8, b as u8];
                    let s = engine.infer_it2_with(&mut scratch, d).unwrap();
                    assert!((0.0..=1.0).contains(&s), "diff {d:?} -> {s}");
                    let t = engine.infer_t1_with(&mut scratch, d).unwrap();
                    assert!((0.0..=1.0).contains(&t), "diff {d:?} -> {t}");
                }
            }
        }
    }

    #[test]
    fn sparse_lower_memberships_are_type_reduced_without_panic() {
        // Differences in (70, 90) have zero lower membership in every color
        // term with the default vocabulary; the output set then has an
        // all-zero lower MF and the EKM denominators need the scan fallback.
        let engine = InferenceEngine::standard();
        for d in [75u8, 80, 85, 170, 180] {
            let s = engine.infer_it2([d, d, d]).unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
