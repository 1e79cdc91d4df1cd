//! The exponential mechanism for words: exponent weights, the distribution
//! over substitution distances, the end-to-end privatizer, and the analytic
//! per-word law it induces.
//!
//! The distance distribution comes in two weightings. `Exact` (the default)
//! multiplies each distance's weight by the number of words in that distance
//! class, so drawing a class and then a uniform word inside it realizes the
//! exponential mechanism exactly — and with it the privacy guarantee.
//! `PaperLiteral` normalizes the raw exponentials with no multiplicity
//! correction; it is NOT epsilon-differentially private in general and is
//! kept for comparison with samplers that skip the correction.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::automata::{build_substitution_automaton, AutomatonError, LayeredAutomaton};
use crate::policy::{count_paths, sample_word, PathCounts, PolicyError};
use crate::words::{hamming_distance, sensitivity_bound, Alphabet, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error("epsilon must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
    #[error("alphabet must contain at least two symbols to privatize anything")]
    DegenerateAlphabet,
    #[error("no distance class has any candidate word")]
    EmptySupport,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// How distance-class weights are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightingMode {
    /// Class weights carry the class size; the sampler realizes the
    /// exponential mechanism exactly.
    Exact,
    /// Raw exponentials with no multiplicity correction; not epsilon-DP
    /// in general.
    PaperLiteral,
}

impl WeightingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightingMode::Exact => "exact",
            WeightingMode::PaperLiteral => "paper_literal",
        }
    }
}

/// Privacy level, utility offset, adjacency radius, and weighting mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismParams {
    epsilon: f64,
    alpha: f64,
    k: usize,
    weighting: WeightingMode,
}

impl MechanismParams {
    pub fn new(
        epsilon: f64,
        alpha: f64,
        k: usize,
        weighting: WeightingMode,
    ) -> Result<Self, MechanismError> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(MechanismError::InvalidEpsilon(epsilon));
        }
        // Delegates the alpha > 0 and k >= 1 checks.
        sensitivity_bound(k, alpha)?;
        Ok(MechanismParams {
            epsilon,
            alpha,
            k,
            weighting,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weighting(&self) -> WeightingMode {
        self.weighting
    }

    pub fn with_weighting(self, weighting: WeightingMode) -> Self {
        MechanismParams { weighting, ..self }
    }
}

/// Exponent of a distance class: epsilon * u_alpha / (2 * Delta u_alpha)
/// expanded to epsilon * alpha * (k + alpha) / (2k * (distance + alpha)).
pub fn exponent_weight(distance: usize, params: &MechanismParams) -> f64 {
    let k = params.k as f64;
    let alpha = params.alpha;
    params.epsilon * alpha * (k + alpha) / (2.0 * k * (distance as f64 + alpha))
}

/// Natural log of a big natural via bit length plus mantissa extraction;
/// exact for values below 2^53 and within one ulp of the mantissa above.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit mantissa fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// The distribution over substitution distances the mechanism draws first.
///
/// Support keeps only distances whose class is inhabited; probabilities are
/// normalized in log space so large epsilon cannot overflow.
#[derive(Debug, Clone)]
pub struct DistanceDistribution {
    support: Vec<usize>,
    counts: Vec<BigUint>,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl DistanceDistribution {
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn count(&self, idx: usize) -> &BigUint {
        &self.counts[idx]
    }

    pub fn log_weight(&self, idx: usize) -> f64 {
        self.log_weights[idx]
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    /// Probability of a distance value (zero off support).
    pub fn prob_of_distance(&self, distance: usize) -> f64 {
        match self.support.iter().position(|&d| d == distance) {
            Some(idx) => self.probs[idx],
            None => 0.0,
        }
    }

    /// Draws a distance; deterministic given the random stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.support[idx];
            }
        }
        *self.support.last().expect("support is non-empty")
    }

    /// CSV table (distance, class size, log weight, probability).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance,count,log_weight,prob\n");
        for idx in 0..self.support.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.support[idx], self.counts[idx], self.log_weights[idx], self.probs[idx]
            ));
        }
        out
    }
}

/// Normalizes the per-distance weights into a distribution. `counts[d]` is
/// the number of candidate words at distance exactly `d`; empty classes drop
/// out of the support.
pub fn distance_distribution(
    counts: &[BigUint],
    params: &MechanismParams,
) -> Result<DistanceDistribution, MechanismError> {
    let mut support = Vec::new();
    let mut kept = Vec::new();
    let mut log_weights = Vec::new();
    for (distance, count) in counts.iter().enumerate() {
        if count.is_zero() {
            continue;
        }
        let mut lw = exponent_weight(distance, params);
        if params.weighting() == WeightingMode::Exact {
            lw += ln_biguint(count);
        }
        support.push(distance);
        kept.push(count.clone());
        log_weights.push(lw);
    }
    if support.is_empty() {
        return Err(MechanismError::EmptySupport);
    }
    let max = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_weights.iter().map(|&lw| (lw - max).exp()).sum();
    let log_norm = max + sum.ln();
    let probs: Vec<f64> = log_weights
        .iter()
        .map(|&lw| (lw - log_norm).exp())
        .collect();
    Ok(DistanceDistribution {
        support,
        counts: kept,
        log_weights,
        probs,
    })
}

/// Per-word output probability at each supported distance: the class
/// probability divided by the class size.
pub fn analytic_pmf(
    counts: &[BigUint],
    params: &MechanismParams,
) -> Result<BTreeMap<usize, f64>, MechanismError> {
    let dist = distance_distribution(counts, params)?;
    Ok(dist
        .support()
        .iter()
        .enumerate()
        .map(|(idx, &distance)| {
            let class = dist.count(idx).to_f64().unwrap_or(f64::INFINITY);
            (distance, dist.prob(idx) / class)
        })
        .collect())
}

/// A machine cut into its distance classes, each with exact path counts,
/// plus the distribution over classes. Building one up front amortizes the
/// restriction and counting work across many samples.
#[derive(Debug, Clone)]
pub struct RestrictedMechanism {
    classes: Vec<(usize, LayeredAutomaton, PathCounts)>,
    distribution: DistanceDistribution,
}

impl RestrictedMechanism {
    /// Restricts `base` to every distance level it supports and derives the
    /// class distribution. Levels with no witnesses are dropped, which for
    /// product machines realizes the achievable-distance clamp.
    pub fn from_base(
        base: &LayeredAutomaton,
        params: &MechanismParams,
    ) -> Result<Self, MechanismError> {
        let top = base.max_err().min(base.word_len());
        let mut counts = vec![BigUint::zero(); top + 1];
        let mut classes = Vec::new();
        for (distance, slot) in counts.iter_mut().enumerate() {
            let restricted = base.restrict_to_distance(distance)?;
            if restricted.is_machine_empty() {
                continue;
            }
            let v = count_paths(&restricted)?;
            *slot = v.total().clone();
            classes.push((distance, restricted, v));
        }
        let distribution = distance_distribution(&counts, params)?;
        Ok(RestrictedMechanism {
            classes,
            distribution,
        })
    }

    pub fn distribution(&self) -> &DistanceDistribution {
        &self.distribution
    }

    /// Class sizes by distance, densely indexed from zero.
    pub fn class_counts(&self) -> Vec<BigUint> {
        let top = self.classes.iter().map(|&(d, _, _)| d).max().unwrap_or(0);
        let mut counts = vec![BigUint::zero(); top + 1];
        for (distance, _, v) in &self.classes {
            counts[*distance] = v.total().clone();
        }
        counts
    }

    pub fn class_machine(&self, distance: usize) -> Option<&LayeredAutomaton> {
        self.classes
            .iter()
            .find(|&&(d, _, _)| d == distance)
            .map(|(_, m, _)| m)
    }

    /// The law of [`RestrictedMechanism::sample`]: per-word probability at
    /// each supported distance.
    pub fn analytic_pmf(
        &self,
        params: &MechanismParams,
    ) -> Result<BTreeMap<usize, f64>, MechanismError> {
        analytic_pmf(&self.class_counts(), params)
    }

    /// The same law expanded over an explicit language: every word gets the
    /// per-word probability of its distance class, zero off the support.
    pub fn word_probabilities(
        &self,
        params: &MechanismParams,
        x: &Word,
        language: &[Word],
    ) -> Result<Vec<f64>, MechanismError> {
        let per_distance = self.analytic_pmf(params)?;
        language
            .iter()
            .map(|v| {
                let d = hamming_distance(x, v)?;
                Ok(per_distance.get(&d).copied().unwrap_or(0.0))
            })
            .collect()
    }

    /// Draws a distance class, then a uniform accepted word inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Word, MechanismError> {
        let distance = self.distribution.sample(rng);
        let (_, machine, v) = self
            .classes
            .iter()
            .find(|&&(d, _, _)| d == distance)
            .expect("sampled distance is in support");
        Ok(sample_word(machine, v, rng)?)
    }
}

/// End-to-end word privatizer: builds the substitution machine of radius
/// min(k, |x|) around `x`, draws a distance from the class distribution, and
/// emits a uniform word of that class. The output always has length |x| and
/// substitution distance at most min(k, |x|) from `x`.
pub fn privatize_word<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    x: &Word,
    params: &MechanismParams,
    rng: &mut R,
) -> Result<Word, MechanismError> {
    prepare_word_mechanism(alphabet, x, params)?.sample(rng)
}

/// Builds the reusable sampling state behind [`privatize_word`].
pub fn prepare_word_mechanism(
    alphabet: &Alphabet,
    x: &Word,
    params: &MechanismParams,
) -> Result<RestrictedMechanism, MechanismError> {
    let base = word_base_machine(alphabet, x, params)?;
    RestrictedMechanism::from_base(&base, params)
}

/// The substitution machine the word privatizer samples on: radius
/// min(k, |x|) around `x`.
pub fn word_base_machine(
    alphabet: &Alphabet,
    x: &Word,
    params: &MechanismParams,
) -> Result<LayeredAutomaton, MechanismError> {
    if alphabet.len() < 2 {
        return Err(MechanismError::DegenerateAlphabet);
    }
    let radius = params.k().min(x.len()).max(1);
    Ok(build_substitution_automaton(alphabet, x, radius)?)
}
