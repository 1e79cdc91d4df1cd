//! Independent brute-force ground truth: exhaustive output distributions
//! computed straight from the exponential-mechanism formula, adjacency
//! enumeration, and exact differential-privacy verification.
//!
//! Nothing here touches the automaton pipeline — distributions come from
//! explicit normalization over an enumerated language, which is what makes
//! this module a usable oracle for everything the sampler does. For finite
//! discrete output spaces, checking the privacy inequality on singleton
//! outputs implies it for every output set, so the verifier compares
//! log-probabilities pointwise over all ordered adjacent input pairs.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::mechanism::MechanismParams;
use crate::transition::TransitionSystem;
use crate::words::{hamming_distance, sensitivity_bound, utility, Alphabet, Word, WordError};

/// Default ceiling on `|alphabet|^n` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration of {required} words exceeds the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("language is empty")]
    EmptyLanguage,
    #[error("distributions are defined over different domains")]
    DomainMismatch,
    #[error("need one distribution per language word")]
    FamilySizeMismatch,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Transition(#[from] crate::transition::TransitionError),
}

/// A probability mass function over an explicit list of words.
#[derive(Debug, Clone)]
pub struct Pmf {
    words: Vec<Word>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    index: HashMap<Word, usize>,
}

impl Pmf {
    /// Normalizes log weights into a distribution (log-sum-exp, so large
    /// exponents are safe).
    pub fn from_log_weights(words: Vec<Word>, log_weights: Vec<f64>) -> Result<Self, OracleError> {
        if words.is_empty() {
            return Err(OracleError::EmptyLanguage);
        }
        assert_eq!(words.len(), log_weights.len());
        let max = log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_weights.iter().map(|&lw| (lw - max).exp()).sum();
        let log_norm = max + sum.ln();
        let log_probs: Vec<f64> = log_weights.iter().map(|&lw| lw - log_norm).collect();
        let probs: Vec<f64> = log_probs.iter().map(|&lp| lp.exp()).collect();
        let index = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        Ok(Pmf {
            words,
            probs,
            log_probs,
            index,
        })
    }

    /// Wraps explicit probabilities (zeros allowed); they must already sum
    /// to one.
    pub fn from_probs(words: Vec<Word>, probs: Vec<f64>) -> Result<Self, OracleError> {
        if words.is_empty() {
            return Err(OracleError::EmptyLanguage);
        }
        assert_eq!(words.len(), probs.len());
        let total: f64 = probs.iter().sum();
        assert!(
            (total - 1.0).abs() < 1e-9,
            "probabilities sum to {total}, not 1"
        );
        let log_probs = probs.iter().map(|&p| p.ln()).collect();
        let index = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        Ok(Pmf {
            words,
            probs,
            log_probs,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn log_prob(&self, idx: usize) -> f64 {
        self.log_probs[idx]
    }

    pub fn prob_of(&self, w: &Word) -> Option<f64> {
        self.index.get(w).map(|&i| self.probs[i])
    }

    fn same_domain(&self, other: &Pmf) -> bool {
        self.words == other.words
    }
}

/// Enumerates every length-`n` word over the alphabet, filtered to valid
/// plans when a transition system is given. Refuses to enumerate more than
/// `cap` words.
pub fn enumerate_language(
    alphabet: &Alphabet,
    n: usize,
    ts: Option<&TransitionSystem>,
    cap: u64,
) -> Result<Vec<Word>, OracleError> {
    let sigma = alphabet.len() as u128;
    let required = sigma.checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(OracleError::CapExceeded { required, cap });
    }
    if let Some(ts) = ts {
        if ts.actions().id() != alphabet.id() {
            return Err(OracleError::Word(WordError::AlphabetMismatch));
        }
    }
    let mut out = Vec::new();
    let mut letters = vec![0usize; n];
    loop {
        let word = alphabet.word(letters.clone()).expect("letters in range");
        let keep = match ts {
            Some(ts) => ts.is_valid_plan(&word)?,
            None => true,
        };
        if keep {
            out.push(word);
        }
        // Odometer increment, most significant letter first.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            letters[pos] += 1;
            if letters[pos] < alphabet.len() {
                break;
            }
            letters[pos] = 0;
        }
    }
}

/// The exponential-mechanism law computed the naive way: weight every word
/// of the language by exp(epsilon * utility / (2 * sensitivity)) and
/// normalize explicitly. This is the reference the automaton sampler is
/// checked against.
pub fn brute_force_pmf(
    x: &Word,
    language: &[Word],
    params: &MechanismParams,
) -> Result<Pmf, OracleError> {
    if language.is_empty() {
        return Err(OracleError::EmptyLanguage);
    }
    let delta = sensitivity_bound(params.k(), params.alpha())?;
    let mut log_weights = Vec::with_capacity(language.len());
    for w in language {
        let u = utility(x, w, params.alpha())?;
        log_weights.push(params.epsilon() * u / (2.0 * delta));
    }
    Pmf::from_log_weights(language.to_vec(), log_weights)
}

/// All ordered pairs of language indices within substitution distance `k`
/// (a word is adjacent to itself).
pub fn adjacent_pairs(language: &[Word], k: usize) -> Result<Vec<(usize, usize)>, OracleError> {
    let mut pairs = Vec::new();
    for (i, w1) in language.iter().enumerate() {
        for (j, w2) in language.iter().enumerate() {
            if hamming_distance(w1, w2)? <= k {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// The offending triple behind the worst probability ratio.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DpWitness {
    pub w1: String,
    pub w2: String,
    pub v: String,
}

/// Result of an exhaustive differential-privacy check.
#[derive(Debug, Clone, Serialize)]
pub struct DpReport {
    pub epsilon: f64,
    pub k: usize,
    pub alpha: f64,
    pub mode: String,
    pub language_size: usize,
    pub pairs_checked: usize,
    pub max_log_ratio: f64,
    pub bound_log_ratio: f64,
    pub pass: bool,
    pub witness: Option<DpWitness>,
}

/// Checks the privacy inequality on singleton outputs over every ordered
/// adjacent pair: max log(p(v; w1) / p(v; w2)) must stay at or below epsilon
/// (plus a hair of float slack). A positive probability against a zero one
/// yields an infinite ratio and fails the check, as it must.
pub fn verify_dp(
    family: &[Pmf],
    language: &[Word],
    alphabet: &Alphabet,
    params: &MechanismParams,
) -> Result<DpReport, OracleError> {
    if family.len() != language.len() {
        return Err(OracleError::FamilySizeMismatch);
    }
    for pmf in family {
        if pmf.words() != language {
            return Err(OracleError::DomainMismatch);
        }
    }
    if language.is_empty() {
        return Err(OracleError::EmptyLanguage);
    }
    let pairs = adjacent_pairs(language, params.k())?;
    let mut max_log_ratio = f64::NEG_INFINITY;
    let mut witness = None;
    for &(i, j) in &pairs {
        for m in 0..language.len() {
            let lp1 = family[i].log_prob(m);
            let lp2 = family[j].log_prob(m);
            if lp1 == f64::NEG_INFINITY && lp2 == f64::NEG_INFINITY {
                continue;
            }
            let ratio = lp1 - lp2;
            if ratio > max_log_ratio {
                max_log_ratio = ratio;
                witness = Some(DpWitness {
                    w1: alphabet.display_word(&language[i])?,
                    w2: alphabet.display_word(&language[j])?,
                    v: alphabet.display_word(&language[m])?,
                });
            }
        }
    }
    let bound_log_ratio = params.epsilon() + (1.0 + 1e-9f64).ln();
    Ok(DpReport {
        epsilon: params.epsilon(),
        k: params.k(),
        alpha: params.alpha(),
        mode: params.weighting().as_str().to_string(),
        language_size: language.len(),
        pairs_checked: pairs.len(),
        max_log_ratio,
        bound_log_ratio,
        pass: max_log_ratio <= bound_log_ratio,
        witness,
    })
}

/// Total variation distance between two distributions on the same domain.
pub fn total_variation(p: &Pmf, q: &Pmf) -> Result<f64, OracleError> {
    if !p.same_domain(q) {
        return Err(OracleError::DomainMismatch);
    }
    let sum: f64 = (0..p.len()).map(|i| (p.prob(i) - q.prob(i)).abs()).sum();
    Ok(sum / 2.0)
}

/// Empirical distribution of `trials` draws from a sampler, over an explicit
/// domain. Samples outside the domain are an error — support safety is part
/// of what gets tested.
pub fn empirical_pmf<R, F>(
    domain: &[Word],
    trials: usize,
    rng: &mut R,
    mut sampler: F,
) -> Result<Pmf, OracleError>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Word,
{
    if domain.is_empty() {
        return Err(OracleError::EmptyLanguage);
    }
    let index: HashMap<&Word, usize> = domain.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut counts = vec![0usize; domain.len()];
    for _ in 0..trials {
        let w = sampler(rng);
        match index.get(&w) {
            Some(&i) => counts[i] += 1,
            None => return Err(OracleError::DomainMismatch),
        }
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let log_probs = probs.iter().map(|&p| p.ln()).collect();
    Ok(Pmf {
        words: domain.to_vec(),
        probs,
        log_probs,
        index: domain
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect(),
    })
}
