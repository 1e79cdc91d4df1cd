//! Exact path counting over distance-restricted machines, the per-state
//! branch policy it induces, and rejection-free uniform sampling of accepted
//! words.
//!
//! Counts are arbitrary-precision naturals: for a 33-layer machine over a
//! 16-symbol alphabet the class sizes overflow 128-bit integers, and keeping
//! the arithmetic exact turns the uniformity guarantee into an integer
//! identity instead of a float approximation.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::automata::{LayeredAutomaton, StateId};
use crate::words::{Alphabet, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("machine has no states")]
    EmptyAutomaton,
    #[error("machine is not restricted to a single error level")]
    NotRestricted,
    #[error("path counts were not derived from this machine")]
    CountMismatch,
}

/// Number of accepted paths from each state to the accepting set, plus the
/// grand total at the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCounts {
    counts: Vec<BigUint>,
    total: BigUint,
}

impl PathCounts {
    pub fn count(&self, q: StateId) -> &BigUint {
        &self.counts[q]
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of words the restricted machine accepts.
    pub fn total(&self) -> &BigUint {
        &self.total
    }
}

/// Backward layer sweep: every accepting state seeds one path, and each
/// earlier state accumulates the counts of its successors. The total at the
/// initial state is the number of accepted words.
pub fn count_paths(a: &LayeredAutomaton) -> Result<PathCounts, PolicyError> {
    let initial = a.initial().ok_or(PolicyError::EmptyAutomaton)?;
    let level = a.accepting().first().map(|&q| a.label(q).errors);
    if let Some(level) = level {
        if a.accepting().iter().any(|&q| a.label(q).errors != level) {
            return Err(PolicyError::NotRestricted);
        }
    }
    let mut order: Vec<StateId> = (0..a.num_states()).collect();
    order.sort_by_key(|&q| std::cmp::Reverse(a.label(q).layer));
    let mut counts = vec![BigUint::zero(); a.num_states()];
    for &q in &order {
        if a.is_accepting(q) {
            counts[q] = BigUint::one();
            continue;
        }
        let mut sum = BigUint::zero();
        for &(_, to) in a.transitions_from(q) {
            sum += &counts[to];
        }
        counts[q] = sum;
    }
    if counts[initial].is_zero() {
        // A restricted machine keeps only co-reachable states.
        return Err(PolicyError::NotRestricted);
    }
    let total = counts[initial].clone();
    Ok(PathCounts { counts, total })
}

/// Per-state symbol choice with its exact probability as a shared-denominator
/// rational: numerator / denominator = V(successor) / V(state).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEntry {
    pub denominator: BigUint,
    pub choices: Vec<(usize, BigUint)>,
}

/// The randomized letter-selection policy induced by path counts. Accepting
/// states carry no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    entries: Vec<Option<PolicyEntry>>,
}

impl Policy {
    pub fn entry(&self, q: StateId) -> Option<&PolicyEntry> {
        self.entries[q].as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON export with exact rationals rendered as decimal strings.
    pub fn to_json(&self, a: &LayeredAutomaton, alphabet: &Alphabet) -> String {
        #[derive(Serialize)]
        struct ChoiceDoc {
            symbol: String,
            numerator: String,
            denominator: String,
        }
        #[derive(Serialize)]
        struct StateDoc {
            id: usize,
            i: usize,
            e: usize,
            #[serde(skip_serializing_if = "Option::is_none")]
            s: Option<usize>,
            choices: Vec<ChoiceDoc>,
        }
        let states: Vec<StateDoc> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(q, entry)| entry.as_ref().map(|e| (q, e)))
            .map(|(q, entry)| {
                let label = a.label(q);
                StateDoc {
                    id: q,
                    i: label.layer,
                    e: label.errors,
                    s: label.ts_state,
                    choices: entry
                        .choices
                        .iter()
                        .map(|(symbol, numerator)| ChoiceDoc {
                            symbol: alphabet.symbol(*symbol).to_string(),
                            numerator: numerator.to_string(),
                            denominator: entry.denominator.to_string(),
                        })
                        .collect(),
                }
            })
            .collect();
        serde_json::to_string_pretty(&states).expect("policy document serializes")
    }
}

fn counts_match(a: &LayeredAutomaton, v: &PathCounts) -> bool {
    if v.len() != a.num_states() {
        return false;
    }
    for q in 0..a.num_states() {
        if a.is_accepting(q) {
            if !v.count(q).is_one() {
                return false;
            }
            continue;
        }
        let mut sum = BigUint::zero();
        for &(_, to) in a.transitions_from(q) {
            sum += v.count(to);
        }
        if &sum != v.count(q) {
            return false;
        }
    }
    true
}

/// Materializes the branch policy: at each state the probability of a symbol
/// is the share of accepted paths its successor carries. Numerators sum to
/// the denominator exactly, so probabilities sum to one in integer
/// arithmetic.
pub fn synthesize_policy(a: &LayeredAutomaton, v: &PathCounts) -> Result<Policy, PolicyError> {
    if a.initial().is_none() {
        return Err(PolicyError::EmptyAutomaton);
    }
    if !counts_match(a, v) {
        return Err(PolicyError::CountMismatch);
    }
    let entries = (0..a.num_states())
        .map(|q| {
            if a.is_accepting(q) {
                return None;
            }
            Some(PolicyEntry {
                denominator: v.count(q).clone(),
                choices: a
                    .transitions_from(q)
                    .iter()
                    .map(|&(symbol, to)| (symbol, v.count(to).clone()))
                    .collect(),
            })
        })
        .collect();
    Ok(Policy { entries })
}

/// Walks the machine from the initial state, drawing at each state a uniform
/// integer below V(state) and selecting the branch by cumulative successor
/// counts. Every accepted word comes out with probability exactly 1 / total.
pub fn sample_word<R: Rng + ?Sized>(
    a: &LayeredAutomaton,
    v: &PathCounts,
    rng: &mut R,
) -> Result<Word, PolicyError> {
    let initial = a.initial().ok_or(PolicyError::EmptyAutomaton)?;
    if v.len() != a.num_states() || v.count(initial).is_zero() {
        return Err(PolicyError::CountMismatch);
    }
    let mut letters = Vec::with_capacity(a.word_len());
    let mut state = initial;
    while !a.is_accepting(state) {
        let mut draw = rng.gen_biguint_below(v.count(state));
        let mut chosen = None;
        for &(symbol, to) in a.transitions_from(state) {
            let weight = v.count(to);
            if &draw < weight {
                chosen = Some((symbol, to));
                break;
            }
            draw -= weight;
        }
        let (symbol, to) = chosen.ok_or(PolicyError::CountMismatch)?;
        letters.push(symbol);
        state = to;
    }
    Ok(Word::from_raw(a.alphabet_id(), letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::build_substitution_automaton;
    use crate::words::{hamming_distance, Alphabet};
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binomial(n: usize, k: usize) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one()];
            for j in 1..row.len() {
                next.push(&row[j - 1] + &row[j]);
            }
            next.push(BigUint::one());
            row = next;
        }
        row[k].clone()
    }

    #[test]
    fn counts_twelve_words_at_distance_two() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(2).unwrap();
        let counts = count_paths(&restricted).unwrap();
        assert_eq!(counts.total(), &BigUint::from(12u32));
    }

    #[test]
    fn zero_distance_has_a_unique_path() {
        let a = Alphabet::from_text("abcd").unwrap();
        let x = a.word_from_text("dcba").unwrap();
        let m = build_substitution_automaton(&a, &x, 3).unwrap();
        let restricted = m.restrict_to_distance(0).unwrap();
        assert_eq!(count_paths(&restricted).unwrap().total(), &BigUint::one());
    }

    #[test]
    fn class_sizes_match_the_counting_formula() {
        for sigma_text in ["ab", "abc", "abcd"] {
            let a = Alphabet::from_text(sigma_text).unwrap();
            for n in 1..=5usize {
                let x = a.word(vec![0; n]).unwrap();
                let m = build_substitution_automaton(&a, &x, n).unwrap();
                let mut sum = BigUint::zero();
                for ell in 0..=n {
                    let restricted = m.restrict_to_distance(ell).unwrap();
                    let total = if restricted.is_machine_empty() {
                        BigUint::zero()
                    } else {
                        count_paths(&restricted).unwrap().total().clone()
                    };
                    let expected = binomial(n, ell) * BigUint::from(a.len() - 1).pow(ell as u32);
                    assert_eq!(total, expected);
                    sum += total;
                }
                assert_eq!(sum, BigUint::from(a.len()).pow(n as u32));
            }
        }
    }

    #[test]
    fn empty_machine_is_rejected() {
        let a = Alphabet::from_text("a").unwrap();
        let x = a.word_from_text("aa").unwrap();
        let m = build_substitution_automaton(&a, &x, 1).unwrap();
        let empty = m.restrict_to_distance(1).unwrap();
        assert_eq!(count_paths(&empty), Err(PolicyError::EmptyAutomaton));
        let counts = count_paths(&m.restrict_to_distance(0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_word(&empty, &counts, &mut rng),
            Err(PolicyError::EmptyAutomaton)
        );
    }

    #[test]
    fn policy_probabilities_sum_to_one_exactly() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        for ell in 0..=2 {
            let restricted = m.restrict_to_distance(ell).unwrap();
            let counts = count_paths(&restricted).unwrap();
            let policy = synthesize_policy(&restricted, &counts).unwrap();
            for q in 0..restricted.num_states() {
                if let Some(entry) = policy.entry(q) {
                    let sum: BigUint = entry.choices.iter().map(|(_, n)| n).sum();
                    assert_eq!(sum, entry.denominator);
                }
            }
        }
    }

    #[test]
    fn zero_distance_policy_is_deterministic() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("cab").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(0).unwrap();
        let counts = count_paths(&restricted).unwrap();
        let policy = synthesize_policy(&restricted, &counts).unwrap();
        for q in 0..restricted.num_states() {
            if let Some(entry) = policy.entry(q) {
                assert_eq!(entry.choices.len(), 1);
                assert_eq!(entry.choices[0].1, entry.denominator);
            }
        }
    }

    #[test]
    fn policy_rejects_foreign_counts() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let r1 = m.restrict_to_distance(1).unwrap();
        let r2 = m.restrict_to_distance(2).unwrap();
        let counts2 = count_paths(&r2).unwrap();
        assert_eq!(
            synthesize_policy(&r1, &counts2),
            Err(PolicyError::CountMismatch)
        );
    }

    /// The product of branch probabilities along any accepted run equals
    /// exactly 1 / total, checked by cross-multiplication in big integers.
    #[test]
    fn branch_products_are_exactly_uniform() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        for ell in 0..=2 {
            let restricted = m.restrict_to_distance(ell).unwrap();
            let counts = count_paths(&restricted).unwrap();
            let policy = synthesize_policy(&restricted, &counts).unwrap();
            for w in restricted.accepted_words(&a).unwrap() {
                let mut numerator = BigUint::one();
                let mut denominator = BigUint::one();
                let mut q = restricted.initial().unwrap();
                for &letter in w.letters() {
                    let entry = policy.entry(q).unwrap();
                    let (_, ref share) = entry
                        .choices
                        .iter()
                        .find(|(symbol, _)| *symbol == letter)
                        .unwrap();
                    numerator *= share;
                    denominator *= &entry.denominator;
                    q = restricted.successor(q, letter).unwrap();
                }
                // numerator / denominator == 1 / total
                assert_eq!(numerator * counts.total(), denominator);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_for_a_fixed_seed() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(2).unwrap();
        let counts = count_paths(&restricted).unwrap();
        let first = sample_word(&restricted, &counts, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let second = sample_word(&restricted, &counts, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn samples_are_accepted_and_roughly_uniform() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(2).unwrap();
        let counts = count_paths(&restricted).unwrap();
        let total = counts.total().to_usize().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 12_000;
        let mut freq = std::collections::HashMap::new();
        for _ in 0..trials {
            let w = sample_word(&restricted, &counts, &mut rng).unwrap();
            assert!(restricted.accepts(&w).unwrap());
            assert_eq!(hamming_distance(&w, &x).unwrap(), 2);
            *freq.entry(w).or_insert(0usize) += 1;
        }
        assert_eq!(freq.len(), total);
        let expected = trials as f64 / total as f64;
        for &count in freq.values() {
            let deviation = (count as f64 - expected).abs() / trials as f64;
            assert!(deviation < 0.02);
        }
    }

    #[test]
    fn policy_json_exports_exact_rationals() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(2).unwrap();
        let counts = count_paths(&restricted).unwrap();
        let policy = synthesize_policy(&restricted, &counts).unwrap();
        let json = policy.to_json(&restricted, &a);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        let states = doc.as_array().unwrap();
        // Every non-accepting retained state appears with string rationals.
        assert_eq!(
            states.len(),
            restricted.num_states() - restricted.accepting().len()
        );
        let initial = &states[0];
        assert_eq!(initial["i"], 0);
        let choices = initial["choices"].as_array().unwrap();
        assert!(!choices.is_empty());
        assert_eq!(choices[0]["denominator"], "12");
        assert!(choices[0]["numerator"].is_string());
    }

    #[test]
    fn zero_distance_sampler_returns_the_input() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("bca").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(0).unwrap();
        let counts = count_paths(&restricted).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            assert_eq!(sample_word(&restricted, &counts, &mut rng).unwrap(), x);
        }
    }
}
