//! Differential privacy for words over a finite alphabet and for runs of
//! deterministic transition systems.
//!
//! The library privatizes a sensitive word by sampling a nearby word under an
//! exponential mechanism whose utility is the (substitution-only) Levenshtein
//! distance. Instead of enumerating every candidate output, sampling walks a
//! fixed-length substitution automaton: a distance class is drawn first, the
//! automaton is restricted to that class, exact path counts turn the
//! restriction into a uniform sampler, and the emitted word follows the
//! mechanism's distribution. The same machinery runs on the synchronous
//! product with a transition system, so privatized action sequences are always
//! valid plans.
//!
//! ```
//! use levpriv::{privatize_word, Alphabet, MechanismParams, WeightingMode};
//! use rand::SeedableRng;
//!
//! let alphabet = Alphabet::from_text("abc")?;
//! let input = alphabet.word_from_text("abc")?;
//! let params = MechanismParams::new(1.0, 1.0, 2, WeightingMode::Exact)?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let private = privatize_word(&alphabet, &input, &params, &mut rng)?;
//! assert_eq!(private.len(), input.len());
//! assert!(levpriv::hamming_distance(&private, &input)? <= 2);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! Modules:
//! - [`words`]: alphabets, words, distances, utility and its sensitivity bound
//! - [`automata`]: substitution automata, the full edit-distance NFA,
//!   distance restriction, DOT/JSON export
//! - [`policy`]: exact big-integer path counts, branch policies, uniform
//!   sampling of accepted words
//! - [`mechanism`]: exponent weights, the distance distribution, the
//!   end-to-end word privatizer and its analytic law
//! - [`transition`]: deterministic transition systems, product automata, run
//!   privatization, a grid-world generator
//! - [`oracle`]: brute-force reference distributions, adjacency enumeration,
//!   exact differential-privacy verification

pub mod automata;
pub mod mechanism;
pub mod oracle;
pub mod policy;
pub mod transition;
pub mod words;

pub use automata::{
    build_full_levenshtein_nfa, build_substitution_automaton, AutomatonError, EditNfa,
    LayeredAutomaton, StateId, StateLabel,
};
pub use mechanism::{
    analytic_pmf, distance_distribution, exponent_weight, prepare_word_mechanism, privatize_word,
    word_base_machine, DistanceDistribution, MechanismError, MechanismParams, RestrictedMechanism,
    WeightingMode,
};
pub use oracle::{
    adjacent_pairs, brute_force_pmf, empirical_pmf, enumerate_language, total_variation, verify_dp,
    DpReport, DpWitness, OracleError, Pmf, DEFAULT_ENUMERATION_CAP,
};
pub use policy::{count_paths, sample_word, synthesize_policy, PathCounts, Policy, PolicyError};
pub use transition::{
    build_product, grid_cell, make_gridworld, prepare_run_mechanism, privatize_run,
    run_base_machine, TransitionError, TransitionSystem,
};
pub use words::{
    hamming_distance, levenshtein_distance, sensitivity_bound, utility, Alphabet, AlphabetId, Word,
    WordError,
};
