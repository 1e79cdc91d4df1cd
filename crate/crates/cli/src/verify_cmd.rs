//! `levpriv verify` — exhaustive privacy verification on a small instance.
//!
//! The verified family is the mechanism's law over the full length class
//! (every distance class the language can realize), which for exact
//! weighting is the exponential mechanism itself; the adjacency radius `k`
//! enters through the sensitivity in the exponent weights. Exit code 0 means
//! the check passed, 2 means it failed, 3 means the instance was too large
//! to enumerate.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use levpriv::{
    build_product, build_substitution_automaton, enumerate_language, verify_dp, Alphabet,
    MechanismParams, OracleError, Pmf, RestrictedMechanism, TransitionSystem, Word,
};

use crate::common::{emit, enumeration_cap, parse_alphabet_spec, read_file, ModeArg};

#[derive(Args)]
pub struct VerifyArgs {
    /// Alphabet for plain words (ignored when --ts is given)
    #[arg(long, required_unless_present = "ts")]
    pub alphabet: Option<String>,
    /// Word length
    #[arg(long)]
    pub n: usize,
    /// Adjacency radius of the guarantee being checked
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Verify over the valid plans of this transition system instead
    #[arg(long)]
    pub ts: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The mechanism's full-length-class law around `x`, expanded over an
/// explicit language.
pub fn mechanism_law_over_language(
    alphabet: &Alphabet,
    ts: Option<&TransitionSystem>,
    x: &Word,
    language: &[Word],
    params: &MechanismParams,
) -> Result<Pmf> {
    let machine = build_substitution_automaton(alphabet, x, x.len().max(1))?;
    let base = match ts {
        Some(ts) => build_product(&machine, ts)?,
        None => machine,
    };
    let mechanism = RestrictedMechanism::from_base(&base, params)?;
    let probs = mechanism.word_probabilities(params, x, language)?;
    Ok(Pmf::from_probs(language.to_vec(), probs)?)
}

pub fn run(args: VerifyArgs) -> Result<u8> {
    let ts = match &args.ts {
        Some(path) => Some(TransitionSystem::from_json(&read_file(path)?)?),
        None => None,
    };
    let alphabet = match (&ts, &args.alphabet) {
        (Some(ts), _) => ts.actions().clone(),
        (None, Some(spec)) => parse_alphabet_spec(spec)?,
        (None, None) => unreachable!("clap requires --alphabet without --ts"),
    };
    let params = MechanismParams::new(args.epsilon, args.alpha, args.k, args.mode.weighting())?;

    let language = match enumerate_language(&alphabet, args.n, ts.as_ref(), enumeration_cap()?) {
        Ok(language) => language,
        Err(err @ OracleError::CapExceeded { .. }) => {
            eprintln!("refusing to enumerate: {err}");
            return Ok(3);
        }
        Err(err) => return Err(err.into()),
    };
    if language.is_empty() {
        anyhow::bail!("the language has no words of length {}", args.n);
    }

    let family: Vec<Pmf> = language
        .iter()
        .map(|x| mechanism_law_over_language(&alphabet, ts.as_ref(), x, &language, &params))
        .collect::<Result<_>>()?;
    let report = verify_dp(&family, &language, &alphabet, &params)?;
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(if report.pass { 0 } else { 2 })
}
