//! `levpriv dist` — the distance-class table behind the mechanism, as CSV.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use levpriv::{
    distance_distribution, prepare_word_mechanism, Alphabet, MechanismParams, WeightingMode,
};

use crate::common::{emit, parse_alphabet_spec, ModeArg};

#[derive(Args)]
pub struct DistArgs {
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Adjacency radius (default: the input length)
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Emit both weightings side by side
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: DistArgs) -> Result<u8> {
    let alphabet = match &args.alphabet {
        Some(spec) => parse_alphabet_spec(spec)?,
        None => Alphabet::from_text(&args.input)?,
    };
    let x = alphabet.word_from_text(&args.input)?;
    let k = args.k.unwrap_or_else(|| x.len().max(1));
    let params = MechanismParams::new(args.epsilon, args.alpha, k, args.mode.weighting())?;
    if !args.compare {
        args.mode.warn_if_not_private();
    }

    let mechanism = prepare_word_mechanism(&alphabet, &x, &params)?;
    let content = if args.compare {
        let counts = mechanism.class_counts();
        let exact = distance_distribution(&counts, &params.with_weighting(WeightingMode::Exact))?;
        let literal =
            distance_distribution(&counts, &params.with_weighting(WeightingMode::PaperLiteral))?;
        let mut csv = String::from(
            "distance,count,log_weight_exact,prob_exact,log_weight_paper_literal,prob_paper_literal\n",
        );
        for idx in 0..exact.support().len() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                exact.support()[idx],
                exact.count(idx),
                exact.log_weight(idx),
                exact.prob(idx),
                literal.log_weight(idx),
                literal.prob(idx)
            ));
        }
        csv
    } else {
        mechanism.distribution().to_csv()
    };
    emit(args.out.as_ref(), &content)?;
    Ok(0)
}
