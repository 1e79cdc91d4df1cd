//! `levpriv automaton` — build a substitution machine, optionally restrict
//! it to one exact distance, and dump it as DOT or JSON.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use levpriv::{build_substitution_automaton, count_paths, Alphabet};

use crate::common::{emit, parse_alphabet_spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpArg {
    Dot,
    Json,
}

#[derive(Args)]
pub struct AutomatonArgs {
    /// Word the machine is built around
    #[arg(long)]
    pub input: String,
    /// Alphabet override (default: the distinct characters of the input)
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Error budget (default: the input length)
    #[arg(long)]
    pub k: Option<usize>,
    /// Restrict to words at exactly this distance
    #[arg(long)]
    pub restrict: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = DumpArg::Dot)]
    pub dump: DumpArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: AutomatonArgs) -> Result<u8> {
    let alphabet = match &args.alphabet {
        Some(spec) => parse_alphabet_spec(spec)?,
        None => Alphabet::from_text(&args.input)?,
    };
    let x = alphabet.word_from_text(&args.input)?;
    let k = args.k.unwrap_or_else(|| x.len().max(1));

    let build_start = Instant::now();
    let machine = build_substitution_automaton(&alphabet, &x, k)?;
    let machine = match args.restrict {
        Some(distance) => machine.restrict_to_distance(distance)?,
        None => machine,
    };
    eprintln!(
        "construction: {:?} ({} states, {} edges, {} transitions)",
        build_start.elapsed(),
        machine.num_states(),
        machine.num_graph_edges(),
        machine.num_transitions()
    );
    if machine.is_machine_empty() {
        eprintln!("note: no word attains that distance; the machine is empty");
    }

    let content = match args.dump {
        DumpArg::Json => machine.to_json(&alphabet)?,
        DumpArg::Dot => {
            // Restricted machines get their path counts as annotations.
            let annotations = if args.restrict.is_some() && !machine.is_machine_empty() {
                let counts = count_paths(&machine)?;
                Some(
                    (0..machine.num_states())
                        .map(|q| format!("V={}", counts.count(q)))
                        .collect::<Vec<_>>(),
                )
            } else {
                None
            };
            machine.to_dot(&alphabet, annotations.as_deref())?
        }
    };
    emit(args.out.as_ref(), &content)?;
    Ok(0)
}
