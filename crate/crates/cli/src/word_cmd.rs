//! `levpriv word` — privatize a string.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use levpriv::{hamming_distance, Alphabet, MechanismParams, RestrictedMechanism, Word};
use serde::Serialize;

use crate::common::{
    emit, parse_alphabet_spec, resolve_seed, sample_stream, FormatArg, ModeArg, VERSION,
};

#[derive(Args)]
pub struct WordArgs {
    /// Sensitive input word
    #[arg(long)]
    pub input: String,
    /// Alphabet override: a string of characters or a JSON array of symbols
    /// (default: the distinct characters of the input)
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Privacy level epsilon (0 gives the uniform baseline)
    #[arg(long)]
    pub epsilon: f64,
    /// Utility offset alpha
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Adjacency radius (default: the input length)
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of privatized samples to draw
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Random seed (default: OS entropy; always echoed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distance-class weighting
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Write the output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct WordMeta<'a> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    mode: &'static str,
    epsilon: f64,
    alpha: f64,
    k: usize,
    input: &'a str,
    alphabet: Vec<String>,
    samples: usize,
}

#[derive(Serialize)]
struct HistogramRow {
    distance: usize,
    count: usize,
}

#[derive(Serialize)]
struct WordOutput<'a> {
    meta: WordMeta<'a>,
    samples: Vec<String>,
    distance_histogram: Vec<HistogramRow>,
}

fn draw_samples(
    alphabet: &Alphabet,
    x: &Word,
    params: &MechanismParams,
    seed: u64,
    samples: usize,
) -> Result<(Vec<String>, Vec<HistogramRow>)> {
    let build_start = Instant::now();
    let base = levpriv::word_base_machine(alphabet, x, params)?;
    let mechanism = RestrictedMechanism::from_base(&base, params)?;
    eprintln!(
        "construction: {:?} ({} states, {} edges, {} transitions)",
        build_start.elapsed(),
        base.num_states(),
        base.num_graph_edges(),
        base.num_transitions()
    );

    let sample_start = Instant::now();
    let mut rendered = Vec::with_capacity(samples);
    let mut by_distance = std::collections::BTreeMap::new();
    for index in 0..samples {
        let mut rng = sample_stream(seed, index as u64);
        let word = mechanism.sample(&mut rng)?;
        *by_distance
            .entry(hamming_distance(&word, x)?)
            .or_insert(0usize) += 1;
        rendered.push(alphabet.display_word(&word)?);
    }
    eprintln!(
        "sampling: {} samples in {:?}",
        samples,
        sample_start.elapsed()
    );
    let histogram = by_distance
        .into_iter()
        .map(|(distance, count)| HistogramRow { distance, count })
        .collect();
    Ok((rendered, histogram))
}

pub fn run(args: WordArgs) -> Result<u8> {
    let alphabet = match &args.alphabet {
        Some(spec) => parse_alphabet_spec(spec)?,
        None => Alphabet::from_text(&args.input)?,
    };
    let x = alphabet.word_from_text(&args.input)?;
    let k = args.k.unwrap_or_else(|| x.len().max(1));
    let params = MechanismParams::new(args.epsilon, args.alpha, k, args.mode.weighting())?;
    args.mode.warn_if_not_private();
    let seed = resolve_seed(args.seed);

    let (rendered, histogram) = draw_samples(&alphabet, &x, &params, seed, args.samples)?;
    let content = match args.format {
        FormatArg::Json => {
            let output = WordOutput {
                meta: WordMeta {
                    command: "word",
                    version: VERSION,
                    seed,
                    mode: params.weighting().as_str(),
                    epsilon: params.epsilon(),
                    alpha: params.alpha(),
                    k: params.k(),
                    input: &args.input,
                    alphabet: alphabet.symbols().to_vec(),
                    samples: args.samples,
                },
                samples: rendered,
                distance_histogram: histogram,
            };
            serde_json::to_string_pretty(&output)?
        }
        FormatArg::Text => {
            let mut text = format!(
                "# seed={} mode={} epsilon={} alpha={} k={} version={}\n",
                seed,
                params.weighting().as_str(),
                params.epsilon(),
                params.alpha(),
                params.k(),
                VERSION
            );
            for sample in &rendered {
                text.push_str(sample);
                text.push('\n');
            }
            text
        }
    };
    emit(args.out.as_ref(), &content)?;
    Ok(0)
}
