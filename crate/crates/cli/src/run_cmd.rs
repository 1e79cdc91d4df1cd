//! `levpriv run` — privatize a plan of a deterministic transition system.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use levpriv::{
    grid_cell, hamming_distance, MechanismParams, RestrictedMechanism, TransitionSystem, Word,
};
use serde::Serialize;

use crate::common::{
    emit, parse_plan, read_file, resolve_seed, sample_stream, FormatArg, ModeArg, VERSION,
};
use crate::svg;

#[derive(Args)]
pub struct RunArgs {
    /// Transition-system JSON file
    #[arg(long)]
    pub ts: PathBuf,
    /// Input plan: action names separated by whitespace or commas
    #[arg(long)]
    pub run: String,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Adjacency radius (default: the plan length)
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Accept an input plan the system cannot execute
    #[arg(long)]
    pub allow_invalid_input: bool,
    /// Render the input and sampled paths as an SVG (grid worlds only)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    mode: &'static str,
    epsilon: f64,
    alpha: f64,
    k: usize,
    ts_states: usize,
    input: &'a str,
    samples: usize,
}

#[derive(Serialize)]
struct PlanDoc {
    actions: Vec<String>,
    run: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<(usize, usize)>>,
    distance: usize,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    meta: RunMeta<'a>,
    input_run: Vec<String>,
    plans: Vec<PlanDoc>,
}

fn plan_doc(ts: &TransitionSystem, plan: &Word, x: &Word) -> Result<PlanDoc> {
    let actions: Vec<String> = plan
        .letters()
        .iter()
        .map(|&a| ts.actions().symbol(a).to_string())
        .collect();
    let run_states = ts
        .run_of_plan(plan)?
        .context("sampled plan must be executable")?;
    let run: Vec<String> = run_states
        .iter()
        .map(|&s| ts.state_name(s).to_string())
        .collect();
    let cells = run
        .iter()
        .map(|name| grid_cell(name))
        .collect::<Option<Vec<_>>>();
    Ok(PlanDoc {
        actions,
        run,
        cells,
        distance: hamming_distance(plan, x)?,
    })
}

pub fn run(args: RunArgs) -> Result<u8> {
    let ts = TransitionSystem::from_json(&read_file(&args.ts)?)?;
    let x = parse_plan(ts.actions(), &args.run)?;
    let k = args.k.unwrap_or_else(|| x.len().max(1));
    let params = MechanismParams::new(args.epsilon, args.alpha, k, args.mode.weighting())?;
    args.mode.warn_if_not_private();
    let seed = resolve_seed(args.seed);

    let build_start = Instant::now();
    let product = levpriv::run_base_machine(&ts, &x, &params, args.allow_invalid_input)?;
    let mechanism = RestrictedMechanism::from_base(&product, &params)?;
    eprintln!(
        "product construction: {:?} ({} states, {} edges, {} transitions)",
        build_start.elapsed(),
        product.num_states(),
        product.num_graph_edges(),
        product.num_transitions()
    );

    let sample_start = Instant::now();
    let mut plans = Vec::with_capacity(args.samples);
    for index in 0..args.samples {
        let mut rng = sample_stream(seed, index as u64);
        plans.push(mechanism.sample(&mut rng)?);
    }
    eprintln!(
        "sampling: {} samples in {:?}",
        args.samples,
        sample_start.elapsed()
    );

    let docs: Vec<PlanDoc> = plans
        .iter()
        .map(|plan| plan_doc(&ts, plan, &x))
        .collect::<Result<_>>()?;

    if let Some(svg_path) = &args.svg {
        let input_doc = if args.allow_invalid_input && ts.run_of_plan(&x)?.is_none() {
            None
        } else {
            Some(plan_doc(&ts, &x, &x)?)
        };
        let input_cells = input_doc.as_ref().and_then(|d| d.cells.clone());
        let sample_cells: Option<Vec<Vec<(usize, usize)>>> =
            docs.iter().map(|d| d.cells.clone()).collect();
        match sample_cells {
            Some(sample_cells) => {
                let rendered = svg::render_paths(input_cells.as_deref(), &sample_cells);
                std::fs::write(svg_path, rendered)
                    .with_context(|| format!("cannot write {}", svg_path.display()))?;
            }
            None => {
                anyhow::bail!("--svg needs grid-world state names of the form s_<row>_<col>")
            }
        }
    }

    let input_run: Vec<String> = match ts.run_of_plan(&x)? {
        Some(states) => states
            .iter()
            .map(|&s| ts.state_name(s).to_string())
            .collect(),
        None => Vec::new(),
    };
    let content = match args.format {
        FormatArg::Json => {
            let output = RunOutput {
                meta: RunMeta {
                    command: "run",
                    version: VERSION,
                    seed,
                    mode: params.weighting().as_str(),
                    epsilon: params.epsilon(),
                    alpha: params.alpha(),
                    k: params.k(),
                    ts_states: ts.num_states(),
                    input: &args.run,
                    samples: args.samples,
                },
                input_run,
                plans: docs,
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
            for doc in &docs {
                text.push_str(&doc.actions.join(" "));
                text.push('\n');
            }
            text
        }
    };
    emit(args.out.as_ref(), &content)?;
    Ok(0)
}
