//! `levpriv gridworld` — emit a grid-world transition system as JSON.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use levpriv::make_gridworld;

use crate::common::emit;

#[derive(Args)]
pub struct GridworldArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Also allow staying in place
    #[arg(long)]
    pub stay: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: GridworldArgs) -> Result<u8> {
    if args.rows == 0 || args.cols == 0 {
        anyhow::bail!("grid must have at least one row and one column");
    }
    let ts = make_gridworld(args.rows, args.cols, args.stay);
    eprintln!(
        "grid world: {} states, {} transitions",
        ts.num_states(),
        ts.num_transitions()
    );
    emit(args.out.as_ref(), &ts.to_json())?;
    Ok(0)
}
