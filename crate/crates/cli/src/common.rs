//! Shared plumbing: alphabet specs, seeds, per-sample random streams, mode
//! parsing, and output routing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use levpriv::{Alphabet, WeightingMode, Word};
use rand::rngs::OsRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    PaperLiteral,
}

impl ModeArg {
    pub fn weighting(self) -> WeightingMode {
        match self {
            ModeArg::Exact => WeightingMode::Exact,
            ModeArg::PaperLiteral => WeightingMode::PaperLiteral,
        }
    }

    pub fn warn_if_not_private(self) {
        if self == ModeArg::PaperLiteral {
            eprintln!(
                "warning: paper-literal weighting is NOT epsilon-differentially private in \
                 general; use the default exact mode for the guarantee"
            );
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

/// An alphabet flag value: a JSON array of symbol strings when it starts
/// with '[', otherwise the distinct characters of the string.
pub fn parse_alphabet_spec(spec: &str) -> Result<Alphabet> {
    let alphabet = if spec.trim_start().starts_with('[') {
        Alphabet::from_json(spec)?
    } else {
        Alphabet::from_text(spec)?
    };
    Ok(alphabet)
}

/// The explicit seed, or a fresh draw from OS entropy. Always echoed in the
/// command output so a run can be reproduced.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| OsRng.gen())
}

/// Independent stream for sample `index`: reproducible regardless of the
/// order samples are drawn in.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Splits a run string into action tokens on whitespace and commas.
pub fn parse_plan(actions: &Alphabet, text: &str) -> Result<Word> {
    let tokens: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    // A contiguous string over a single-character action alphabet is fine too.
    if tokens.len() == 1 && actions.index_of(tokens[0]).is_none() {
        if let Ok(word) = actions.word_from_text(tokens[0]) {
            return Ok(word);
        }
    }
    Ok(actions.word_from_tokens(&tokens)?)
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes the primary output to `--out` when given, stdout otherwise.
pub fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                handle.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Enumeration cap: LEVPRIV_CAP overrides the default.
pub fn enumeration_cap() -> Result<u64> {
    match std::env::var("LEVPRIV_CAP") {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("LEVPRIV_CAP must be an integer, got {text:?}")),
        Err(_) => Ok(levpriv::DEFAULT_ENUMERATION_CAP),
    }
}
