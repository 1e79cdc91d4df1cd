//! Alphabets, words, distances, and the utility/sensitivity scalar layer.
//!
//! Symbols are stored by integer index everywhere; surface symbols only
//! appear at I/O boundaries. Every word carries the identity token of the
//! alphabet it was built over, so cross-alphabet operations fail loudly
//! instead of silently coercing.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Errors from alphabet construction and the scalar operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(String),
    #[error("empty string is not a valid symbol")]
    EmptySymbol,
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("letter index {letter} out of range for alphabet of size {size}")]
    LetterOutOfRange { letter: usize, size: usize },
    #[error("words belong to different alphabets")]
    AlphabetMismatch,
    #[error("substitution distance is undefined for lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("alpha must be positive and finite, got {0}")]
    NonPositiveAlpha(f64),
    #[error("adjacency radius k must be at least 1")]
    ZeroK,
    #[error("invalid alphabet document: {0}")]
    InvalidAlphabetJson(String),
}

/// Identity token of an alphabet, derived from its symbol content.
///
/// Two alphabets with the same symbols in the same order share a token, so a
/// machine parsed back from JSON interoperates with words built over the
/// original alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlphabetId(u64);

fn content_token(symbols: &[String]) -> AlphabetId {
    // FNV-1a over length-prefixed symbol bytes.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for symbol in symbols {
        for byte in (symbol.len() as u64).to_le_bytes() {
            eat(byte);
        }
        for &byte in symbol.as_bytes() {
            eat(byte);
        }
    }
    AlphabetId(hash)
}

/// An ordered set of distinct symbols with 0-based index lookup.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
    id: AlphabetId,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an alphabet from an ordered sequence of distinct symbols.
    pub fn from_symbols<I, S>(symbols: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (pos, symbol) in symbols.iter().enumerate() {
            if symbol.is_empty() {
                return Err(WordError::EmptySymbol);
            }
            if index.insert(symbol.clone(), pos).is_some() {
                return Err(WordError::DuplicateSymbol(symbol.clone()));
            }
        }
        let id = content_token(&symbols);
        Ok(Alphabet { symbols, index, id })
    }

    /// Builds an alphabet from the distinct characters of a string, in
    /// first-appearance order.
    pub fn from_text(text: &str) -> Result<Self, WordError> {
        let mut seen = Vec::new();
        for ch in text.chars() {
            let s = ch.to_string();
            if !seen.contains(&s) {
                seen.push(s);
            }
        }
        Self::from_symbols(seen)
    }

    /// Parses an explicit JSON array of symbol strings.
    pub fn from_json(text: &str) -> Result<Self, WordError> {
        let symbols: Vec<String> = serde_json::from_str(text)
            .map_err(|e| WordError::InvalidAlphabetJson(e.to_string()))?;
        Self::from_symbols(symbols)
    }

    pub fn id(&self) -> AlphabetId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    /// Builds a word from explicit letter indices.
    pub fn word(&self, letters: Vec<usize>) -> Result<Word, WordError> {
        for &letter in &letters {
            if letter >= self.len() {
                return Err(WordError::LetterOutOfRange {
                    letter,
                    size: self.len(),
                });
            }
        }
        Ok(Word {
            alphabet_id: self.id,
            letters,
        })
    }

    /// Parses a word character by character. Every character must be a
    /// single-character symbol of this alphabet.
    pub fn word_from_text(&self, text: &str) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for ch in text.chars() {
            let s = ch.to_string();
            match self.index_of(&s) {
                Some(i) => letters.push(i),
                None => return Err(WordError::UnknownSymbol(s)),
            }
        }
        Ok(Word {
            alphabet_id: self.id,
            letters,
        })
    }

    /// Parses a word from pre-split symbol tokens (for multi-character
    /// symbols such as transition-system actions).
    pub fn word_from_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Word, WordError> {
        let mut letters = Vec::with_capacity(tokens.len());
        for token in tokens {
            match self.index_of(token.as_ref()) {
                Some(i) => letters.push(i),
                None => return Err(WordError::UnknownSymbol(token.as_ref().to_string())),
            }
        }
        Ok(Word {
            alphabet_id: self.id,
            letters,
        })
    }

    /// Renders a word as text: single-character symbols are concatenated,
    /// longer symbols are joined with spaces.
    pub fn display_word(&self, w: &Word) -> Result<String, WordError> {
        if w.alphabet_id != self.id {
            return Err(WordError::AlphabetMismatch);
        }
        let spaced = self.symbols.iter().any(|s| s.chars().count() > 1);
        let parts: Vec<&str> = w.letters.iter().map(|&l| self.symbol(l)).collect();
        Ok(if spaced {
            parts.join(" ")
        } else {
            parts.concat()
        })
    }
}

/// A sequence of symbol indices over a specific alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet_id: AlphabetId,
    letters: Vec<usize>,
}

impl Word {
    /// Crate-internal constructor for letters already validated against the
    /// machine they came from.
    pub(crate) fn from_raw(alphabet_id: AlphabetId, letters: Vec<usize>) -> Self {
        Word {
            alphabet_id,
            letters,
        }
    }

    pub fn alphabet_id(&self) -> AlphabetId {
        self.alphabet_id
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

fn check_same_alphabet(w1: &Word, w2: &Word) -> Result<(), WordError> {
    if w1.alphabet_id != w2.alphabet_id {
        return Err(WordError::AlphabetMismatch);
    }
    Ok(())
}

/// Substitution Levenshtein distance between equal-length words: the number
/// of positions where the letters differ.
pub fn hamming_distance(w1: &Word, w2: &Word) -> Result<usize, WordError> {
    check_same_alphabet(w1, w2)?;
    if w1.len() != w2.len() {
        return Err(WordError::LengthMismatch(w1.len(), w2.len()));
    }
    Ok(w1
        .letters
        .iter()
        .zip(&w2.letters)
        .filter(|(a, b)| a != b)
        .count())
}

/// Full Levenshtein distance (insertions, substitutions, deletions) via the
/// classic two-row dynamic-programming table.
pub fn levenshtein_distance(w1: &Word, w2: &Word) -> Result<usize, WordError> {
    check_same_alphabet(w1, w2)?;
    let (a, b) = (&w1.letters, &w2.letters);
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            curr[j + 1] = (prev[j + 1] + 1).min(curr[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[b.len()])
}

/// Utility of emitting `w_out` for input `w_in`: 1 / (d + alpha), where d is
/// the substitution distance. Strictly decreasing in the distance.
pub fn utility(w_in: &Word, w_out: &Word, alpha: f64) -> Result<f64, WordError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(WordError::NonPositiveAlpha(alpha));
    }
    let d = hamming_distance(w_in, w_out)?;
    Ok(1.0 / (d as f64 + alpha))
}

/// Upper bound on how much `utility` can change across two inputs within
/// substitution distance k of each other: k / (alpha * (k + alpha)).
///
/// This is an upper bound, not an identity: a language may contain no pair of
/// words exactly k apart.
pub fn sensitivity_bound(k: usize, alpha: f64) -> Result<f64, WordError> {
    if k == 0 {
        return Err(WordError::ZeroK);
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(WordError::NonPositiveAlpha(alpha));
    }
    let k = k as f64;
    Ok(k / (alpha * (k + alpha)))
}
