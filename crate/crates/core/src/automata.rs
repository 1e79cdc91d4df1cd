//! Levenshtein automata: the fixed-length substitution machine the sampler
//! walks, the full edit-distance NFA used for membership testing, distance
//! restriction, and DOT/JSON export.
//!
//! The substitution machine is built directly from its closed-form transition
//! rule rather than by determinizing the NFA: for fixed-length,
//! substitution-only machines the direct construction is exact and linear in
//! `|x| * k * |alphabet|`. States are labeled by (layer, errors) plus an
//! optional transition-system component for product machines; every
//! transition advances the layer by one and raises the error count by zero or
//! one, so anything the machine accepts has length exactly `|x|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, AlphabetId, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error("cannot build a machine for the empty word")]
    EmptyWord,
    #[error("error budget k must be at least 1")]
    ZeroK,
    #[error("word and automaton belong to different alphabets")]
    AlphabetMismatch,
    #[error("distance {requested} exceeds the machine's error budget {max}")]
    DistanceOutOfRange { requested: usize, max: usize },
    #[error("malformed automaton JSON: {0}")]
    Json(String),
    #[error("invalid automaton document: {0}")]
    InvalidDocument(String),
}

pub type StateId = usize;

/// Label of a layered-automaton state: input position, accumulated errors,
/// and the transition-system component for product machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLabel {
    pub layer: usize,
    pub errors: usize,
    pub ts_state: Option<usize>,
}

impl StateLabel {
    fn render(&self) -> String {
        match self.ts_state {
            Some(s) => format!("q_{{{},{}}},{}", self.layer, self.errors, s),
            None => format!("q_{{{},{}}}", self.layer, self.errors),
        }
    }
}

/// Deterministic layered automaton over symbol indices.
///
/// Houses the fixed-length substitution machine, its restriction to one exact
/// distance, and the synchronous product with a transition system. A machine
/// with no states (`initial == None`) is the legal result of restricting to a
/// distance that no accepted word attains.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredAutomaton {
    alphabet_id: AlphabetId,
    alphabet_size: usize,
    word_len: usize,
    max_err: usize,
    labels: Vec<StateLabel>,
    initial: Option<StateId>,
    accepting: Vec<StateId>,
    // Per state, (symbol, successor) pairs sorted by symbol.
    transitions: Vec<Vec<(usize, StateId)>>,
}

impl LayeredAutomaton {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        alphabet_id: AlphabetId,
        alphabet_size: usize,
        word_len: usize,
        max_err: usize,
        labels: Vec<StateLabel>,
        initial: Option<StateId>,
        accepting: Vec<StateId>,
        transitions: Vec<Vec<(usize, StateId)>>,
    ) -> Self {
        LayeredAutomaton {
            alphabet_id,
            alphabet_size,
            word_len,
            max_err,
            labels,
            initial,
            accepting,
            transitions,
        }
    }

    pub fn alphabet_id(&self) -> AlphabetId {
        self.alphabet_id
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn max_err(&self) -> usize {
        self.max_err
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    /// Total number of (state, symbol) transitions.
    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// Number of distinct (from, to) edges, with parallel symbol transitions
    /// collapsed — the count a graph library would report.
    pub fn num_graph_edges(&self) -> usize {
        self.transitions
            .iter()
            .map(|outgoing| {
                let mut targets: Vec<StateId> = outgoing.iter().map(|&(_, to)| to).collect();
                targets.sort_unstable();
                targets.dedup();
                targets.len()
            })
            .sum()
    }

    pub fn is_machine_empty(&self) -> bool {
        self.initial.is_none()
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn accepting(&self) -> &[StateId] {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.binary_search(&q).is_ok()
    }

    pub fn label(&self, q: StateId) -> StateLabel {
        self.labels[q]
    }

    pub fn transitions_from(&self, q: StateId) -> &[(usize, StateId)] {
        &self.transitions[q]
    }

    pub fn successor(&self, q: StateId, symbol: usize) -> Option<StateId> {
        self.transitions[q]
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .ok()
            .map(|pos| self.transitions[q][pos].1)
    }

    /// Deterministic walk; wrong-length words are rejected outright because
    /// every transition advances the layer.
    pub fn accepts(&self, w: &Word) -> Result<bool, AutomatonError> {
        if w.alphabet_id() != self.alphabet_id {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let mut state = match self.initial {
            Some(q) => q,
            None => return Ok(false),
        };
        if w.len() != self.word_len {
            return Ok(false);
        }
        for &letter in w.letters() {
            match self.successor(state, letter) {
                Some(next) => state = next,
                None => return Ok(false),
            }
        }
        Ok(self.is_accepting(state))
    }

    /// Keeps exactly the states and transitions on paths from the initial
    /// state to layer-`word_len` states with error level exactly `distance`
    /// (every transition-system component counts as accepting for products).
    ///
    /// An unreachable level is a legal outcome and yields an empty machine.
    pub fn restrict_to_distance(
        &self,
        distance: usize,
    ) -> Result<LayeredAutomaton, AutomatonError> {
        if distance > self.max_err {
            return Err(AutomatonError::DistanceOutOfRange {
                requested: distance,
                max: self.max_err,
            });
        }
        let empty = || LayeredAutomaton {
            alphabet_id: self.alphabet_id,
            alphabet_size: self.alphabet_size,
            word_len: self.word_len,
            max_err: distance,
            labels: Vec::new(),
            initial: None,
            accepting: Vec::new(),
            transitions: vec![],
        };
        let initial = match self.initial {
            Some(q) => q,
            None => return Ok(empty()),
        };

        // States sorted by layer let both sweeps run in one pass each.
        let mut by_layer_desc: Vec<StateId> = (0..self.num_states()).collect();
        by_layer_desc.sort_by_key(|&q| std::cmp::Reverse(self.labels[q].layer));

        let mut co_reach = vec![false; self.num_states()];
        for &q in &by_layer_desc {
            let label = self.labels[q];
            if label.layer == self.word_len {
                co_reach[q] = label.errors == distance && self.is_accepting(q);
            } else {
                co_reach[q] = self.transitions[q].iter().any(|&(_, to)| co_reach[to]);
            }
        }
        if !co_reach[initial] {
            return Ok(empty());
        }

        let mut forward = vec![false; self.num_states()];
        forward[initial] = true;
        for &q in by_layer_desc.iter().rev() {
            if !forward[q] {
                continue;
            }
            for &(_, to) in &self.transitions[q] {
                forward[to] = true;
            }
        }

        let mut remap = vec![usize::MAX; self.num_states()];
        let mut labels = Vec::new();
        for q in 0..self.num_states() {
            if forward[q] && co_reach[q] {
                remap[q] = labels.len();
                labels.push(self.labels[q]);
            }
        }
        let mut transitions = vec![Vec::new(); labels.len()];
        let mut accepting = Vec::new();
        for q in 0..self.num_states() {
            if remap[q] == usize::MAX {
                continue;
            }
            for &(symbol, to) in &self.transitions[q] {
                if remap[to] != usize::MAX {
                    transitions[remap[q]].push((symbol, remap[to]));
                }
            }
            if self.labels[q].layer == self.word_len && self.labels[q].errors == distance {
                accepting.push(remap[q]);
            }
        }
        Ok(LayeredAutomaton {
            alphabet_id: self.alphabet_id,
            alphabet_size: self.alphabet_size,
            word_len: self.word_len,
            max_err: distance,
            labels,
            initial: Some(remap[initial]),
            accepting,
            transitions,
        })
    }

    /// Enumerates every accepted word by walking all paths. Intended for
    /// small machines in tests and the brute-force oracle.
    pub fn accepted_words(&self, alphabet: &Alphabet) -> Result<Vec<Word>, AutomatonError> {
        if alphabet.id() != self.alphabet_id {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let mut out = Vec::new();
        let initial = match self.initial {
            Some(q) => q,
            None => return Ok(out),
        };
        let mut stack = vec![(initial, Vec::new())];
        while let Some((q, letters)) = stack.pop() {
            if self.labels[q].layer == self.word_len {
                if self.is_accepting(q) {
                    out.push(alphabet.word(letters).expect("letters come from machine"));
                }
                continue;
            }
            for &(symbol, to) in &self.transitions[q] {
                let mut next = letters.clone();
                next.push(symbol);
                stack.push((to, next));
            }
        }
        Ok(out)
    }

    /// DOT rendering with accepting states drawn as double circles. Optional
    /// per-state annotations (path counts, say) are appended to the labels.
    pub fn to_dot(
        &self,
        alphabet: &Alphabet,
        annotations: Option<&[String]>,
    ) -> Result<String, AutomatonError> {
        if alphabet.id() != self.alphabet_id {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let mut dot =
            String::from("digraph levenshtein {\n  rankdir=LR;\n  node [shape=circle];\n");
        if let Some(initial) = self.initial {
            dot.push_str("  __start [shape=none, label=\"\"];\n");
            dot.push_str(&format!("  __start -> s{initial};\n"));
        }
        for (q, label) in self.labels.iter().enumerate() {
            let mut text = label.render();
            if let Some(notes) = annotations {
                if let Some(note) = notes.get(q) {
                    if !note.is_empty() {
                        text.push_str("\\n");
                        text.push_str(note);
                    }
                }
            }
            let shape = if self.is_accepting(q) {
                ", shape=doublecircle"
            } else {
                ""
            };
            dot.push_str(&format!("  s{q} [label=\"{text}\"{shape}];\n"));
        }
        for (q, outgoing) in self.transitions.iter().enumerate() {
            // Collapse parallel transitions into one labeled edge per target.
            let mut grouped: Vec<(StateId, Vec<usize>)> = Vec::new();
            for &(symbol, to) in outgoing {
                match grouped.iter_mut().find(|(t, _)| *t == to) {
                    Some((_, symbols)) => symbols.push(symbol),
                    None => grouped.push((to, vec![symbol])),
                }
            }
            for (to, symbols) in grouped {
                let label = symbols
                    .iter()
                    .map(|&s| escape_dot(alphabet.symbol(s)))
                    .collect::<Vec<_>>()
                    .join(",");
                dot.push_str(&format!("  s{q} -> s{to} [label=\"{label}\"];\n"));
            }
        }
        dot.push_str("}\n");
        Ok(dot)
    }

    /// JSON document round-trippable through [`LayeredAutomaton::from_json`].
    pub fn to_json(&self, alphabet: &Alphabet) -> Result<String, AutomatonError> {
        if alphabet.id() != self.alphabet_id {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let doc = AutomatonDoc {
            alphabet: alphabet.symbols().to_vec(),
            word_len: self.word_len,
            max_err: self.max_err,
            states: self
                .labels
                .iter()
                .enumerate()
                .map(|(id, label)| StateDoc {
                    id,
                    i: label.layer,
                    e: label.errors,
                    s: label.ts_state,
                })
                .collect(),
            initial: self.initial,
            accepting: self.accepting.clone(),
            transitions: self
                .transitions
                .iter()
                .enumerate()
                .flat_map(|(from, outgoing)| {
                    outgoing.iter().map(move |&(symbol, to)| (from, symbol, to))
                })
                .map(|(from, symbol, to)| EdgeDoc {
                    from,
                    symbol: alphabet.symbol(symbol).to_string(),
                    to,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| AutomatonError::Json(e.to_string()))
    }

    /// Parses and validates an exported machine, returning it together with
    /// the alphabet embedded in the document.
    pub fn from_json(text: &str) -> Result<(LayeredAutomaton, Alphabet), AutomatonError> {
        let doc: AutomatonDoc =
            serde_json::from_str(text).map_err(|e| AutomatonError::Json(e.to_string()))?;
        let alphabet = Alphabet::from_symbols(doc.alphabet.clone())
            .map_err(|e| AutomatonError::InvalidDocument(e.to_string()))?;
        let n = doc.states.len();
        let mut labels = vec![None; n];
        for state in &doc.states {
            if state.id >= n {
                return Err(AutomatonError::InvalidDocument(format!(
                    "state id {} out of range",
                    state.id
                )));
            }
            if state.i > doc.word_len || state.e > doc.max_err {
                return Err(AutomatonError::InvalidDocument(format!(
                    "state ({}, {}) outside layer/error bounds",
                    state.i, state.e
                )));
            }
            if labels[state.id]
                .replace(StateLabel {
                    layer: state.i,
                    errors: state.e,
                    ts_state: state.s,
                })
                .is_some()
            {
                return Err(AutomatonError::InvalidDocument(format!(
                    "duplicate state id {}",
                    state.id
                )));
            }
        }
        let labels: Vec<StateLabel> = labels
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| AutomatonError::InvalidDocument("non-contiguous state ids".into()))?;
        if let Some(initial) = doc.initial {
            if initial >= n {
                return Err(AutomatonError::InvalidDocument(
                    "initial out of range".into(),
                ));
            }
            if labels[initial].layer != 0 {
                return Err(AutomatonError::InvalidDocument(
                    "initial state must sit in layer 0".into(),
                ));
            }
        } else if n != 0 {
            return Err(AutomatonError::InvalidDocument(
                "non-empty machine without an initial state".into(),
            ));
        }
        let mut accepting = doc.accepting.clone();
        accepting.sort_unstable();
        accepting.dedup();
        for &q in &accepting {
            if q >= n {
                return Err(AutomatonError::InvalidDocument(
                    "accepting id out of range".into(),
                ));
            }
            if labels[q].layer != doc.word_len {
                return Err(AutomatonError::InvalidDocument(
                    "accepting states must sit in the final layer".into(),
                ));
            }
        }
        let mut transitions = vec![Vec::new(); n];
        for edge in &doc.transitions {
            if edge.from >= n || edge.to >= n {
                return Err(AutomatonError::InvalidDocument(
                    "transition endpoint out of range".into(),
                ));
            }
            let symbol = alphabet.index_of(&edge.symbol).ok_or_else(|| {
                AutomatonError::InvalidDocument(format!("unknown symbol {:?}", edge.symbol))
            })?;
            let (from, to) = (labels[edge.from], labels[edge.to]);
            if to.layer != from.layer + 1 {
                return Err(AutomatonError::InvalidDocument(
                    "transitions must advance the layer by exactly one".into(),
                ));
            }
            if to.errors != from.errors && to.errors != from.errors + 1 {
                return Err(AutomatonError::InvalidDocument(
                    "transitions must raise the error count by zero or one".into(),
                ));
            }
            transitions[edge.from].push((symbol, edge.to));
        }
        for outgoing in &mut transitions {
            outgoing.sort_unstable();
            if outgoing.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(AutomatonError::InvalidDocument(
                    "duplicate (state, symbol) transition".into(),
                ));
            }
        }
        Ok((
            LayeredAutomaton {
                alphabet_id: alphabet.id(),
                alphabet_size: alphabet.len(),
                word_len: doc.word_len,
                max_err: doc.max_err,
                labels,
                initial: doc.initial,
                accepting,
                transitions,
            },
            alphabet,
        ))
    }
}

fn escape_dot(symbol: &str) -> String {
    symbol.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Serialize, Deserialize)]
struct AutomatonDoc {
    alphabet: Vec<String>,
    word_len: usize,
    max_err: usize,
    states: Vec<StateDoc>,
    initial: Option<usize>,
    accepting: Vec<usize>,
    transitions: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    id: usize,
    i: usize,
    e: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    from: usize,
    symbol: String,
    to: usize,
}

/// Builds the deterministic fixed-length substitution machine for `x`: it
/// accepts exactly the words of length `|x|` within substitution distance `k`
/// of `x`. Reading the correct symbol keeps the error level, any other symbol
/// raises it while the budget lasts. States unreachable from the start or
/// unable to reach the final layer are never materialized.
pub fn build_substitution_automaton(
    alphabet: &Alphabet,
    x: &Word,
    k: usize,
) -> Result<LayeredAutomaton, AutomatonError> {
    if x.alphabet_id() != alphabet.id() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    if x.is_empty() {
        return Err(AutomatonError::EmptyWord);
    }
    if k == 0 {
        return Err(AutomatonError::ZeroK);
    }
    let n = x.len();
    // A unary alphabet has no wrong symbols, so no error level is reachable.
    let budget = if alphabet.len() >= 2 { k.min(n) } else { 0 };

    // id lookup for (layer, errors); layer i holds min(i, budget) + 1 states.
    let mut offsets = Vec::with_capacity(n + 1);
    let mut total = 0;
    for i in 0..=n {
        offsets.push(total);
        total += i.min(budget) + 1;
    }
    let id = |i: usize, e: usize| offsets[i] + e;

    let mut labels = Vec::with_capacity(total);
    for i in 0..=n {
        for e in 0..=i.min(budget) {
            labels.push(StateLabel {
                layer: i,
                errors: e,
                ts_state: None,
            });
        }
    }
    let mut transitions = vec![Vec::new(); total];
    for (i, &correct) in x.letters().iter().enumerate() {
        for e in 0..=i.min(budget) {
            let from = id(i, e);
            for symbol in 0..alphabet.len() {
                if symbol == correct {
                    transitions[from].push((symbol, id(i + 1, e)));
                } else if e < budget {
                    transitions[from].push((symbol, id(i + 1, e + 1)));
                }
            }
        }
    }
    let accepting: Vec<StateId> = (0..=n.min(budget)).map(|e| id(n, e)).collect();
    Ok(LayeredAutomaton {
        alphabet_id: alphabet.id(),
        alphabet_size: alphabet.len(),
        word_len: n,
        max_err: k,
        labels,
        initial: Some(id(0, 0)),
        accepting,
        transitions,
    })
}

/// Transition label of the full edit-distance NFA: a concrete symbol, the
/// wildcard consuming any symbol, or a silent edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfaLabel {
    Symbol(usize),
    Any,
    Epsilon,
}

/// Nondeterministic automaton accepting every word within full Levenshtein
/// distance `k` of a fixed word. Membership testing is its only contract; the
/// sampling pipeline never touches it.
#[derive(Debug, Clone)]
pub struct EditNfa {
    alphabet_id: AlphabetId,
    word_len: usize,
    max_err: usize,
    // Per (layer * (k + 1) + errors) state id, outgoing labeled edges.
    edges: Vec<Vec<(NfaLabel, usize)>>,
}

/// Builds the full Levenshtein NFA with per-position states carrying an error
/// count: matching consumes the expected symbol for free, an insertion
/// consumes any symbol in place, a deletion silently skips a position, and a
/// substitution consumes any symbol while advancing.
pub fn build_full_levenshtein_nfa(
    alphabet: &Alphabet,
    x: &Word,
    k: usize,
) -> Result<EditNfa, AutomatonError> {
    if x.alphabet_id() != alphabet.id() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let n = x.len();
    let width = k + 1;
    let id = |i: usize, e: usize| i * width + e;
    let mut edges = vec![Vec::new(); (n + 1) * width];
    for i in 0..=n {
        for e in 0..=k {
            let from = id(i, e);
            if i < n {
                edges[from].push((NfaLabel::Symbol(x.letters()[i]), id(i + 1, e)));
            }
            if e < k {
                edges[from].push((NfaLabel::Any, id(i, e + 1)));
                if i < n {
                    edges[from].push((NfaLabel::Epsilon, id(i + 1, e + 1)));
                    edges[from].push((NfaLabel::Any, id(i + 1, e + 1)));
                }
            }
        }
    }
    Ok(EditNfa {
        alphabet_id: alphabet.id(),
        word_len: n,
        max_err: k,
        edges,
    })
}

impl EditNfa {
    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn max_err(&self) -> usize {
        self.max_err
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    fn epsilon_close(&self, active: &mut [bool]) {
        let mut queue: Vec<usize> = (0..active.len()).filter(|&q| active[q]).collect();
        while let Some(q) = queue.pop() {
            for &(label, to) in &self.edges[q] {
                if label == NfaLabel::Epsilon && !active[to] {
                    active[to] = true;
                    queue.push(to);
                }
            }
        }
    }

    /// On-the-fly subset simulation with epsilon closure.
    pub fn accepts(&self, w: &Word) -> Result<bool, AutomatonError> {
        if w.alphabet_id() != self.alphabet_id {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let mut active = vec![false; self.edges.len()];
        active[0] = true;
        self.epsilon_close(&mut active);
        for &letter in w.letters() {
            let mut next = vec![false; self.edges.len()];
            for (q, _) in active.iter().enumerate().filter(|(_, &on)| on) {
                for &(label, to) in &self.edges[q] {
                    let fires = match label {
                        NfaLabel::Symbol(s) => s == letter,
                        NfaLabel::Any => true,
                        NfaLabel::Epsilon => false,
                    };
                    if fires {
                        next[to] = true;
                    }
                }
            }
            self.epsilon_close(&mut next);
            active = next;
            if active.iter().all(|&on| !on) {
                return Ok(false);
            }
        }
        let width = self.max_err + 1;
        Ok((0..width).any(|e| active[self.word_len * width + e]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{hamming_distance, levenshtein_distance};

    fn enumerate(alphabet: &Alphabet, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let sigma = alphabet.len();
        let count = sigma.pow(n as u32);
        for code in 0..count {
            let mut letters = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                letters.push(c % sigma);
                c /= sigma;
            }
            out.push(alphabet.word(letters).unwrap());
        }
        out
    }

    #[test]
    fn substitution_machine_matches_figure_structure() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        assert_eq!(m.num_states(), 9);
        for accept in ["abc", "abb", "cbc"] {
            assert!(m.accepts(&a.word_from_text(accept).unwrap()).unwrap());
        }
        // "bca" differs from "abc" in every position.
        assert!(!m.accepts(&a.word_from_text("bca").unwrap()).unwrap());
        assert!(!m.accepts(&a.word_from_text("ab").unwrap()).unwrap());
        assert!(!m.accepts(&a.word_from_text("abca").unwrap()).unwrap());
    }

    #[test]
    fn k_equal_to_length_covers_the_whole_class() {
        let a = Alphabet::from_text("ab").unwrap();
        let x = a.word_from_text("a").unwrap();
        let m = build_substitution_automaton(&a, &x, 1).unwrap();
        assert!(m.accepts(&a.word_from_text("a").unwrap()).unwrap());
        assert!(m.accepts(&a.word_from_text("b").unwrap()).unwrap());
    }

    #[test]
    fn distance_one_neighbourhood() {
        let a = Alphabet::from_text("ab").unwrap();
        let x = a.word_from_text("ab").unwrap();
        let m = build_substitution_automaton(&a, &x, 1).unwrap();
        for accept in ["ab", "bb", "aa"] {
            assert!(m.accepts(&a.word_from_text(accept).unwrap()).unwrap());
        }
        assert!(!m.accepts(&a.word_from_text("ba").unwrap()).unwrap());
    }

    #[test]
    fn build_rejects_empty_word_and_zero_k() {
        let a = Alphabet::from_text("ab").unwrap();
        let empty = a.word_from_text("").unwrap();
        let x = a.word_from_text("ab").unwrap();
        assert_eq!(
            build_substitution_automaton(&a, &empty, 1),
            Err(AutomatonError::EmptyWord)
        );
        assert_eq!(
            build_substitution_automaton(&a, &x, 0),
            Err(AutomatonError::ZeroK)
        );
    }

    #[test]
    fn oversized_k_behaves_like_word_length() {
        let a = Alphabet::from_text("ab").unwrap();
        let x = a.word_from_text("ab").unwrap();
        let m_big = build_substitution_automaton(&a, &x, 10).unwrap();
        let m_fit = build_substitution_automaton(&a, &x, 2).unwrap();
        assert_eq!(m_big.num_states(), m_fit.num_states());
        for w in enumerate(&a, 2) {
            assert_eq!(m_big.accepts(&w).unwrap(), m_fit.accepts(&w).unwrap());
        }
    }

    #[test]
    fn language_is_exactly_the_hamming_ball_exhaustive() {
        for sigma_text in ["ab", "abc", "abcd"] {
            let a = Alphabet::from_text(sigma_text).unwrap();
            let max_len = if a.len() == 4 { 4 } else { 5 };
            for n in 1..=max_len {
                for x in enumerate(&a, n) {
                    for k in 1..=n {
                        let m = build_substitution_automaton(&a, &x, k).unwrap();
                        for w in enumerate(&a, n) {
                            let expected = hamming_distance(&w, &x).unwrap() <= k;
                            assert_eq!(m.accepts(&w).unwrap(), expected);
                        }
                        // Wrong lengths are always rejected.
                        assert!(!m.accepts(&a.word(vec![0; n + 1]).unwrap()).unwrap());
                        if n > 1 {
                            assert!(!m.accepts(&a.word(vec![0; n - 1]).unwrap()).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn restriction_examples() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();

        let exact2 = m.restrict_to_distance(2).unwrap();
        let words2 = exact2.accepted_words(&a).unwrap();
        assert_eq!(words2.len(), 12);
        for w in &words2 {
            assert_eq!(hamming_distance(w, &x).unwrap(), 2);
        }

        let exact0 = m.restrict_to_distance(0).unwrap();
        assert_eq!(exact0.accepted_words(&a).unwrap(), vec![x.clone()]);

        let exact1 = m.restrict_to_distance(1).unwrap();
        assert_eq!(exact1.accepted_words(&a).unwrap().len(), 6);

        assert_eq!(
            m.restrict_to_distance(3),
            Err(AutomatonError::DistanceOutOfRange {
                requested: 3,
                max: 2
            })
        );
    }

    #[test]
    fn restriction_partitions_the_language() {
        let a = Alphabet::from_text("abc").unwrap();
        for n in 1..=4 {
            let x = a.word(vec![0; n]).unwrap();
            for k in 1..=n {
                let m = build_substitution_automaton(&a, &x, k).unwrap();
                let mut pieces = Vec::new();
                for ell in 0..=k.min(n) {
                    pieces.extend(
                        m.restrict_to_distance(ell)
                            .unwrap()
                            .accepted_words(&a)
                            .unwrap(),
                    );
                }
                let mut whole = m.accepted_words(&a).unwrap();
                pieces.sort_by(|l, r| l.letters().cmp(r.letters()));
                whole.sort_by(|l, r| l.letters().cmp(r.letters()));
                assert_eq!(pieces.len(), whole.len());
                assert_eq!(pieces, whole);
            }
        }
    }

    #[test]
    fn empty_restriction_is_a_value() {
        let a = Alphabet::from_text("a").unwrap();
        let x = a.word_from_text("aaa").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let restricted = m.restrict_to_distance(1).unwrap();
        assert!(restricted.is_machine_empty());
        assert_eq!(restricted.num_states(), 0);
        assert!(!restricted.accepts(&x).unwrap());
    }

    #[test]
    fn full_nfa_zero_edit_accepts_only_the_word() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let nfa = build_full_levenshtein_nfa(&a, &x, 0).unwrap();
        assert!(nfa.accepts(&x).unwrap());
        for reject in ["ab", "abcc", "abb", ""] {
            assert!(!nfa.accepts(&a.word_from_text(reject).unwrap()).unwrap());
        }
    }

    #[test]
    fn full_nfa_single_edit_witnesses() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let nfa = build_full_levenshtein_nfa(&a, &x, 2).unwrap();
        assert!(nfa.accepts(&a.word_from_text("ab").unwrap()).unwrap());
        assert!(nfa.accepts(&a.word_from_text("abcc").unwrap()).unwrap());
    }

    #[test]
    fn full_nfa_matches_dp_distance_exhaustively() {
        let a = Alphabet::from_text("ab").unwrap();
        for n in 1..=4 {
            for x in enumerate(&a, n) {
                for k in 0..=2usize {
                    let nfa = build_full_levenshtein_nfa(&a, &x, k).unwrap();
                    for len in 0..=n + k {
                        for w in enumerate(&a, len) {
                            let expected = levenshtein_distance(&w, &x).unwrap() <= k;
                            assert_eq!(nfa.accepts(&w).unwrap(), expected, "x={x} w={w} k={k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dot_export_marks_accepting_states() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let dot = m.to_dot(&a, None).unwrap();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("q_{0,0}"));

        let empty = build_substitution_automaton(
            &Alphabet::from_text("a").unwrap(),
            &Alphabet::from_text("a")
                .unwrap()
                .word_from_text("aa")
                .unwrap(),
            1,
        )
        .unwrap()
        .restrict_to_distance(1)
        .unwrap();
        let dot = empty
            .to_dot(&Alphabet::from_text("a").unwrap(), None)
            .unwrap();
        assert!(dot.starts_with("digraph"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn json_round_trip_is_structural_identity() {
        let a = Alphabet::from_text("abc").unwrap();
        let x = a.word_from_text("abc").unwrap();
        let m = build_substitution_automaton(&a, &x, 2).unwrap();
        let (back, alphabet) = LayeredAutomaton::from_json(&m.to_json(&a).unwrap()).unwrap();
        assert_eq!(m, back);
        assert_eq!(alphabet, a);

        let restricted = m.restrict_to_distance(2).unwrap();
        let (back, _) = LayeredAutomaton::from_json(&restricted.to_json(&a).unwrap()).unwrap();
        assert_eq!(restricted, back);

        // An empty machine is still a valid, round-trippable document.
        let unary = Alphabet::from_text("a").unwrap();
        let empty = build_substitution_automaton(&unary, &unary.word_from_text("aa").unwrap(), 1)
            .unwrap()
            .restrict_to_distance(1)
            .unwrap();
        let (back, _) = LayeredAutomaton::from_json(&empty.to_json(&unary).unwrap()).unwrap();
        assert_eq!(empty, back);
        assert!(back.is_machine_empty());
    }

    #[test]
    fn json_rejects_malformed_documents() {
        assert!(matches!(
            LayeredAutomaton::from_json("{"),
            Err(AutomatonError::Json(_))
        ));
        let doc = r#"{
            "alphabet": ["a"], "word_len": 1, "max_err": 1,
            "states": [{"id": 0, "i": 0, "e": 0}, {"id": 1, "i": 1, "e": 0}],
            "initial": 0, "accepting": [1],
            "transitions": [
                {"from": 0, "symbol": "a", "to": 1},
                {"from": 0, "symbol": "a", "to": 1}
            ]
        }"#;
        assert!(matches!(
            LayeredAutomaton::from_json(doc),
            Err(AutomatonError::InvalidDocument(_))
        ));
        let jump = r#"{
            "alphabet": ["a"], "word_len": 2, "max_err": 1,
            "states": [{"id": 0, "i": 0, "e": 0}, {"id": 1, "i": 2, "e": 0}],
            "initial": 0, "accepting": [1],
            "transitions": [{"from": 0, "symbol": "a", "to": 1}]
        }"#;
        assert!(matches!(
            LayeredAutomaton::from_json(jump),
            Err(AutomatonError::InvalidDocument(_))
        ));
    }

    proptest::proptest! {
        /// Export and re-parse is structural identity for machines of any
        /// shape this module builds, restricted or not.
        #[test]
        fn json_round_trip_property(
            letters in proptest::collection::vec(0usize..3, 1..6),
            k in 1usize..4,
            restrict in proptest::option::of(0usize..3),
        ) {
            let a = Alphabet::from_text("abc").unwrap();
            let x = a.word(letters).unwrap();
            let mut m = build_substitution_automaton(&a, &x, k).unwrap();
            if let Some(ell) = restrict {
                let ell = ell.min(m.max_err());
                m = m.restrict_to_distance(ell).unwrap();
            }
            let (back, alphabet) = LayeredAutomaton::from_json(&m.to_json(&a).unwrap()).unwrap();
            proptest::prop_assert_eq!(&m, &back);
            proptest::prop_assert_eq!(alphabet.id(), a.id());
        }
    }

    /// Derived from this construction with k = |x|: the 32-character
    /// case-study string yields 561 states and 1056 collapsed edges.
    #[test]
    fn case_study_machine_size_regression() {
        let a = Alphabet::from_text("american control conference 2019").unwrap();
        let x = a
            .word_from_text("american control conference 2019")
            .unwrap();
        assert_eq!(x.len(), 32);
        assert_eq!(a.len(), 16);
        let m = build_substitution_automaton(&a, &x, 32).unwrap();
        assert_eq!(m.num_states(), 561);
        assert_eq!(m.num_graph_edges(), 1056);
    }
}
