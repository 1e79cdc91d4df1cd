//! Deterministic transition systems, the synchronous product with a
//! substitution machine, run privatization, and a grid-world generator.
//!
//! A plan is a word over the action alphabet; it is valid when every step is
//! defined from the initial state. The product machine accepts exactly the
//! valid plans the substitution machine accepts, so sampling on the product
//! privatizes a run while never emitting an inexecutable plan.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{build_substitution_automaton, LayeredAutomaton, StateId, StateLabel};
use crate::mechanism::{MechanismError, MechanismParams, RestrictedMechanism};
use crate::words::{Alphabet, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("invalid transition-system document: {0}")]
    Schema(String),
    #[error("duplicate transition from state {state:?} on action {action:?}")]
    NondeterministicTransition { state: String, action: String },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("word and transition system use different alphabets")]
    AlphabetMismatch,
    #[error("input word is not a valid plan of the transition system")]
    InvalidInputRun,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// A finite deterministic transition structure: named states, an initial
/// state, an action alphabet, and a partial (state, action) -> state map.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem {
    state_names: Vec<String>,
    state_index: HashMap<String, usize>,
    initial: usize,
    actions: Alphabet,
    // Per state, action index -> successor state index.
    trans: Vec<BTreeMap<usize, usize>>,
}

#[derive(Serialize, Deserialize)]
struct TsDoc {
    states: Vec<String>,
    initial: String,
    actions: Vec<String>,
    transitions: Vec<TsEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct TsEdgeDoc {
    from: String,
    action: String,
    to: String,
}

impl TransitionSystem {
    /// Validates and assembles a transition system from named parts.
    pub fn new<S: Into<String>>(
        states: Vec<S>,
        initial: &str,
        actions: Alphabet,
        transitions: Vec<(String, String, String)>,
    ) -> Result<Self, TransitionError> {
        let state_names: Vec<String> = states.into_iter().map(Into::into).collect();
        if state_names.is_empty() {
            return Err(TransitionError::Schema("no states".into()));
        }
        let mut state_index = HashMap::with_capacity(state_names.len());
        for (idx, name) in state_names.iter().enumerate() {
            if state_index.insert(name.clone(), idx).is_some() {
                return Err(TransitionError::Schema(format!("duplicate state {name:?}")));
            }
        }
        let initial = *state_index
            .get(initial)
            .ok_or_else(|| TransitionError::UnknownState(initial.to_string()))?;
        let mut trans = vec![BTreeMap::new(); state_names.len()];
        for (from, action, to) in transitions {
            let from_idx = *state_index
                .get(&from)
                .ok_or_else(|| TransitionError::UnknownState(from.clone()))?;
            let action_idx = actions
                .index_of(&action)
                .ok_or_else(|| TransitionError::UnknownAction(action.clone()))?;
            let to_idx = *state_index
                .get(&to)
                .ok_or_else(|| TransitionError::UnknownState(to.clone()))?;
            if trans[from_idx].insert(action_idx, to_idx).is_some() {
                return Err(TransitionError::NondeterministicTransition {
                    state: from,
                    action,
                });
            }
        }
        Ok(TransitionSystem {
            state_names,
            state_index,
            initial,
            actions,
            trans,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, TransitionError> {
        let doc: TsDoc =
            serde_json::from_str(text).map_err(|e| TransitionError::Schema(e.to_string()))?;
        let actions = Alphabet::from_symbols(doc.actions)
            .map_err(|e| TransitionError::Schema(e.to_string()))?;
        TransitionSystem::new(
            doc.states,
            &doc.initial,
            actions,
            doc.transitions
                .into_iter()
                .map(|e| (e.from, e.action, e.to))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let doc = TsDoc {
            states: self.state_names.clone(),
            initial: self.state_names[self.initial].clone(),
            actions: self.actions.symbols().to_vec(),
            transitions: self
                .trans
                .iter()
                .enumerate()
                .flat_map(|(from, row)| row.iter().map(move |(&action, &to)| (from, action, to)))
                .map(|(from, action, to)| TsEdgeDoc {
                    from: self.state_names[from].clone(),
                    action: self.actions.symbol(action).to_string(),
                    to: self.state_names[to].clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("transition system serializes")
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(BTreeMap::len).sum()
    }

    pub fn state_name(&self, idx: usize) -> &str {
        &self.state_names[idx]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn actions(&self) -> &Alphabet {
        &self.actions
    }

    pub fn successor(&self, state: usize, action: usize) -> Option<usize> {
        self.trans[state].get(&action).copied()
    }

    /// True when every step of the plan is defined starting from the initial
    /// state.
    pub fn is_valid_plan(&self, plan: &Word) -> Result<bool, TransitionError> {
        Ok(self.run_of_plan(plan)?.is_some())
    }

    /// The induced state sequence (starting at the initial state), or `None`
    /// when some step is undefined.
    pub fn run_of_plan(&self, plan: &Word) -> Result<Option<Vec<usize>>, TransitionError> {
        if plan.alphabet_id() != self.actions.id() {
            return Err(TransitionError::AlphabetMismatch);
        }
        let mut run = Vec::with_capacity(plan.len() + 1);
        let mut state = self.initial;
        run.push(state);
        for &action in plan.letters() {
            match self.successor(state, action) {
                Some(next) => {
                    state = next;
                    run.push(state);
                }
                None => return Ok(None),
            }
        }
        Ok(Some(run))
    }
}

/// Synchronous product of a layered machine and a transition system: a
/// transition exists exactly when both components move on the symbol. The
/// result accepts a word iff the machine accepts it and it is a valid plan.
/// Only states reachable from the start and able to reach the final layer
/// are kept.
pub fn build_product(
    a: &LayeredAutomaton,
    ts: &TransitionSystem,
) -> Result<LayeredAutomaton, TransitionError> {
    if a.alphabet_id() != ts.actions().id() {
        return Err(TransitionError::AlphabetMismatch);
    }
    let empty = || {
        LayeredAutomaton::assemble(
            a.alphabet_id(),
            a.alphabet_size(),
            a.word_len(),
            a.max_err(),
            Vec::new(),
            None,
            Vec::new(),
            Vec::new(),
        )
    };
    let a_initial = match a.initial() {
        Some(q) => q,
        None => return Ok(empty()),
    };

    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut parts: Vec<(StateId, usize)> = Vec::new();
    let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((a_initial, ts.initial()), 0);
    parts.push((a_initial, ts.initial()));
    edges.push(Vec::new());
    queue.push_back(0usize);
    while let Some(pid) = queue.pop_front() {
        let (q, s) = parts[pid];
        for &(symbol, q_next) in a.transitions_from(q) {
            if let Some(s_next) = ts.successor(s, symbol) {
                let next_pid = match index.get(&(q_next, s_next)) {
                    Some(&existing) => existing,
                    None => {
                        let fresh = parts.len();
                        index.insert((q_next, s_next), fresh);
                        parts.push((q_next, s_next));
                        edges.push(Vec::new());
                        queue.push_back(fresh);
                        fresh
                    }
                };
                edges[pid].push((symbol, next_pid));
            }
        }
    }

    // Co-reachability sweep from the accepting layer, in reverse layer order.
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by_key(|&pid| std::cmp::Reverse(a.label(parts[pid].0).layer));
    let mut keep = vec![false; parts.len()];
    for &pid in &order {
        let (q, _) = parts[pid];
        keep[pid] = if a.label(q).layer == a.word_len() {
            a.is_accepting(q)
        } else {
            edges[pid].iter().any(|&(_, to)| keep[to])
        };
    }
    if !keep[0] {
        return Ok(empty());
    }

    let mut remap = vec![usize::MAX; parts.len()];
    let mut labels = Vec::new();
    for (pid, &(q, s)) in parts.iter().enumerate() {
        if keep[pid] {
            remap[pid] = labels.len();
            let base = a.label(q);
            labels.push(StateLabel {
                layer: base.layer,
                errors: base.errors,
                ts_state: Some(s),
            });
        }
    }
    let mut transitions = vec![Vec::new(); labels.len()];
    let mut accepting = Vec::new();
    for pid in 0..parts.len() {
        if remap[pid] == usize::MAX {
            continue;
        }
        for &(symbol, to) in &edges[pid] {
            if remap[to] != usize::MAX {
                transitions[remap[pid]].push((symbol, remap[to]));
            }
        }
        transitions[remap[pid]].sort_unstable();
        let (q, _) = parts[pid];
        if a.is_accepting(q) {
            accepting.push(remap[pid]);
        }
    }
    accepting.sort_unstable();
    Ok(LayeredAutomaton::assemble(
        a.alphabet_id(),
        a.alphabet_size(),
        a.word_len(),
        a.max_err(),
        labels,
        Some(remap[0]),
        accepting,
        transitions,
    ))
}

/// Builds the per-distance sampling state for privatizing runs of `ts`
/// around the plan `x`: substitution machine of radius min(k, |x|), product
/// with the system, one restriction per inhabited distance. Distances with
/// no valid plan drop out, which clamps the support to what the system can
/// actually realize.
pub fn prepare_run_mechanism(
    ts: &TransitionSystem,
    x: &Word,
    params: &MechanismParams,
    allow_invalid_input: bool,
) -> Result<RestrictedMechanism, TransitionError> {
    let product = run_base_machine(ts, x, params, allow_invalid_input)?;
    RestrictedMechanism::from_base(&product, params).map_err(TransitionError::from)
}

/// The product machine the run privatizer samples on.
pub fn run_base_machine(
    ts: &TransitionSystem,
    x: &Word,
    params: &MechanismParams,
    allow_invalid_input: bool,
) -> Result<LayeredAutomaton, TransitionError> {
    if ts.actions().len() < 2 {
        return Err(MechanismError::DegenerateAlphabet.into());
    }
    if !allow_invalid_input && !ts.is_valid_plan(x)? {
        return Err(TransitionError::InvalidInputRun);
    }
    let radius = params.k().min(x.len()).max(1);
    let base =
        build_substitution_automaton(ts.actions(), x, radius).map_err(MechanismError::from)?;
    build_product(&base, ts)
}

/// Privatizes one run: the output is always a valid plan of `ts` with
/// substitution distance at most min(k, |x|) from `x`.
pub fn privatize_run<R: Rng + ?Sized>(
    ts: &TransitionSystem,
    x: &Word,
    params: &MechanismParams,
    rng: &mut R,
    allow_invalid_input: bool,
) -> Result<Word, TransitionError> {
    let mechanism = prepare_run_mechanism(ts, x, params, allow_invalid_input)?;
    Ok(mechanism.sample(rng)?)
}

/// A rows-by-cols grid world. Cells are states named `s_<row>_<col>`, the
/// action reaching a cell carries that cell's name (so plans and runs
/// coincide), moves go to the four neighbors plus optionally the cell
/// itself, and the walk starts in the corner cell `s_0_0`.
pub fn make_gridworld(rows: usize, cols: usize, include_stay: bool) -> TransitionSystem {
    assert!(rows >= 1 && cols >= 1, "grid must have at least one cell");
    let name = |r: usize, c: usize| format!("s_{r}_{c}");
    let mut state_names = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            state_names.push(name(r, c));
        }
    }
    let actions = Alphabet::from_symbols(state_names.clone()).expect("cell names are distinct");
    let idx = |r: usize, c: usize| r * cols + c;
    let mut trans = vec![BTreeMap::new(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let from = idx(r, c);
            let mut targets = Vec::new();
            if r > 0 {
                targets.push(idx(r - 1, c));
            }
            if r + 1 < rows {
                targets.push(idx(r + 1, c));
            }
            if c > 0 {
                targets.push(idx(r, c - 1));
            }
            if c + 1 < cols {
                targets.push(idx(r, c + 1));
            }
            if include_stay {
                targets.push(from);
            }
            for to in targets {
                // Action index equals target state index by construction.
                trans[from].insert(to, to);
            }
        }
    }
    let state_index = state_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    TransitionSystem {
        state_names,
        state_index,
        initial: 0,
        actions,
        trans,
    }
}

/// Parses a grid-world cell name of the form `s_<row>_<col>`.
pub fn grid_cell(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("s_")?;
    let (row, col) = rest.split_once('_')?;
    Some((row.parse().ok()?, col.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{prepare_word_mechanism, WeightingMode};
    use crate::words::hamming_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_ts() -> TransitionSystem {
        // A --b--> B, B --a--> A, nothing else.
        TransitionSystem::new(
            vec!["A", "B"],
            "A",
            Alphabet::from_text("ab").unwrap(),
            vec![
                ("A".into(), "b".into(), "B".into()),
                ("B".into(), "a".into(), "A".into()),
            ],
        )
        .unwrap()
    }

    fn complete_ts() -> TransitionSystem {
        // Two states, every action defined everywhere.
        TransitionSystem::new(
            vec!["L", "R"],
            "L",
            Alphabet::from_text("ab").unwrap(),
            vec![
                ("L".into(), "a".into(), "L".into()),
                ("L".into(), "b".into(), "R".into()),
                ("R".into(), "a".into(), "R".into()),
                ("R".into(), "b".into(), "L".into()),
            ],
        )
        .unwrap()
    }

    fn enumerate(alphabet: &Alphabet, n: usize) -> Vec<Word> {
        let sigma = alphabet.len();
        (0..sigma.pow(n as u32))
            .map(|code| {
                let mut letters = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    letters.push(c % sigma);
                    c /= sigma;
                }
                alphabet.word(letters).unwrap()
            })
            .collect()
    }

    #[test]
    fn minimal_self_loop_round_trips() {
        let ts = TransitionSystem::new(
            vec!["only"],
            "only",
            Alphabet::from_symbols(["loop"]).unwrap(),
            vec![("only".into(), "loop".into(), "only".into())],
        )
        .unwrap();
        let back = TransitionSystem::from_json(&ts.to_json()).unwrap();
        assert_eq!(ts, back);
    }

    #[test]
    fn duplicate_transition_is_nondeterministic() {
        let err = TransitionSystem::new(
            vec!["A", "B"],
            "A",
            Alphabet::from_text("a").unwrap(),
            vec![
                ("A".into(), "a".into(), "B".into()),
                ("A".into(), "a".into(), "A".into()),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            TransitionError::NondeterministicTransition { .. }
        ));
    }

    #[test]
    fn unknown_names_are_rejected() {
        let base =
            |edges| TransitionSystem::new(vec!["A"], "A", Alphabet::from_text("a").unwrap(), edges);
        assert!(matches!(
            base(vec![("A".into(), "a".into(), "Z".into())]),
            Err(TransitionError::UnknownState(_))
        ));
        assert!(matches!(
            base(vec![("A".into(), "z".into(), "A".into())]),
            Err(TransitionError::UnknownAction(_))
        ));
        assert!(matches!(
            TransitionSystem::from_json("{"),
            Err(TransitionError::Schema(_))
        ));
    }

    #[test]
    fn plan_validity_on_the_chain() {
        let ts = chain_ts();
        let act = ts.actions().clone();
        assert!(ts
            .is_valid_plan(&act.word_from_text("ba").unwrap())
            .unwrap());
        assert!(!ts
            .is_valid_plan(&act.word_from_text("bb").unwrap())
            .unwrap());
        let empty = act.word_from_text("").unwrap();
        assert!(ts.is_valid_plan(&empty).unwrap());
        assert_eq!(ts.run_of_plan(&empty).unwrap(), Some(vec![0]));
        assert_eq!(
            ts.run_of_plan(&act.word_from_text("ba").unwrap()).unwrap(),
            Some(vec![0, 1, 0])
        );
    }

    #[test]
    fn unconstrained_product_preserves_the_language() {
        let ts = complete_ts();
        let act = ts.actions().clone();
        let x = act.word_from_text("aba").unwrap();
        let machine = build_substitution_automaton(&act, &x, 2).unwrap();
        let product = build_product(&machine, &ts).unwrap();
        for w in enumerate(&act, 3) {
            assert_eq!(product.accepts(&w).unwrap(), machine.accepts(&w).unwrap());
        }
    }

    #[test]
    fn chain_product_rejects_invalid_neighbors() {
        let ts = chain_ts();
        let act = ts.actions().clone();
        let x = act.word_from_text("ba").unwrap();
        let machine = build_substitution_automaton(&act, &x, 1).unwrap();
        let product = build_product(&machine, &ts).unwrap();
        for w in enumerate(&act, 2) {
            let expected = act.display_word(&w).unwrap() == "ba";
            assert_eq!(product.accepts(&w).unwrap(), expected);
        }
    }

    #[test]
    fn product_is_the_intersection_exhaustively() {
        let systems = vec![chain_ts(), complete_ts(), make_gridworld(2, 2, false)];
        for ts in systems {
            let act = ts.actions().clone();
            let n = 3.min(act.len());
            for x in enumerate(&act, n) {
                for k in 1..=n {
                    let machine = build_substitution_automaton(&act, &x, k).unwrap();
                    let product = build_product(&machine, &ts).unwrap();
                    for w in enumerate(&act, n) {
                        let expected =
                            machine.accepts(&w).unwrap() && ts.is_valid_plan(&w).unwrap();
                        assert_eq!(product.accepts(&w).unwrap(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn gridworld_shapes() {
        assert_eq!(make_gridworld(15, 15, false).num_states(), 225);
        let tiny = make_gridworld(1, 1, true);
        assert_eq!(tiny.num_states(), 1);
        assert_eq!(tiny.num_transitions(), 1);
        let square = make_gridworld(2, 2, false);
        assert_eq!(square.num_states(), 4);
        assert_eq!(square.num_transitions(), 8);
        assert_eq!(grid_cell("s_3_11"), Some((3, 11)));
        assert_eq!(grid_cell("cell_1"), None);
    }

    #[test]
    fn gridworld_round_trips_through_json() {
        let ts = make_gridworld(3, 2, true);
        let back = TransitionSystem::from_json(&ts.to_json()).unwrap();
        assert_eq!(ts, back);
    }

    #[test]
    fn degenerate_support_returns_the_input_run() {
        let ts = chain_ts();
        let x = ts.actions().word_from_text("ba").unwrap();
        let params = MechanismParams::new(1.0, 1.0, 1, WeightingMode::Exact).unwrap();
        let mechanism = prepare_run_mechanism(&ts, &x, &params, false).unwrap();
        assert_eq!(mechanism.distribution().support(), &[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            assert_eq!(mechanism.sample(&mut rng).unwrap(), x);
        }
    }

    #[test]
    fn complete_system_matches_the_plain_word_mechanism() {
        let ts = complete_ts();
        let act = ts.actions().clone();
        let x = act.word_from_text("aba").unwrap();
        let params = MechanismParams::new(1.0, 1.0, 2, WeightingMode::Exact).unwrap();
        let run_mech = prepare_run_mechanism(&ts, &x, &params, false).unwrap();
        let word_mech = prepare_word_mechanism(&act, &x, &params).unwrap();
        let run_pmf = run_mech.analytic_pmf(&params).unwrap();
        let word_pmf = word_mech.analytic_pmf(&params).unwrap();
        assert_eq!(run_pmf.len(), word_pmf.len());
        for (distance, p) in &run_pmf {
            assert!((p - word_pmf[distance]).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_input_runs_need_the_escape_hatch() {
        let ts = chain_ts();
        let act = ts.actions().clone();
        let bad = act.word_from_text("ab").unwrap();
        let params = MechanismParams::new(1.0, 1.0, 2, WeightingMode::Exact).unwrap();
        assert!(matches!(
            prepare_run_mechanism(&ts, &bad, &params, false),
            Err(TransitionError::InvalidInputRun)
        ));
        // With the escape hatch the support comes from nonempty classes only.
        let mechanism = prepare_run_mechanism(&ts, &bad, &params, true).unwrap();
        assert_eq!(mechanism.distribution().support(), &[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = mechanism.sample(&mut rng).unwrap();
        assert!(ts.is_valid_plan(&out).unwrap());
    }

    #[test]
    fn privatized_runs_are_always_valid_plans() {
        let ts = make_gridworld(3, 3, false);
        let act = ts.actions().clone();
        // Walk right, right, down, down.
        let x = act
            .word_from_tokens(&["s_0_1", "s_0_2", "s_1_2", "s_2_2"])
            .unwrap();
        assert!(ts.is_valid_plan(&x).unwrap());
        let params = MechanismParams::new(2.0, 1.0, 4, WeightingMode::Exact).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..40 {
            let out = privatize_run(&ts, &x, &params, &mut rng, false).unwrap();
            assert!(ts.is_valid_plan(&out).unwrap());
            assert!(hamming_distance(&out, &x).unwrap() <= 4);
        }
    }
}
