//! Brute-force oracles and random instances shared by the integration tests.
//! Nothing here goes through the spec/product/determinize pipeline.
#![allow(dead_code)]

use std::collections::BTreeSet;

use opacity::autfile::parse_aut;
use opacity::moore::LabeledSystem;
use opacity::specs::{Mode, NotionKind, OpacityNotion, SecretType};
use opacity::{Alphabet, EventId, Nfa, StateId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn model(name: &str) -> LabeledSystem {
    let path = format!("{}/../../models/{name}.aut", env!("CARGO_MANIFEST_DIR"));
    parse_aut(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))).unwrap()
}

// ---------------------------------------------------------------- NFA oracles

fn closure(g: &Nfa, seeds: impl IntoIterator<Item = StateId>) -> BTreeSet<StateId> {
    let silent = g.alphabet().silent();
    let mut set: BTreeSet<StateId> = seeds.into_iter().collect();
    let mut stack: Vec<StateId> = set.iter().copied().collect();
    while let Some(q) = stack.pop() {
        for &(e, t) in g.transitions(q) {
            if Some(e) == silent && set.insert(t) {
                stack.push(t);
            }
        }
    }
    set
}

/// Subset simulation written independently of the library.
pub fn accepts(g: &Nfa, word: &[EventId]) -> bool {
    let mut cur = closure(g, g.initial().iter().copied());
    for &e in word {
        let next: Vec<StateId> = cur
            .iter()
            .flat_map(|&q| g.transitions(q).iter().filter(move |(f, _)| *f == e).map(|&(_, t)| t))
            .collect();
        cur = closure(g, next);
    }
    cur.iter().any(|&q| g.is_marked(q))
}

/// Every word over `symbols` of length at most `max_len`.
pub fn all_words(symbols: &[EventId], max_len: usize) -> Vec<Vec<EventId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &s in symbols {
                let mut v: Vec<EventId> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Marked language up to `max_len`, by testing every word.
pub fn language(g: &Nfa, max_len: usize) -> BTreeSet<Vec<EventId>> {
    let visible: Vec<EventId> = g.alphabet().visible().collect();
    all_words(&visible, max_len).into_iter().filter(|w| accepts(g, w)).collect()
}

pub fn render(alpha: &Alphabet, w: &[EventId]) -> Vec<String> {
    w.iter().map(|&e| alpha.name(e).to_string()).collect()
}

// ------------------------------------------------------------ random inputs

/// Random NFA description: `(states, edges, initial, marked)`.
pub type NfaParts = (usize, Vec<(StateId, u32, StateId)>, Vec<StateId>, Vec<StateId>);

pub fn arb_nfa_parts(max_states: usize, events: u32) -> impl Strategy<Value = NfaParts> {
    (1..=max_states).prop_flat_map(move |n| {
        let s = 0..n as StateId;
        (
            Just(n),
            prop::collection::vec((s.clone(), 0..events, s.clone()), 0..=3 * n),
            prop::collection::vec(s.clone(), 1..=2),
            prop::collection::vec(s, 0..=n),
        )
    })
}

/// Builds an NFA over `names`; with `silent`, event index `names.len()` is ε.
pub fn build_nfa(alpha: &std::sync::Arc<Alphabet>, parts: &NfaParts) -> Nfa {
    let (n, edges, init, marked) = parts;
    let mut g = Nfa::new(alpha.clone(), *n);
    for &(p, e, q) in edges {
        g.add_transition(p, EventId(e), q);
    }
    g.set_initial(init.iter().copied());
    for &q in marked {
        g.set_marked(q, true);
    }
    g
}

pub fn abc(silent: bool) -> std::sync::Arc<Alphabet> {
    let mut a = Alphabet::from_names(["a", "b"]);
    if silent {
        a.push_silent("ε");
    }
    a.into_shared()
}

/// Random system with at most `max_states` states and `max_events` events.
pub fn random_system(seed: u64, max_states: usize, max_events: usize) -> LabeledSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states);
    let m = rng.gen_range(1..=max_events);
    let alpha = Alphabet::from_names((0..m).map(|i| format!("e{i}"))).into_shared();
    let mut g = Nfa::new(alpha, n);
    for q in 0..n as StateId {
        for e in 0..m as u32 {
            for t in 0..n as StateId {
                if rng.gen_bool(0.25) {
                    g.add_transition(q, EventId(e), t);
                }
            }
        }
    }
    let mut init: Vec<StateId> = (0..n as StateId).filter(|_| rng.gen_bool(0.4)).collect();
    if init.is_empty() {
        init.push(rng.gen_range(0..n as StateId));
    }
    g.set_initial(init);
    let secret: Vec<StateId> = (0..n as StateId).filter(|_| rng.gen_bool(0.4)).collect();
    let mut obs: Vec<EventId> = (0..m as u32).filter(|_| rng.gen_bool(0.6)).map(EventId).collect();
    if obs.is_empty() {
        obs.push(EventId(0));
    }
    let mut sys = LabeledSystem::with_secrets(g, &secret, &obs);
    sys.name = format!("rand_{seed}");
    sys
}

/// Random deterministic system meeting the correspondence preconditions:
/// one nonsecret initial state without unobservable outgoing events, and
/// unobservable transitions that keep the label.
pub fn random_deterministic(seed: u64, max_states: usize, max_events: usize) -> LabeledSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states);
    let m = rng.gen_range(2..=max_events);
    let alpha = Alphabet::from_names((0..m).map(|i| format!("e{i}"))).into_shared();
    let mut obs = vec![true; m];
    for o in obs.iter_mut().skip(1) {
        *o = rng.gen_bool(0.6);
    }
    let secret: Vec<bool> = (0..n).map(|x| x != 0 && rng.gen_bool(0.4)).collect();
    let mut g = Nfa::new(alpha, n);
    for q in 0..n as StateId {
        for e in 0..m as u32 {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let observable = obs[e as usize];
            if !observable && q == 0 {
                continue;
            }
            let targets: Vec<StateId> = (0..n as StateId)
                .filter(|&t| observable || secret[t as usize] == secret[q as usize])
                .collect();
            let t = targets[rng.gen_range(0..targets.len())];
            g.add_transition(q, EventId(e), t);
        }
    }
    g.set_initial([0]);
    let secret: Vec<StateId> = (0..n as StateId).filter(|&x| secret[x as usize]).collect();
    let obs: Vec<EventId> = (0..m as u32).filter(|&e| obs[e as usize]).map(EventId).collect();
    let mut sys = LabeledSystem::with_secrets(g, &secret, &obs);
    sys.name = format!("det_{seed}");
    sys
}

// ------------------------------------------------------- opacity oracle (DP)

/// One run summary: initial label, current state, and for each of the last
/// `H` epochs whether it visited a secret and a nonsecret state. The last
/// entry is the current epoch. Missing epochs count as nonsecret.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tail {
    pub init_secret: bool,
    pub x: StateId,
    pub hist: Vec<(bool, bool)>,
}

pub struct ObsOracle<'a> {
    pub sys: &'a LabeledSystem,
    pub depth: usize,
}

impl<'a> ObsOracle<'a> {
    /// Tracks the last `depth` epochs.
    pub fn new(sys: &'a LabeledSystem, depth: usize) -> Self {
        Self { sys, depth }
    }

    fn close(&self, mut set: BTreeSet<Tail>) -> BTreeSet<Tail> {
        let a = &self.sys.automaton;
        let mut stack: Vec<Tail> = set.iter().cloned().collect();
        while let Some(t) = stack.pop() {
            for &(e, y) in a.transitions(t.x) {
                if self.sys.is_observable(e) {
                    continue;
                }
                let mut n = t.clone();
                n.x = y;
                let last = n.hist.last_mut().unwrap();
                if self.sys.is_secret(y) {
                    last.0 = true;
                } else {
                    last.1 = true;
                }
                if set.insert(n.clone()) {
                    stack.push(n);
                }
            }
        }
        set
    }

    fn fresh(&self, x: StateId) -> (bool, bool) {
        let s = self.sys.is_secret(x);
        (s, !s)
    }

    /// Runs observed as `σ_init`.
    pub fn start(&self) -> BTreeSet<Tail> {
        let set = self
            .sys
            .automaton
            .initial()
            .iter()
            .map(|&x| {
                let mut hist = vec![(false, true); self.depth - 1];
                hist.push(self.fresh(x));
                Tail { init_secret: self.sys.is_secret(x), x, hist }
            })
            .collect();
        self.close(set)
    }

    pub fn step(&self, set: &BTreeSet<Tail>, e: EventId) -> BTreeSet<Tail> {
        let mut next = BTreeSet::new();
        for t in set {
            for &(f, y) in self.sys.automaton.transitions(t.x) {
                if f != e {
                    continue;
                }
                let mut hist = t.hist[1..].to_vec();
                hist.push(self.fresh(y));
                next.insert(Tail { init_secret: t.init_secret, x: y, hist });
            }
        }
        self.close(next)
    }

    pub fn run(&self, word: &[EventId]) -> BTreeSet<Tail> {
        let mut cur = self.start();
        for &e in word {
            cur = self.step(&cur, e);
        }
        cur
    }
}

fn epoch_nonsecret(ty: SecretType, (saw_s, saw_ns): (bool, bool)) -> bool {
    match ty {
        SecretType::One => !saw_s,
        SecretType::Two => saw_ns,
    }
}

/// Whether the observation with tail set `tails` (non-empty) is covered by a
/// nonsecret run. For separate notions, returns the first failing delay.
pub fn violation(notion: &OpacityNotion, tails: &BTreeSet<Tail>, sys: &LabeledSystem) -> Option<usize> {
    if tails.is_empty() {
        return None;
    }
    let k = notion.k;
    let h = |t: &Tail, d: usize| t.hist[t.hist.len() - 1 - d];
    let ok = |pred: &dyn Fn(&Tail) -> bool| tails.iter().any(pred);
    match (notion.kind, notion.mode) {
        (NotionKind::Cso, _) => (!ok(&|t| !sys.is_secret(t.x))).then_some(0),
        (NotionKind::Iso, _) => (!ok(&|t| !t.init_secret)).then_some(0),
        (NotionKind::KStep, Mode::Joint) => {
            (!ok(&|t| (0..=k).all(|d| epoch_nonsecret(notion.secret_type, h(t, d))))).then_some(0)
        }
        (NotionKind::KStep, Mode::Separate) => {
            (0..=k).find(|&d| !ok(&|t| epoch_nonsecret(notion.secret_type, h(t, d))))
        }
        _ => panic!("the oracle covers finite notions only"),
    }
}

/// Result of exploring every observation up to a length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub opaque: bool,
    /// Observable events (without σ_init) of a shortest violating observation.
    pub witness: Option<Vec<EventId>>,
    /// Smallest violated delay over all explored observations.
    pub level: Option<usize>,
}

/// Bounded containment oracle over observations `σ_init · w`, `|w| ≤ max_len`.
pub fn oracle_verdict(sys: &LabeledSystem, notion: &OpacityNotion, max_len: usize) -> OracleVerdict {
    let o = ObsOracle::new(sys, notion.k + 1);
    let obs = sys.observable_events();
    let mut witness: Option<Vec<EventId>> = None;
    let mut level: Option<usize> = None;
    let mut layer = vec![(Vec::new(), o.start())];
    for len in 0..=max_len {
        for (w, tails) in &layer {
            if let Some(l) = violation(notion, tails, sys) {
                if witness.is_none() {
                    witness = Some(w.clone());
                }
                level = Some(level.map_or(l, |m: usize| m.min(l)));
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for (w, tails) in &layer {
            for &e in &obs {
                let t = o.step(tails, e);
                if !t.is_empty() {
                    let mut v = w.clone();
                    v.push(e);
                    next.push((v, t));
                }
            }
        }
        layer = next;
    }
    OracleVerdict { opaque: witness.is_none(), witness, level }
}

/// Maps a witness printed in observation symbols back to system events.
pub fn witness_events(sys: &LabeledSystem, witness: &[String]) -> Vec<EventId> {
    assert_eq!(witness.first().map(String::as_str), Some("σ_init"), "witness starts with σ_init: {witness:?}");
    witness[1..]
        .iter()
        .map(|s| sys.alphabet().lookup(s).unwrap_or_else(|| panic!("unknown witness symbol {s}")))
        .collect()
}

/// Whether `witness` is a genuine violation of `notion` according to the oracle.
pub fn witness_violates(sys: &LabeledSystem, notion: &OpacityNotion, witness: &[String]) -> bool {
    let w = witness_events(sys, witness);
    let o = ObsOracle::new(sys, notion.k + 1);
    violation(notion, &o.run(&w), sys).is_some()
}

pub const ALL_KSTEP: [(Mode, SecretType); 4] = [
    (Mode::Joint, SecretType::One),
    (Mode::Joint, SecretType::Two),
    (Mode::Separate, SecretType::One),
    (Mode::Separate, SecretType::Two),
];

/// The corpus used by the oracle, lattice and monotonicity checks.
pub fn corpus() -> Vec<LabeledSystem> {
    (0..200).map(|s| random_system(0x5eed_0000 + s, 5, 3)).collect()
}
