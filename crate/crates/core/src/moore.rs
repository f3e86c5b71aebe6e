//! State-labeled systems, the input-output label transform, and static
//! observation masks.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::automata::{same_alphabet, Alphabet, EventId, Nfa, StateId};
use crate::error::{Error, Result};

pub type LabelId = u32;

/// Label index of nonsecret states in systems built by [`LabeledSystem::with_secrets`].
pub const NS: LabelId = 0;
/// Label index of secret states in systems built by [`LabeledSystem::with_secrets`].
pub const S: LabelId = 1;

/// Name of the artificial turn-on event.
pub const INIT_EVENT: &str = "σ_init";
/// Name of the silent observation symbol.
pub const SILENT_SYMBOL: &str = "ε";

/// A system `A = (X, Σ, δ, X_0)` with a state labeling and observable events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSystem {
    pub name: String,
    pub automaton: Nfa,
    pub labels: Vec<LabelId>,
    pub label_names: Vec<String>,
    /// Indexed by event id of `automaton.alphabet()`.
    pub observable: Vec<bool>,
    /// Label that marks secret states, if any.
    pub secret_label: Option<LabelId>,
}

impl LabeledSystem {
    /// A system over the labels `{NS, S}`.
    pub fn with_secrets(automaton: Nfa, secret: &[StateId], observable: &[EventId]) -> Self {
        let mut labels = vec![NS; automaton.num_states()];
        for &x in secret {
            labels[x as usize] = S;
        }
        let mut obs = vec![false; automaton.alphabet().len()];
        for &e in observable {
            obs[e.index()] = true;
        }
        Self {
            name: String::from("system"),
            automaton,
            labels,
            label_names: vec!["NS".into(), "S".into()],
            observable: obs,
            secret_label: Some(S),
        }
    }

    pub fn num_states(&self) -> usize {
        self.automaton.num_states()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.automaton.alphabet()
    }

    pub fn is_secret(&self, x: StateId) -> bool {
        self.secret_label == Some(self.labels[x as usize])
    }

    pub fn is_observable(&self, e: EventId) -> bool {
        self.observable[e.index()]
    }

    pub fn secret_states(&self) -> Vec<StateId> {
        (0..self.num_states() as StateId).filter(|&x| self.is_secret(x)).collect()
    }

    pub fn observable_events(&self) -> Vec<EventId> {
        self.alphabet().ids().filter(|&e| self.is_observable(e)).collect()
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::PreconditionViolated(m.to_string()));
        if self.labels.len() != self.num_states() {
            return bad("every state needs a label");
        }
        if self.labels.iter().any(|&l| l as usize >= self.label_names.len()) {
            return bad("label out of range");
        }
        if self.observable.len() != self.alphabet().len() {
            return bad("observability table does not match the alphabet");
        }
        if self.alphabet().silent().is_some() {
            return bad("system alphabets have no silent symbol");
        }
        Ok(())
    }
}

/// Input component of an IO pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Input {
    Init,
    Event(EventId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IoPair {
    pub input: Input,
    pub label: LabelId,
    pub secret: bool,
    pub observable: bool,
}

/// The event set `E ⊆ (Σ ∪ {σ_init}) × A` of a transformed system.
#[derive(Clone, Debug)]
pub struct IoAlphabet {
    alphabet: Arc<Alphabet>,
    system_alphabet: Arc<Alphabet>,
    pairs: Vec<IoPair>,
    index: HashMap<(Input, LabelId), EventId>,
}

impl IoAlphabet {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn system_alphabet(&self) -> &Arc<Alphabet> {
        &self.system_alphabet
    }

    pub fn pair(&self, e: EventId) -> &IoPair {
        &self.pairs[e.index()]
    }

    pub fn lookup(&self, input: Input, label: LabelId) -> Option<EventId> {
        self.index.get(&(input, label)).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Events whose pair satisfies `pred`.
    pub fn select(&self, pred: impl Fn(&IoPair) -> bool) -> Vec<EventId> {
        (0..self.pairs.len() as u32).map(EventId).filter(|&e| pred(self.pair(e))).collect()
    }
}

/// Output of [`label_transform`].
#[derive(Clone, Debug)]
pub struct IoSystem {
    pub nfa: Nfa,
    pub io: IoAlphabet,
}

impl IoSystem {
    /// Index of the added initial state `x_init`.
    pub fn init_state(&self) -> StateId {
        (self.nfa.num_states() - 1) as StateId
    }
}

/// The label transform `T^IO(A, ℓ)`.
///
/// State `x` of `A` keeps index `x`; `x_init` is appended. Every transition
/// is relabeled with its destination's label and every state of `A` is
/// marked. Only realized IO pairs enter the alphabet.
pub fn label_transform(sys: &LabeledSystem) -> IoSystem {
    let a = &sys.automaton;
    let n = a.num_states();
    let mut realized: BTreeSet<(Input, LabelId)> = BTreeSet::new();
    for &x0 in a.initial() {
        realized.insert((Input::Init, sys.labels[x0 as usize]));
    }
    for x in 0..n as StateId {
        for &(e, t) in a.transitions(x) {
            realized.insert((Input::Event(e), sys.labels[t as usize]));
        }
    }

    let sigma = sys.alphabet();
    let mut alphabet = Alphabet::new();
    let mut pairs = Vec::with_capacity(realized.len());
    let mut index = HashMap::new();
    for &(input, label) in &realized {
        let ename = match input {
            Input::Init => INIT_EVENT,
            Input::Event(e) => sigma.name(e),
        };
        let id = alphabet.push(format!("({},{})", ename, sys.label_names[label as usize]));
        index.insert((input, label), id);
        pairs.push(IoPair {
            input,
            label,
            secret: sys.secret_label == Some(label),
            observable: match input {
                Input::Init => true,
                Input::Event(e) => sys.is_observable(e),
            },
        });
    }
    let alphabet = alphabet.into_shared();

    let mut g = Nfa::new(alphabet.clone(), n + 1);
    let init = n as StateId;
    for &x0 in a.initial() {
        g.add_transition(init, index[&(Input::Init, sys.labels[x0 as usize])], x0);
    }
    for x in 0..n as StateId {
        for &(e, t) in a.transitions(x) {
            g.add_transition(x, index[&(Input::Event(e), sys.labels[t as usize])], t);
        }
        g.set_marked(x, true);
    }
    g.add_initial(init);
    let mut names: Vec<String> = (0..n as StateId).map(|x| a.state_name(x)).collect();
    names.push("x_init".into());
    g.set_names(names);

    IoSystem {
        nfa: g,
        io: IoAlphabet { alphabet, system_alphabet: sigma.clone(), pairs, index },
    }
}

/// Componentwise projections `(P^I(r), P^O(r))`.
pub fn io_projections(r: &[EventId], io: &IoAlphabet) -> (Vec<Input>, Vec<LabelId>) {
    r.iter().map(|&e| (io.pair(e).input, io.pair(e).label)).unzip()
}

/// A static mask: every symbol maps to an output symbol or to silence.
#[derive(Clone, Debug)]
pub struct ObservationMask {
    domain: Arc<Alphabet>,
    output: Arc<Alphabet>,
    table: Vec<Option<EventId>>,
}

impl ObservationMask {
    /// Builds a mask from an explicit table. The output alphabet must contain
    /// a silent symbol; the domain's silent symbol must map to silence.
    pub fn new(domain: Arc<Alphabet>, output: Arc<Alphabet>, table: Vec<Option<EventId>>) -> Result<Self> {
        if table.len() != domain.len() || output.silent().is_none() {
            return Err(Error::MaskDomainMismatch);
        }
        if let Some(s) = domain.silent() {
            if table[s.index()].is_some() {
                return Err(Error::MaskDomainMismatch);
            }
        }
        if table.iter().flatten().any(|o| output.is_silent(*o) || o.index() >= output.len()) {
            return Err(Error::MaskDomainMismatch);
        }
        Ok(Self { domain, output, table })
    }

    pub fn domain(&self) -> &Arc<Alphabet> {
        &self.domain
    }

    pub fn output(&self) -> &Arc<Alphabet> {
        &self.output
    }

    pub fn image(&self, e: EventId) -> Option<EventId> {
        self.table[e.index()]
    }

    pub fn apply_word(&self, word: &[EventId]) -> Vec<EventId> {
        word.iter().filter_map(|&e| self.image(e)).collect()
    }

    /// `next ∘ self`: apply `self`, then `next`.
    pub fn then(&self, next: &ObservationMask) -> Result<ObservationMask> {
        if !same_alphabet(&self.output, &next.domain) {
            return Err(Error::MaskDomainMismatch);
        }
        let table = self.table.iter().map(|o| o.and_then(|m| next.image(m))).collect();
        ObservationMask::new(self.domain.clone(), next.output.clone(), table)
    }
}

/// The mask `Θ((e, a)) = e` for observable `e` (and σ_init), silent otherwise.
/// The output alphabet is `{σ_init} ∪ Σ_o` plus a silent symbol.
pub fn induced_mask(io: &IoAlphabet) -> ObservationMask {
    let sigma = io.system_alphabet();
    let mut out = Alphabet::new();
    let init = out.push(INIT_EVENT);
    let mut obs_of: HashMap<EventId, EventId> = HashMap::new();
    // Observable events that occur in some pair, in Σ order.
    let observed: BTreeSet<EventId> = io
        .pairs
        .iter()
        .filter(|p| p.observable)
        .filter_map(|p| match p.input {
            Input::Event(e) => Some(e),
            Input::Init => None,
        })
        .collect();
    for e in observed {
        obs_of.insert(e, out.push(sigma.name(e)));
    }
    out.push_silent(SILENT_SYMBOL);
    let table = io
        .pairs
        .iter()
        .map(|p| match (p.input, p.observable) {
            (Input::Init, _) => Some(init),
            (Input::Event(e), true) => Some(obs_of[&e]),
            (Input::Event(_), false) => None,
        })
        .collect();
    ObservationMask { domain: io.alphabet.clone(), output: out.into_shared(), table }
}

/// The masked automaton `Θ(G)` on the same states.
pub fn apply_mask(g: &Nfa, m: &ObservationMask) -> Result<Nfa> {
    if !same_alphabet(g.alphabet(), &m.domain) {
        return Err(Error::MaskDomainMismatch);
    }
    let silent = m.output.silent().expect("mask outputs carry a silent symbol");
    let mut r = Nfa::new(m.output.clone(), g.num_states());
    for q in 0..g.num_states() as StateId {
        for &(e, t) in g.transitions(q) {
            r.add_transition(q, m.image(e).unwrap_or(silent), t);
        }
        r.set_marked(q, g.is_marked(q));
    }
    r.set_initial(g.initial().iter().copied());
    if let Some(n) = g.names() {
        r.set_names(n.to_vec());
    }
    Ok(r)
}
