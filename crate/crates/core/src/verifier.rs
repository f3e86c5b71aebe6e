//! Opacity verification by language containment `Θ(L_m(G)) ⊆ Θ(L_m(G × H_NS))`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::automata::{
    bitset, determinize_with, product_with, reverse, Alphabet, Dfa, EventId, Limits, Nfa, StateId,
};
use crate::error::{Error, Result};
use crate::moore::{apply_mask, induced_mask, label_transform, LabeledSystem, ObservationMask};
use crate::specs::{build_kstep_spec, build_spec, Mode, NotionKind, OpacityNotion, SecretType, SpecAutomaton};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Forward,
    Reverse,
    SecretObserver,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Forward => "forward",
            Method::Reverse => "reverse",
            Method::SecretObserver => "so",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Method::Forward),
            "reverse" => Ok(Method::Reverse),
            "so" => Ok(Method::SecretObserver),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

/// Limits applied to one verification call.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub max_states: usize,
    pub timeout: Option<Duration>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_states: Limits::DEFAULT_MAX_STATES, timeout: None }
    }
}

impl VerifyOptions {
    pub fn limits(&self) -> Limits {
        Limits { max_states: self.max_states, deadline: self.timeout.map(|t| Instant::now() + t) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stats {
    /// Non-empty states of the determinized automaton: `G_SO` for the
    /// forward and secret-observer methods, `det(Θ(G × H_NS)^R)` for reverse.
    pub verifier_states: usize,
    /// Explored states of the comparison product (`G_FC` or `G_RC`); equal
    /// to `verifier_states` for the secret observer.
    pub product_states: usize,
    pub method: Method,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub opaque: bool,
    /// A shortest observation (names of the observation alphabet) that
    /// proves non-opacity.
    pub witness: Option<Vec<String>>,
    /// Smallest violated delay for separate K-step notions.
    pub violated_level: Option<usize>,
    /// Set when the system was made observation extendable before checking.
    pub extended: bool,
    pub stats: Stats,
}

/// The determinized masked product `det(Θ(G × H))` with origin pairs.
#[derive(Clone, Debug)]
pub struct SecretObserver {
    pub dfa: Dfa,
    /// `(g state, h state)` for every state of `G × H`.
    pub pairs: Vec<(StateId, StateId)>,
    g_marked: Vec<bool>,
}

impl SecretObserver {
    pub fn build(g: &Nfa, h: &Nfa, mask: &ObservationMask, limits: &Limits) -> Result<Self> {
        let p = product_with(g, h, limits)?;
        let theta = apply_mask(&p.nfa, mask)?;
        let dfa = determinize_with(&theta, limits)?;
        let g_marked = (0..g.num_states() as StateId).map(|q| g.is_marked(q)).collect();
        Ok(Self { dfa, pairs: p.pairs, g_marked })
    }

    /// Product states of an observer state as `(g, h)` pairs.
    pub fn pairs_of(&self, q: StateId) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        let labels = self.dfa.subset_labels().expect("observers keep subset labels");
        bitset::ones(labels.row(q)).map(move |i| self.pairs[i])
    }

    /// Whether `q` violates the acceptance condition for the given marked
    /// spec states: it holds a pair with a marked system state but none
    /// whose spec state is in `marks`.
    pub fn violates(&self, q: StateId, marks: &[bool]) -> bool {
        let mut relevant = false;
        for (x, h) in self.pairs_of(q) {
            if self.g_marked[x as usize] {
                if marks[h as usize] {
                    return false;
                }
                relevant = true;
            }
        }
        relevant
    }
}

fn mark_vector(n: usize, states: impl IntoIterator<Item = StateId>) -> Vec<bool> {
    let mut v = vec![false; n];
    for q in states {
        v[q as usize] = true;
    }
    v
}

fn render(alpha: &Alphabet, word: &[EventId]) -> Vec<String> {
    word.iter().map(|&e| alpha.name(e).to_string()).collect()
}

/// Searches `side × d` for a state that is marked in `side` and unmarked in
/// `d` (i.e. marked in the complement). Silent moves of `side` are free, so
/// the returned word is shortest in visible symbols.
fn compare_with_complement(side: &Nfa, d: &Dfa, limits: &Limits) -> Result<(Option<Vec<EventId>>, usize)> {
    let silent = side.alphabet().silent();
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    let mut nodes: Vec<(StateId, StateId)> = Vec::new();
    let mut dist: Vec<usize> = Vec::new();
    let mut parent: Vec<Option<(usize, EventId)>> = Vec::new();
    let mut done: Vec<bool> = Vec::new();
    let mut deque = VecDeque::new();

    let mut visit = |node: (StateId, StateId),
                     d_new: usize,
                     from: Option<(usize, EventId)>,
                     nodes: &mut Vec<(StateId, StateId)>,
                     dist: &mut Vec<usize>,
                     parent: &mut Vec<Option<(usize, EventId)>>,
                     done: &mut Vec<bool>|
     -> Result<Option<usize>> {
        match index.get(&node) {
            Some(&i) if dist[i] <= d_new => Ok(None),
            Some(&i) => {
                dist[i] = d_new;
                parent[i] = from;
                Ok(Some(i))
            }
            None => {
                if nodes.len() >= limits.max_states {
                    return Err(Error::budget(limits.max_states));
                }
                let i = nodes.len();
                index.insert(node, i);
                nodes.push(node);
                dist.push(d_new);
                parent.push(from);
                done.push(false);
                Ok(Some(i))
            }
        }
    };

    for &q in side.initial() {
        if let Some(i) = visit((q, d.initial()), 0, None, &mut nodes, &mut dist, &mut parent, &mut done)? {
            deque.push_back(i);
        }
    }
    let mut processed = 0usize;
    while let Some(i) = deque.pop_front() {
        if done[i] {
            continue;
        }
        done[i] = true;
        processed += 1;
        if processed.is_multiple_of(4096) {
            limits.check_time()?;
        }
        let (q, s) = nodes[i];
        if side.is_marked(q) && !d.is_marked(s) {
            let mut word = Vec::new();
            let mut cur = i;
            while let Some((p, e)) = parent[cur] {
                if Some(e) != silent {
                    word.push(e);
                }
                cur = p;
            }
            word.reverse();
            return Ok((Some(word), nodes.len()));
        }
        for &(e, t) in side.transitions(q) {
            let (next, w) = if Some(e) == silent {
                ((t, s), 0)
            } else {
                match d.next(s, e) {
                    Some(ds) => ((t, ds), 1),
                    None => continue,
                }
            };
            if let Some(j) = visit(next, dist[i] + w, Some((i, e)), &mut nodes, &mut dist, &mut parent, &mut done)? {
                if w == 0 {
                    deque.push_front(j);
                } else {
                    deque.push_back(j);
                }
            }
        }
    }
    Ok((None, nodes.len()))
}

/// Checks `Θ(L_m(g)) ⊆ Θ(L_m(g × spec))` with the chosen method.
pub fn verify_containment(
    g: &Nfa,
    spec: &SpecAutomaton,
    mask: &ObservationMask,
    method: Method,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let start = Instant::now();
    let limits = opts.limits();
    let out = mask.output().clone();
    let finish = |opaque: bool, witness: Option<Vec<EventId>>, verifier: usize, product: usize| Verdict {
        opaque,
        witness: witness.map(|w| render(&out, &w)),
        violated_level: None,
        extended: false,
        stats: Stats { verifier_states: verifier, product_states: product, method, elapsed: start.elapsed() },
    };
    match method {
        Method::SecretObserver => {
            if !spec.universal {
                return Err(Error::MethodInapplicable(
                    "the secret observer needs a specification generating every string".into(),
                ));
            }
            let so = SecretObserver::build(g, &spec.nfa, mask, &limits)?;
            let marks = mark_vector(spec.nfa.num_states(), spec.nfa.marked_states());
            let witness = so.dfa.shortest_word_to(|q| so.violates(q, &marks));
            let n = so.dfa.live_states();
            Ok(finish(witness.is_none(), witness, n, n))
        }
        Method::Forward => {
            let p = product_with(g, &spec.nfa, &limits)?;
            let d = determinize_with(&apply_mask(&p.nfa, mask)?, &limits)?;
            let side = apply_mask(g, mask)?;
            let (w, explored) = compare_with_complement(&side, &d, &limits)?;
            Ok(finish(w.is_none(), w, d.live_states(), explored))
        }
        Method::Reverse => {
            let p = product_with(g, &spec.nfa, &limits)?;
            let d = determinize_with(&reverse(&apply_mask(&p.nfa, mask)?), &limits)?;
            let side = reverse(&apply_mask(g, mask)?);
            let (w, explored) = compare_with_complement(&side, &d, &limits)?;
            let w = w.map(|mut w| {
                w.reverse();
                w
            });
            Ok(finish(w.is_none(), w, d.live_states(), explored))
        }
    }
}

/// Secret observer when the spec generates every string, forward otherwise.
pub fn default_method(spec: &SpecAutomaton) -> Method {
    if spec.universal {
        Method::SecretObserver
    } else {
        Method::Forward
    }
}

/// Verifies a state-based notion; `method = None` picks the default.
///
/// Separate K-step notions go to [`verify_separate_kstep_so`] (secret
/// observer) or [`verify_separate_kstep_ext`] (forward/reverse, after making
/// the system observation extendable if needed). Separate infinite-step goes
/// to [`verify_infinite_separate`].
pub fn verify_state_based(
    sys: &LabeledSystem,
    notion: &OpacityNotion,
    method: Option<Method>,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    sys.validate()?;
    match (notion.kind, notion.mode) {
        (NotionKind::KStep, Mode::Separate) => match method {
            None | Some(Method::SecretObserver) => {
                verify_separate_kstep_so(sys, notion.k, notion.secret_type, opts)
            }
            Some(m) => verify_separate_kstep_auto_ext(sys, notion.k, notion.secret_type, m, opts),
        },
        (NotionKind::InfiniteStep, Mode::Separate) => {
            verify_infinite_separate(sys, notion.secret_type, method, opts)
        }
        _ => {
            let t = label_transform(sys);
            let mask = induced_mask(&t.io);
            let spec = build_spec(&t.io, notion);
            let m = method.unwrap_or_else(|| default_method(&spec));
            verify_containment(&t.nfa, &spec, &mask, m, opts)
        }
    }
}

fn verify_separate_kstep_auto_ext(
    sys: &LabeledSystem,
    k: usize,
    ty: SecretType,
    method: Method,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    if check_observation_extendable(sys) {
        verify_separate_kstep_ext(sys, k, ty, method, opts)
    } else {
        let mut v = verify_separate_kstep_ext(&make_observation_extendable(sys), k, ty, method, opts)?;
        v.extended = true;
        Ok(v)
    }
}

/// Separate K-step opacity from one secret observer and `K + 1` marking
/// passes. Reports the smallest violated delay.
pub fn verify_separate_kstep_so(sys: &LabeledSystem, k: usize, ty: SecretType, opts: &VerifyOptions) -> Result<Verdict> {
    let start = Instant::now();
    let limits = opts.limits();
    let t = label_transform(sys);
    let mask = induced_mask(&t.io);
    let spec = build_kstep_spec(&t.io, k, Mode::Separate, ty);
    let so = SecretObserver::build(&t.nfa, &spec.nfa, &mask, &limits)?;
    let levels = spec.level_marks.as_ref().expect("separate specs carry level marks");
    let n = so.dfa.num_states() as StateId;
    let mut result = None;
    for (level, marked) in levels.iter().enumerate() {
        limits.check_time()?;
        let marks = mark_vector(spec.nfa.num_states(), marked.iter().copied());
        if (0..n).any(|q| so.violates(q, &marks)) {
            let w = so.dfa.shortest_word_to(|q| so.violates(q, &marks)).expect("violating state is reachable");
            result = Some((level, w));
            break;
        }
    }
    let live = so.dfa.live_states();
    Ok(Verdict {
        opaque: result.is_none(),
        witness: result.as_ref().map(|(_, w)| render(mask.output(), w)),
        violated_level: result.map(|(l, _)| l),
        extended: false,
        stats: Stats {
            verifier_states: live,
            product_states: live,
            method: Method::SecretObserver,
            elapsed: start.elapsed(),
        },
    })
}

/// Separate K-step opacity of an observation-extendable system as a single
/// containment at delay `K`.
pub fn verify_separate_kstep_ext(
    sys: &LabeledSystem,
    k: usize,
    ty: SecretType,
    method: Method,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    if !check_observation_extendable(sys) {
        return Err(Error::NotExtendable);
    }
    let t = label_transform(sys);
    let mask = induced_mask(&t.io);
    let spec = build_kstep_spec(&t.io, k, Mode::Separate, ty);
    verify_containment(&t.nfa, &spec, &mask, method, opts)
}

/// Name of the event added by [`make_observation_extendable`].
pub const EXT_EVENT: &str = "σ_ext";

/// Adds an observable self-loop event at every state.
pub fn make_observation_extendable(sys: &LabeledSystem) -> LabeledSystem {
    let old = sys.alphabet();
    let mut alpha = (**old).clone();
    let mut name = EXT_EVENT.to_string();
    while alpha.lookup(&name).is_some() {
        name.push('\'');
    }
    let ext = alpha.push(name);
    let alpha = alpha.into_shared();
    let a = &sys.automaton;
    let mut g = Nfa::new(alpha, a.num_states());
    for x in 0..a.num_states() as StateId {
        for &(e, t) in a.transitions(x) {
            g.add_transition(x, e, t);
        }
        g.add_transition(x, ext, x);
        g.set_marked(x, a.is_marked(x));
    }
    g.set_initial(a.initial().iter().copied());
    if let Some(n) = a.names() {
        g.set_names(n.to_vec());
    }
    let mut observable = sys.observable.clone();
    observable.push(true);
    LabeledSystem { automaton: g, observable, ..sys.clone() }
}

/// Whether from every reachable state some state with an observable
/// outgoing transition is reachable through unobservable transitions.
pub fn check_observation_extendable(sys: &LabeledSystem) -> bool {
    let a = &sys.automaton;
    let n = a.num_states();
    let mut reach = vec![false; n];
    let mut stack: Vec<StateId> = a.initial().to_vec();
    for &q in &stack {
        reach[q as usize] = true;
    }
    while let Some(q) = stack.pop() {
        for &(_, t) in a.transitions(q) {
            if !reach[t as usize] {
                reach[t as usize] = true;
                stack.push(t);
            }
        }
    }
    // Backward closure over unobservable edges from states with an
    // observable outgoing transition.
    let mut good: Vec<bool> = (0..n as StateId)
        .map(|q| a.transitions(q).iter().any(|&(e, _)| sys.is_observable(e)))
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n as StateId {
            if !good[q as usize]
                && a.transitions(q).iter().any(|&(e, t)| !sys.is_observable(e) && good[t as usize])
            {
                good[q as usize] = true;
                changed = true;
            }
        }
    }
    (0..n).all(|q| !reach[q] || good[q])
}

/// Largest state count for which the `K = 2^n` reduction is attempted.
pub const MAX_INFINITE_STATES: usize = 20;

/// Separate infinite-step opacity through separate K-step opacity with
/// `K = 2^n`, `n = |X|`.
pub fn verify_infinite_separate(
    sys: &LabeledSystem,
    ty: SecretType,
    method: Option<Method>,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let n = sys.num_states();
    let too_big = |k: String| Error::BudgetExceeded {
        limit: opts.max_states,
        detail: Some(format!("separate infinite-step needs K = 2^{n} = {k}")),
    };
    if n > MAX_INFINITE_STATES {
        return Err(too_big(format!("2^{n}")));
    }
    let k = 1usize << n;
    // The spec alone has K + 3 states and the product at least as many.
    if k + 3 > opts.max_states {
        return Err(too_big(k.to_string()));
    }
    let notion = OpacityNotion::kstep(k, Mode::Separate, ty);
    verify_state_based(sys, &notion, method, opts)
}
