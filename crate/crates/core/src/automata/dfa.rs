use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use hashbrown::HashTable;

use super::alphabet::{Alphabet, EventId};
use super::bitset;
use super::nfa::{Nfa, StateId};
use crate::error::{Error, Result};

/// Marker for an absent transition in a [`Dfa`] table.
pub const NONE: StateId = StateId::MAX;

/// Resource limits for constructions that may blow up.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_states: usize,
    pub deadline: Option<Instant>,
}

impl Limits {
    pub const DEFAULT_MAX_STATES: usize = 5_000_000;

    pub fn unlimited() -> Self {
        Self { max_states: usize::MAX, deadline: None }
    }

    pub fn with_max_states(max_states: usize) -> Self {
        Self { max_states, deadline: None }
    }

    pub(crate) fn check_time(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Self::with_max_states(Self::DEFAULT_MAX_STATES)
    }
}

/// Origin-state sets of a determinized automaton, one bit row per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetLabels {
    words: usize,
    data: Vec<u64>,
}

impl SubsetLabels {
    pub(crate) fn row(&self, q: StateId) -> &[u64] {
        let s = q as usize * self.words;
        &self.data[s..s + self.words]
    }

    /// Sorted origin states of `q`.
    pub fn states(&self, q: StateId) -> Vec<StateId> {
        bitset::ones(self.row(q)).map(|i| i as StateId).collect()
    }

    pub fn contains(&self, q: StateId, origin: StateId) -> bool {
        let row = self.row(q);
        (origin as usize) < row.len() * 64 && bitset::get(row, origin as usize)
    }

    pub fn is_empty_set(&self, q: StateId) -> bool {
        bitset::is_empty(self.row(q))
    }
}

/// A deterministic automaton stored as a dense transition table.
///
/// Columns for the silent symbol (if the alphabet has one) are always
/// [`NONE`]. `dead` names the non-marked sink added by [`determinize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Arc<Alphabet>,
    width: usize,
    table: Vec<StateId>,
    initial: StateId,
    marked: Vec<bool>,
    dead: Option<StateId>,
    labels: Option<SubsetLabels>,
}

impl Dfa {
    /// Checks determinism of `g` and converts it.
    pub fn from_nfa(g: &Nfa) -> Result<Dfa> {
        if g.initial().len() != 1 {
            return Err(Error::NotDeterministic(format!("{} initial states", g.initial().len())));
        }
        if g.has_silent_transitions() {
            return Err(Error::NotDeterministic("silent transitions present".into()));
        }
        let width = g.alphabet().len();
        let mut table = vec![NONE; g.num_states() * width];
        for q in 0..g.num_states() as StateId {
            for &(e, t) in g.transitions(q) {
                let slot = &mut table[q as usize * width + e.index()];
                if *slot != NONE {
                    return Err(Error::NotDeterministic(format!(
                        "state {q} has several `{}` successors",
                        g.alphabet().name(e)
                    )));
                }
                *slot = t;
            }
        }
        Ok(Dfa {
            alphabet: g.alphabet().clone(),
            width,
            table,
            initial: g.initial()[0],
            marked: (0..g.num_states() as StateId).map(|q| g.is_marked(q)).collect(),
            dead: None,
            labels: None,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.marked.len()
    }

    /// States other than the dead sink.
    pub fn live_states(&self) -> usize {
        self.num_states() - usize::from(self.dead.is_some())
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn dead(&self) -> Option<StateId> {
        self.dead
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q as usize]
    }

    pub fn subset_labels(&self) -> Option<&SubsetLabels> {
        self.labels.as_ref()
    }

    #[inline]
    pub fn next(&self, q: StateId, e: EventId) -> Option<StateId> {
        match self.table[q as usize * self.width + e.index()] {
            NONE => None,
            t => Some(t),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.first_missing().is_none()
    }

    fn first_missing(&self) -> Option<(StateId, EventId)> {
        for q in 0..self.num_states() as StateId {
            for e in self.alphabet.visible() {
                if self.next(q, e).is_none() {
                    return Some((q, e));
                }
            }
        }
        None
    }

    pub fn accepts(&self, word: &[EventId]) -> bool {
        let mut q = self.initial;
        for &e in word {
            match self.next(q, e) {
                Some(t) => q = t,
                None => return false,
            }
        }
        self.is_marked(q)
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut g = Nfa::new(self.alphabet.clone(), self.num_states());
        for q in 0..self.num_states() as StateId {
            for e in self.alphabet.visible() {
                if let Some(t) = self.next(q, e) {
                    g.add_transition(q, e, t);
                }
            }
            g.set_marked(q, self.is_marked(q));
        }
        g.add_initial(self.initial);
        g
    }

    /// Breadth-first search for a state satisfying `pred`; returns a
    /// shortest word reaching one.
    pub fn shortest_word_to(&self, mut pred: impl FnMut(StateId) -> bool) -> Option<Vec<EventId>> {
        let n = self.num_states();
        let mut parent: Vec<(StateId, EventId)> = vec![(NONE, EventId(0)); n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial as usize] = true;
        while let Some(q) = queue.pop_front() {
            if pred(q) {
                let mut word = Vec::new();
                let mut cur = q;
                while parent[cur as usize].0 != NONE {
                    let (p, e) = parent[cur as usize];
                    word.push(e);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for e in self.alphabet.visible() {
                if let Some(t) = self.next(q, e) {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        parent[t as usize] = (q, e);
                        queue.push_back(t);
                    }
                }
            }
        }
        None
    }
}

/// Power-set construction with ε-closure and no state limit.
pub fn determinize(g: &Nfa) -> Dfa {
    determinize_with(g, &Limits::unlimited()).expect("unlimited determinization cannot fail")
}

/// Power-set construction, breadth-first from the ε-closed initial set.
///
/// The result is complete over the visible symbols and always contains
/// exactly one non-marked dead sink (the empty subset).
pub fn determinize_with(g: &Nfa, limits: &Limits) -> Result<Dfa> {
    let n = g.num_states();
    let words = bitset::words_for(n);
    let alphabet = g.alphabet().clone();
    let width = alphabet.len();
    let visible: Vec<EventId> = alphabet.visible().collect();

    let closures: Option<Vec<u64>> = g.has_silent_transitions().then(|| {
        let mut rows = Vec::with_capacity(n * words);
        for q in 0..n as StateId {
            rows.extend(g.closure_row([q]));
        }
        rows
    });
    let marked_row = bitset::from_indices(n, g.marked_states().map(|q| q as usize));

    let mut arena: Vec<u64> = Vec::new();
    let mut index: HashTable<StateId> = HashTable::new();
    let mut table: Vec<StateId> = Vec::new();
    let mut count: usize = 0;

    let intern = |row: &[u64],
                  arena: &mut Vec<u64>,
                  index: &mut HashTable<StateId>,
                  count: &mut usize|
     -> Result<StateId> {
        let h = bitset::hash_words(row);
        let found = index.find(h, |&id| {
            let s = id as usize * words;
            arena[s..s + words] == *row
        });
        if let Some(&id) = found {
            return Ok(id);
        }
        if *count >= limits.max_states {
            return Err(Error::budget(limits.max_states));
        }
        let id = *count as StateId;
        arena.extend_from_slice(row);
        index.insert_unique(h, id, |&other| {
            let s = other as usize * words;
            bitset::hash_words(&arena[s..s + words])
        });
        *count += 1;
        Ok(id)
    };

    let init = g.closure_row(g.initial().iter().copied());
    intern(&init, &mut arena, &mut index, &mut count)?;

    let mut scratch = vec![0u64; words];
    let mut current = vec![0u64; words];
    let mut q = 0usize;
    while q < count {
        if q.is_multiple_of(1024) {
            limits.check_time()?;
        }
        current.copy_from_slice(&arena[q * words..(q + 1) * words]);
        let base = table.len();
        table.resize(base + width, NONE);
        for &e in &visible {
            scratch.iter_mut().for_each(|w| *w = 0);
            for s in bitset::ones(&current) {
                for t in g.post(s as StateId, e) {
                    let t = t as usize;
                    if bitset::get(&scratch, t) {
                        continue;
                    }
                    match &closures {
                        Some(rows) => bitset::or_into(&mut scratch, &rows[t * words..(t + 1) * words]),
                        None => bitset::set(&mut scratch, t),
                    }
                }
            }
            let id = intern(&scratch, &mut arena, &mut index, &mut count)?;
            table[base + e.index()] = id;
        }
        q += 1;
    }

    let empty = vec![0u64; words];
    let dead = match index.find(bitset::hash_words(&empty), |&id| {
        let s = id as usize * words;
        arena[s..s + words] == *empty
    }) {
        Some(&id) => id,
        None => {
            let id = count as StateId;
            arena.extend_from_slice(&empty);
            count += 1;
            let base = table.len();
            table.resize(base + width, NONE);
            for &e in &visible {
                table[base + e.index()] = id;
            }
            id
        }
    };

    let marked = (0..count)
        .map(|i| bitset::intersects(&arena[i * words..(i + 1) * words], &marked_row))
        .collect();
    Ok(Dfa {
        alphabet,
        width,
        table,
        initial: 0,
        marked,
        dead: Some(dead),
        labels: Some(SubsetLabels { words, data: arena }),
    })
}

/// Flips the marked set of a complete DFA.
pub fn complement(d: &Dfa) -> Result<Dfa> {
    if let Some((q, e)) = d.first_missing() {
        return Err(Error::NotComplete { state: q, event: d.alphabet.name(e).to_string() });
    }
    let mut c = d.clone();
    c.marked.iter_mut().for_each(|m| *m = !*m);
    Ok(c)
}
