use std::sync::Arc;

use super::alphabet::{Alphabet, EventId};
use super::bitset;

pub type StateId = u32;

/// A nondeterministic finite automaton with optional silent transitions.
///
/// States are `0..num_states()`. Outgoing transitions of each state are kept
/// sorted by `(event, target)` without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Arc<Alphabet>,
    trans: Vec<Vec<(EventId, StateId)>>,
    initial: Vec<StateId>,
    marked: Vec<bool>,
    names: Option<Vec<String>>,
}

impl Nfa {
    pub fn new(alphabet: Arc<Alphabet>, num_states: usize) -> Self {
        Self {
            alphabet,
            trans: vec![Vec::new(); num_states],
            initial: Vec::new(),
            marked: vec![false; num_states],
            names: None,
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn add_state(&mut self) -> StateId {
        self.trans.push(Vec::new());
        self.marked.push(false);
        if let Some(n) = &mut self.names {
            n.push((self.trans.len() - 1).to_string());
        }
        (self.trans.len() - 1) as StateId
    }

    pub fn add_transition(&mut self, from: StateId, event: EventId, to: StateId) {
        assert!((to as usize) < self.num_states(), "target {to} out of range");
        assert!(event.index() < self.alphabet.len(), "event out of range");
        let row = &mut self.trans[from as usize];
        if let Err(pos) = row.binary_search(&(event, to)) {
            row.insert(pos, (event, to));
        }
    }

    pub fn add_initial(&mut self, q: StateId) {
        assert!((q as usize) < self.num_states());
        if let Err(pos) = self.initial.binary_search(&q) {
            self.initial.insert(pos, q);
        }
    }

    pub fn set_initial(&mut self, qs: impl IntoIterator<Item = StateId>) {
        self.initial.clear();
        for q in qs {
            self.add_initial(q);
        }
    }

    pub fn set_marked(&mut self, q: StateId, marked: bool) {
        self.marked[q as usize] = marked;
    }

    pub fn mark_all(&mut self) {
        self.marked.iter_mut().for_each(|m| *m = true);
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_initial(&self, q: StateId) -> bool {
        self.initial.binary_search(&q).is_ok()
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q as usize]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.marked.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i as StateId)
    }

    pub fn transitions(&self, q: StateId) -> &[(EventId, StateId)] {
        &self.trans[q as usize]
    }

    /// Successors of `q` on `event`.
    pub fn post(&self, q: StateId, event: EventId) -> impl Iterator<Item = StateId> + '_ {
        let row = &self.trans[q as usize];
        let start = row.partition_point(|&(e, _)| e < event);
        row[start..].iter().take_while(move |&&(e, _)| e == event).map(|&(_, t)| t)
    }

    pub fn has_silent_transitions(&self) -> bool {
        match self.alphabet.silent() {
            None => false,
            Some(s) => self.trans.iter().flatten().any(|&(e, _)| e == s),
        }
    }

    pub fn state_name(&self, q: StateId) -> String {
        match &self.names {
            Some(n) => n[q as usize].clone(),
            None => q.to_string(),
        }
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn set_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.num_states());
        self.names = Some(names);
    }

    pub fn set_state_name(&mut self, q: StateId, name: impl Into<String>) {
        let n = self.num_states();
        let names = self.names.get_or_insert_with(|| (0..n).map(|i| i.to_string()).collect());
        names[q as usize] = name.into();
    }

    /// Replaces the alphabet by an equal-content one (e.g. to share an `Arc`).
    pub fn with_alphabet(mut self, alphabet: Arc<Alphabet>) -> Self {
        assert!(*alphabet == *self.alphabet, "alphabet content differs");
        self.alphabet = alphabet;
        self
    }

    /// ε-closure of a set of states, as a bit row.
    pub(crate) fn closure_row(&self, seeds: impl IntoIterator<Item = StateId>) -> Vec<u64> {
        let mut row = vec![0; bitset::words_for(self.num_states())];
        let mut stack: Vec<StateId> = Vec::new();
        for q in seeds {
            if !bitset::get(&row, q as usize) {
                bitset::set(&mut row, q as usize);
                stack.push(q);
            }
        }
        if let Some(s) = self.alphabet.silent() {
            while let Some(q) = stack.pop() {
                for t in self.post(q, s) {
                    if !bitset::get(&row, t as usize) {
                        bitset::set(&mut row, t as usize);
                        stack.push(t);
                    }
                }
            }
        }
        row
    }

    /// Whether some string of visible symbols drives the automaton to a
    /// marked state. Used by tests and small checks.
    pub fn accepts(&self, word: &[EventId]) -> bool {
        let mut cur = self.closure_row(self.initial.iter().copied());
        for &e in word {
            let mut next = Vec::new();
            for q in bitset::ones(&cur) {
                next.extend(self.post(q as StateId, e));
            }
            cur = self.closure_row(next);
        }
        let hit = bitset::ones(&cur).any(|q| self.marked[q]);
        hit
    }
}
