use std::collections::{BTreeSet, HashMap, VecDeque};

use super::alphabet::{same_alphabet, EventId};
use super::bitset;
use super::dfa::Limits;
use super::nfa::{Nfa, StateId};
use crate::error::{Error, Result};

/// Reachable synchronous product together with the origin pair of every state.
#[derive(Clone, Debug)]
pub struct Product {
    pub nfa: Nfa,
    pub pairs: Vec<(StateId, StateId)>,
}

/// Synchronous product over a shared alphabet; see [`product_with`].
pub fn product(g: &Nfa, h: &Nfa) -> Result<Nfa> {
    Ok(product_with(g, h, &Limits::unlimited())?.nfa)
}

/// Reachable part of `g × h`, built breadth-first.
///
/// Visible symbols synchronize. A silent transition of either operand moves
/// that operand alone. Marked states are the marked pairs.
pub fn product_with(g: &Nfa, h: &Nfa, limits: &Limits) -> Result<Product> {
    if !same_alphabet(g.alphabet(), h.alphabet()) {
        return Err(Error::AlphabetMismatch);
    }
    let alphabet = g.alphabet().clone();
    let silent = alphabet.silent();
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut edges: Vec<(StateId, EventId, StateId)> = Vec::new();

    let mut intern = |p: (StateId, StateId), pairs: &mut Vec<(StateId, StateId)>| -> Result<StateId> {
        if let Some(&id) = index.get(&p) {
            return Ok(id);
        }
        if pairs.len() >= limits.max_states {
            return Err(Error::budget(limits.max_states));
        }
        let id = pairs.len() as StateId;
        index.insert(p, id);
        pairs.push(p);
        Ok(id)
    };

    let mut initial = Vec::new();
    for &a in g.initial() {
        for &b in h.initial() {
            initial.push(intern((a, b), &mut pairs)?);
        }
    }
    let mut i = 0;
    while i < pairs.len() {
        if i.is_multiple_of(4096) {
            limits.check_time()?;
        }
        let (a, b) = pairs[i];
        let src = i as StateId;
        let (ga, hb) = (g.transitions(a), h.transitions(b));
        for &(e, ta) in ga {
            if Some(e) == silent {
                let t = intern((ta, b), &mut pairs)?;
                edges.push((src, e, t));
                continue;
            }
            let start = hb.partition_point(|&(f, _)| f < e);
            for &(_, tb) in hb[start..].iter().take_while(|&&(f, _)| f == e) {
                let t = intern((ta, tb), &mut pairs)?;
                edges.push((src, e, t));
            }
        }
        if let Some(s) = silent {
            for tb in h.post(b, s) {
                let t = intern((a, tb), &mut pairs)?;
                edges.push((src, s, t));
            }
        }
        i += 1;
    }

    let mut nfa = Nfa::new(alphabet, pairs.len());
    for (s, e, t) in edges {
        nfa.add_transition(s, e, t);
    }
    nfa.set_initial(initial);
    let mut names = Vec::with_capacity(pairs.len());
    for (id, &(a, b)) in pairs.iter().enumerate() {
        nfa.set_marked(id as StateId, g.is_marked(a) && h.is_marked(b));
        names.push(format!("({},{})", g.state_name(a), h.state_name(b)));
    }
    nfa.set_names(names);
    Ok(Product { nfa, pairs })
}

/// Flips every transition and swaps the initial and marked sets.
pub fn reverse(g: &Nfa) -> Nfa {
    let mut r = Nfa::new(g.alphabet().clone(), g.num_states());
    for q in 0..g.num_states() as StateId {
        for &(e, t) in g.transitions(q) {
            r.add_transition(t, e, q);
        }
        r.set_marked(q, g.is_initial(q));
    }
    r.set_initial(g.marked_states());
    if let Some(n) = g.names() {
        r.set_names(n.to_vec());
    }
    r
}

/// Concatenated automaton `h1 ⊍ h2`; see [`merge_concatenate_mapped`].
pub fn merge_concatenate(h1: &Nfa, h2: &Nfa) -> Result<Nfa> {
    Ok(merge_concatenate_mapped(h1, h2)?.0)
}

/// Builds `h1 ⊍ h2` and returns, for each state of `h2`, its id in the
/// result (`None` for the removed initial states of `h2`).
///
/// States of `h1` keep their ids. Initial states are those of `h1` plus its
/// marked states. A marked state of `h1` additionally carries every
/// transition leaving an initial state of `h2`. Marked states are those of `h2`.
pub fn merge_concatenate_mapped(h1: &Nfa, h2: &Nfa) -> Result<(Nfa, Vec<Option<StateId>>)> {
    if !same_alphabet(h1.alphabet(), h2.alphabet()) {
        return Err(Error::AlphabetMismatch);
    }
    if h2.initial().iter().any(|&q| h2.is_marked(q)) {
        return Err(Error::PreconditionViolated(
            "initial and marked states of the second operand intersect".into(),
        ));
    }
    for q in 0..h2.num_states() as StateId {
        if h2.transitions(q).iter().any(|&(_, t)| h2.is_initial(t)) {
            return Err(Error::PreconditionViolated(
                "second operand has transitions entering its initial states".into(),
            ));
        }
    }
    let n1 = h1.num_states();
    let mut map: Vec<Option<StateId>> = vec![None; h2.num_states()];
    let mut next = n1 as StateId;
    for (q, slot) in map.iter_mut().enumerate() {
        if !h2.is_initial(q as StateId) {
            *slot = Some(next);
            next += 1;
        }
    }
    let mut r = Nfa::new(h1.alphabet().clone(), next as usize);
    for q in 0..n1 as StateId {
        for &(e, t) in h1.transitions(q) {
            r.add_transition(q, e, t);
        }
    }
    let m1: Vec<StateId> = h1.marked_states().collect();
    for &q0 in h2.initial() {
        for &(e, t) in h2.transitions(q0) {
            let t = map[t as usize].expect("checked above");
            for &m in &m1 {
                r.add_transition(m, e, t);
            }
        }
    }
    for q in 0..h2.num_states() as StateId {
        if let Some(id) = map[q as usize] {
            for &(e, t) in h2.transitions(q) {
                r.add_transition(id, e, map[t as usize].expect("checked above"));
            }
            r.set_marked(id, h2.is_marked(q));
        }
    }
    r.set_initial(h1.initial().iter().copied().chain(m1.iter().copied()));
    let mut names: Vec<String> = (0..n1 as StateId).map(|q| h1.state_name(q)).collect();
    for q in 0..h2.num_states() as StateId {
        if map[q as usize].is_some() {
            names.push(h2.state_name(q));
        }
    }
    r.set_names(names);
    Ok((r, map))
}

/// Default cap on the enumeration frontier.
pub const ENUMERATION_CAP: usize = 2_000_000;

/// All marked words of length at most `max_len` (silent symbols contribute
/// nothing).
pub fn enumerate_marked(g: &Nfa, max_len: usize) -> Result<BTreeSet<Vec<EventId>>> {
    enumerate_marked_capped(g, max_len, ENUMERATION_CAP)
}

pub fn enumerate_marked_capped(g: &Nfa, max_len: usize, cap: usize) -> Result<BTreeSet<Vec<EventId>>> {
    let visible: Vec<EventId> = g.alphabet().visible().collect();
    let mut out = BTreeSet::new();
    let mut frontier = vec![(Vec::new(), g.closure_row(g.initial().iter().copied()))];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (word, set) in &frontier {
            if bitset::ones(set).any(|q| g.is_marked(q as StateId)) {
                out.insert(word.clone());
            }
            if len == max_len {
                continue;
            }
            for &e in &visible {
                let mut succ = Vec::new();
                for q in bitset::ones(set) {
                    succ.extend(g.post(q as StateId, e));
                }
                if succ.is_empty() {
                    continue;
                }
                let mut w = word.clone();
                w.push(e);
                next.push((w, g.closure_row(succ)));
                if next.len() > cap {
                    return Err(Error::budget(cap));
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Shortest word of visible symbols leading from an initial state to a
/// state satisfying `pred`.
///
/// Silent transitions cost nothing, so the search is a 0-1 BFS and the
/// witness is minimal in visible length.
pub fn check_reachable_predicate(g: &Nfa, mut pred: impl FnMut(StateId) -> bool) -> Option<Vec<EventId>> {
    let n = g.num_states();
    let silent = g.alphabet().silent();
    let mut dist = vec![usize::MAX; n];
    let mut parent: Vec<Option<(StateId, EventId)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut deque = VecDeque::new();
    for &q in g.initial() {
        dist[q as usize] = 0;
        deque.push_back(q);
    }
    while let Some(q) = deque.pop_front() {
        if done[q as usize] {
            continue;
        }
        done[q as usize] = true;
        if pred(q) {
            let mut word = Vec::new();
            let mut cur = q;
            while let Some((p, e)) = parent[cur as usize] {
                if Some(e) != silent {
                    word.push(e);
                }
                cur = p;
            }
            word.reverse();
            return Some(word);
        }
        let d = dist[q as usize];
        for &(e, t) in g.transitions(q) {
            let w = usize::from(Some(e) != silent);
            if d + w < dist[t as usize] {
                dist[t as usize] = d + w;
                parent[t as usize] = Some((q, e));
                if w == 0 {
                    deque.push_front(t);
                } else {
                    deque.push_back(t);
                }
            }
        }
    }
    None
}

/// Whether `L(g)` (ignoring marking) is every word over the visible symbols.
pub fn generates_all(g: &Nfa) -> bool {
    let loops_on_everything = |q: StateId| {
        g.alphabet().visible().all(|e| g.transitions(q).iter().any(|&(f, t)| f == e && t == q))
    };
    if g.initial().iter().any(|&q| loops_on_everything(q)) {
        return true;
    }
    let mut unmarked = g.clone();
    unmarked.mark_all();
    let d = super::dfa::determinize(&unmarked);
    d.shortest_word_to(|q| d.subset_labels().is_some_and(|l| l.is_empty_set(q))).is_none()
}
