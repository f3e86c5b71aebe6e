//! K-delay state and trajectory estimators, used as baselines for weak and
//! strong K-step opacity, and their correspondence with the secret observer.
//!
//! An estimator state is a set of elements. In a state-estimator element
//! `(x_0, …, x_K)`, `x_K` is the current state and `x_i` is a state the same
//! run visited `K − i` observations ago. Before the first observations the
//! tuple is padded with the run's initial state. A trajectory-estimator
//! element adds flags `b_i` (1 when the run visited a secret state during
//! epoch `i`) and a flag `c` for the current epoch.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automata::{EventId, Limits, StateId};
use crate::error::{Error, Result};
use crate::moore::{induced_mask, label_transform, LabeledSystem, INIT_EVENT};
use crate::specs::{build_kstep_spec, Mode, SecretType};
use crate::verifier::SecretObserver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Tracks state tuples; decides weak K-step opacity.
    State,
    /// Tracks state tuples and secrecy flags; decides strong K-step opacity.
    Trajectory,
}

/// Which correspondence map to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GMap {
    Weak,
    Strong,
}

/// A reachable K-delay estimator, deterministic over the observable events.
#[derive(Clone, Debug)]
pub struct DelayEstimator {
    pub kind: EstimatorKind,
    pub k: usize,
    events: Vec<EventId>,
    secret: Vec<bool>,
    /// Elements are `K + 1` states, plus one flag word for trajectories.
    width: usize,
    states: Vec<Vec<u32>>,
    trans: Vec<Vec<Option<u32>>>,
}

impl DelayEstimator {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn observable_events(&self) -> &[EventId] {
        &self.events
    }

    /// Elements of an estimator state.
    pub fn elements(&self, q: u32) -> impl Iterator<Item = &[u32]> {
        self.states[q as usize].chunks(self.width)
    }

    /// Successor on the `i`-th observable event.
    pub fn next(&self, q: u32, i: usize) -> Option<u32> {
        self.trans[q as usize][i]
    }

    /// Whether the state reveals a secret under the estimator's notion.
    pub fn is_revealing(&self, q: u32) -> bool {
        let k = self.k;
        match self.kind {
            EstimatorKind::State => {
                (0..=k).any(|p| self.elements(q).all(|t| self.secret[t[p] as usize]))
            }
            EstimatorKind::Trajectory => self.elements(q).all(|t| t[k + 1] != 0),
        }
    }

    /// Opaque iff no reachable state is revealing.
    pub fn is_opaque(&self) -> bool {
        (0..self.states.len() as u32).all(|q| !self.is_revealing(q))
    }
}

struct Closure<'a> {
    sys: &'a LabeledSystem,
}

impl Closure<'_> {
    /// States reachable from `x` through unobservable events, each with the
    /// set of "secret visited" flags achievable on the way (bit 0: no secret
    /// seen, bit 1: secret seen), starting from flag `c`.
    fn reach(&self, x: StateId, c: bool) -> Vec<(StateId, bool)> {
        let a = &self.sys.automaton;
        let start = (x, c || self.sys.is_secret(x));
        let mut seen: BTreeSet<(StateId, bool)> = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some((q, f)) = stack.pop() {
            for &(e, t) in a.transitions(q) {
                if self.sys.is_observable(e) {
                    continue;
                }
                let n = (t, f || self.sys.is_secret(t));
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// Builds the reachable part of the estimator.
pub fn build_estimator(sys: &LabeledSystem, k: usize, kind: EstimatorKind, limits: &Limits) -> Result<DelayEstimator> {
    sys.validate()?;
    let a = &sys.automaton;
    let cl = Closure { sys };
    let events = sys.observable_events();
    let secret: Vec<bool> = (0..a.num_states() as StateId).map(|x| sys.is_secret(x)).collect();
    let traj = kind == EstimatorKind::Trajectory;
    let width = k + 1 + usize::from(traj);

    let element = |xs: &[u32], flags: u32| -> Vec<u32> {
        let mut v = xs.to_vec();
        if traj {
            v.push(flags);
        }
        v
    };

    let mut init: BTreeSet<Vec<u32>> = BTreeSet::new();
    for &p in a.initial() {
        for (x, c) in cl.reach(p, false) {
            let mut xs = vec![p; k];
            xs.push(x);
            init.insert(element(&xs, u32::from(c) << k));
        }
    }

    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut states: Vec<Vec<u32>> = Vec::new();
    let mut trans: Vec<Vec<Option<u32>>> = Vec::new();
    let mut queue = VecDeque::new();
    let flat = |set: BTreeSet<Vec<u32>>| set.into_iter().flatten().collect::<Vec<u32>>();

    let mut intern = |key: Vec<u32>, states: &mut Vec<Vec<u32>>, queue: &mut VecDeque<u32>| -> Result<u32> {
        if let Some(&id) = index.get(&key) {
            return Ok(id);
        }
        if states.len() >= limits.max_states {
            return Err(Error::budget(limits.max_states));
        }
        let id = states.len() as u32;
        index.insert(key.clone(), id);
        states.push(key);
        queue.push_back(id);
        Ok(id)
    };
    intern(flat(init), &mut states, &mut queue)?;

    while let Some(q) = queue.pop_front() {
        limits.check_time()?;
        let mut row = vec![None; events.len()];
        for (i, &sigma) in events.iter().enumerate() {
            let mut next: BTreeSet<Vec<u32>> = BTreeSet::new();
            for t in states[q as usize].chunks(width) {
                let x = t[k];
                for y0 in a.post(x, sigma) {
                    for (y, c) in cl.reach(y0, false) {
                        let mut xs = t[1..=k].to_vec();
                        xs.push(y);
                        let flags = if traj && k > 0 {
                            let b = t[k + 1] & ((1 << k) - 1);
                            let cur = t[k + 1] >> k & 1;
                            (b >> 1) | (cur << (k - 1)) | (u32::from(c) << k)
                        } else {
                            u32::from(c) << k
                        };
                        next.insert(element(&xs, flags));
                    }
                }
            }
            if !next.is_empty() {
                row[i] = Some(intern(flat(next), &mut states, &mut queue)?);
            }
        }
        trans.push(row);
    }
    // `trans` was filled in queue order, which equals id order.
    Ok(DelayEstimator { kind, k, events, secret, width, states, trans })
}

pub fn k_delay_state_estimator(sys: &LabeledSystem, k: usize) -> Result<DelayEstimator> {
    build_estimator(sys, k, EstimatorKind::State, &Limits::default())
}

pub fn k_delay_trajectory_estimator(sys: &LabeledSystem, k: usize) -> Result<DelayEstimator> {
    build_estimator(sys, k, EstimatorKind::Trajectory, &Limits::default())
}

fn check_preconditions(sys: &LabeledSystem, which: GMap) -> Result<()> {
    let a = &sys.automaton;
    let bad = |m: &str| Err(Error::PreconditionViolated(m.to_string()));
    if a.initial().len() != 1 {
        return bad("the correspondence needs a single initial state");
    }
    for q in 0..a.num_states() as StateId {
        let tr = a.transitions(q);
        if tr.windows(2).any(|w| w[0].0 == w[1].0) {
            return bad("the correspondence needs a deterministic system");
        }
        for &(e, t) in tr {
            if sys.is_observable(e) {
                continue;
            }
            if a.is_initial(q) {
                return bad("the initial state has an unobservable outgoing event");
            }
            if sys.labels[q as usize] != sys.labels[t as usize] {
                return bad("an unobservable transition changes the label");
            }
        }
    }
    if which == GMap::Strong && sys.is_secret(a.initial()[0]) {
        return bad("the initial state must be nonsecret");
    }
    Ok(())
}

/// Checks that the estimator state reached by every observation `γ` maps
/// under `g_weak` / `g_strong` onto the secret-observer state reached by
/// `σ_init · γ`.
///
/// Preconditions: deterministic system, one nonsecret initial state without
/// unobservable outgoing events, and unobservable transitions that keep the
/// label (so an epoch's secrecy is that of its current state).
pub fn check_g_map_correspondence(sys: &LabeledSystem, k: usize, which: GMap) -> Result<bool> {
    check_preconditions(sys, which)?;
    let limits = Limits::default();
    let t = label_transform(sys);
    let mask = induced_mask(&t.io);
    let spec = match which {
        GMap::Weak => build_kstep_spec(&t.io, k, Mode::Separate, SecretType::Two),
        GMap::Strong => build_kstep_spec(&t.io, k, Mode::Joint, SecretType::One),
    };
    let so = SecretObserver::build(&t.nfa, &spec.nfa, &mask, &limits)?;
    let kind = match which {
        GMap::Weak => EstimatorKind::State,
        GMap::Strong => EstimatorKind::Trajectory,
    };
    let est = build_estimator(sys, k, kind, &limits)?;

    let tag = |block: u32, local: u32| spec.state_with_tag(block, local).expect("spec has the tagged state");
    let h00 = tag(0, 0);
    let h11 = (which == GMap::Weak).then(|| tag(1, 1));
    let hk: Vec<StateId> = (0..=k as u32).map(|i| tag(i + 1, 0)).collect();

    let image = |q: u32| -> BTreeSet<(StateId, StateId)> {
        let mut out = BTreeSet::new();
        for el in est.elements(q) {
            let x = el[k];
            out.insert((x, h00));
            match which {
                GMap::Weak => {
                    out.insert((x, h11.expect("weak map uses (1,1)")));
                    for (d, &h) in hk.iter().enumerate().take(k + 1) {
                        if !sys.is_secret(el[k - d]) {
                            out.insert((x, h));
                        }
                    }
                }
                GMap::Strong => {
                    if sys.is_secret(x) {
                        continue;
                    }
                    let b = el[k + 1];
                    for (d, &h) in hk.iter().enumerate().take(k + 1) {
                        // b_i = 0 for every i ≥ K − d.
                        if (k - d..k).all(|i| b >> i & 1 == 0) {
                            out.insert((x, h));
                        }
                    }
                }
            }
        }
        out
    };

    let out = mask.output();
    let init_sym = out.lookup(INIT_EVENT).expect("observation alphabet has σ_init");
    let sigma = sys.alphabet();
    let syms: Vec<Option<EventId>> = est.observable_events().iter().map(|&e| out.lookup(sigma.name(e))).collect();
    let d0 = so.dfa.next(so.dfa.initial(), init_sym).expect("observer is complete");

    let mut seen = BTreeSet::from([(0u32, d0)]);
    let mut queue = VecDeque::from([(0u32, d0)]);
    while let Some((q, d)) = queue.pop_front() {
        let observed: BTreeSet<(StateId, StateId)> = so.pairs_of(d).collect();
        if image(q) != observed {
            return Ok(false);
        }
        for (i, sym) in syms.iter().enumerate() {
            let dn = sym.and_then(|s| so.dfa.next(d, s)).or(so.dfa.dead());
            match (est.next(q, i), dn) {
                (Some(qn), Some(dn)) => {
                    if seen.insert((qn, dn)) {
                        queue.push_back((qn, dn));
                    }
                }
                (None, Some(dn)) if so.pairs_of(dn).next().is_none() => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}
