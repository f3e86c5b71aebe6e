//! Nonsecret specification automata over an IO alphabet.

use std::fmt;
use std::str::FromStr;

use crate::automata::{generates_all, merge_concatenate_mapped, EventId, Nfa, StateId};
use crate::moore::{IoAlphabet, IoPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Joint,
    Separate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SecretType {
    /// An epoch is secret if it visits some secret state.
    One,
    /// An epoch is secret if it visits only secret states.
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NotionKind {
    Cso,
    Iso,
    KStep,
    InfiniteStep,
}

/// Which opacity property to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpacityNotion {
    pub kind: NotionKind,
    pub k: usize,
    pub mode: Mode,
    pub secret_type: SecretType,
}

impl OpacityNotion {
    pub fn cso() -> Self {
        Self { kind: NotionKind::Cso, k: 0, mode: Mode::Joint, secret_type: SecretType::One }
    }

    pub fn iso() -> Self {
        Self { kind: NotionKind::Iso, k: 0, mode: Mode::Joint, secret_type: SecretType::One }
    }

    pub fn kstep(k: usize, mode: Mode, secret_type: SecretType) -> Self {
        Self { kind: NotionKind::KStep, k, mode, secret_type }
    }

    pub fn infinite(mode: Mode, secret_type: SecretType) -> Self {
        Self { kind: NotionKind::InfiniteStep, k: 0, mode, secret_type }
    }
}

impl fmt::Display for OpacityNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.mode {
            Mode::Joint => "joint",
            Mode::Separate => "sep",
        };
        let t = match self.secret_type {
            SecretType::One => 1,
            SecretType::Two => 2,
        };
        match self.kind {
            NotionKind::Cso => write!(f, "cso"),
            NotionKind::Iso => write!(f, "iso"),
            NotionKind::KStep => write!(f, "{m}{t}"),
            NotionKind::InfiniteStep => write!(f, "{m}{t}-inf"),
        }
    }
}

/// Parses the short names printed by `Display` (`cso`, `iso`, `joint1`,
/// `sep2`, `joint1-inf`, ...); `K` is supplied separately.
impl FromStr for OpacityNotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, inf) = match s.strip_suffix("-inf") {
            Some(b) => (b, true),
            None => (s, false),
        };
        match base {
            "cso" if !inf => return Ok(Self::cso()),
            "iso" if !inf => return Ok(Self::iso()),
            _ => {}
        }
        let (mode, rest) = if let Some(r) = base.strip_prefix("joint") {
            (Mode::Joint, r)
        } else if let Some(r) = base.strip_prefix("sep") {
            (Mode::Separate, r)
        } else {
            return Err(format!("unknown notion `{s}`"));
        };
        let ty = match rest {
            "1" => SecretType::One,
            "2" => SecretType::Two,
            _ => return Err(format!("unknown secret type in `{s}`")),
        };
        Ok(if inf { Self::infinite(mode, ty) } else { Self::kstep(0, mode, ty) })
    }
}

/// Block index and local state of a spec state built by concatenation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateTag {
    pub block: u32,
    pub local: u32,
}

/// A nonsecret specification `H_NS`.
#[derive(Clone, Debug)]
pub struct SpecAutomaton {
    pub nfa: Nfa,
    /// For separate K-step specs, the marked states of the embedded
    /// `H_NS,j(k)` for each `k ≤ K`.
    pub level_marks: Option<Vec<Vec<StateId>>>,
    pub universal: bool,
    /// `(block, local)` tag per state for concatenated specs.
    pub tags: Option<Vec<StateTag>>,
}

impl SpecAutomaton {
    fn plain(nfa: Nfa) -> Self {
        let universal = generates_all(&nfa);
        Self { nfa, level_marks: None, universal, tags: None }
    }

    /// State carrying the given tag, if any.
    pub fn state_with_tag(&self, block: u32, local: u32) -> Option<StateId> {
        let tags = self.tags.as_ref()?;
        tags.iter().position(|t| *t == StateTag { block, local }).map(|i| i as StateId)
    }
}

/// Event classes of an IO alphabet.
struct Classes {
    all: Vec<EventId>,
    s: Vec<EventId>,
    ns: Vec<EventId>,
    o: Vec<EventId>,
    uo: Vec<EventId>,
    ns_o: Vec<EventId>,
    ns_uo: Vec<EventId>,
}

impl Classes {
    fn of(io: &IoAlphabet) -> Self {
        let pick = |f: fn(&IoPair) -> bool| io.select(f);
        Self {
            all: pick(|_| true),
            s: pick(|p| p.secret),
            ns: pick(|p| !p.secret),
            o: pick(|p| p.observable),
            uo: pick(|p| !p.observable),
            ns_o: pick(|p| !p.secret && p.observable),
            ns_uo: pick(|p| !p.secret && !p.observable),
        }
    }
}

fn edges(g: &mut Nfa, from: StateId, events: &[EventId], to: StateId) {
    for &e in events {
        g.add_transition(from, e, to);
    }
}

/// `H_NS` for current-state opacity: marks `E* E_NS`.
pub fn build_cso_spec(io: &IoAlphabet) -> SpecAutomaton {
    let c = Classes::of(io);
    let mut g = Nfa::new(io.alphabet().clone(), 2);
    edges(&mut g, 0, &c.s, 0);
    edges(&mut g, 0, &c.ns, 1);
    edges(&mut g, 1, &c.ns, 1);
    edges(&mut g, 1, &c.s, 0);
    g.add_initial(0);
    g.set_marked(1, true);
    SpecAutomaton::plain(g)
}

/// `H_NS` for initial-state opacity: marks `E_NS E*`.
pub fn build_iso_spec(io: &IoAlphabet) -> SpecAutomaton {
    let c = Classes::of(io);
    let mut g = Nfa::new(io.alphabet().clone(), 3);
    edges(&mut g, 0, &c.ns, 1);
    edges(&mut g, 0, &c.s, 2);
    edges(&mut g, 1, &c.all, 1);
    edges(&mut g, 2, &c.all, 2);
    g.add_initial(0);
    g.set_marked(1, true);
    SpecAutomaton::plain(g)
}

/// The four building blocks of the K-step specifications.
///
/// In the epoch blocks state 0 is the initial state; local state `j` of a
/// block is stored at index `j + 1`.
#[derive(Clone, Debug)]
pub struct EpochBlocks {
    pub star: Nfa,
    pub epoch: Nfa,
    pub epoch_ns1: Nfa,
    pub epoch_ns2: Nfa,
}

impl EpochBlocks {
    pub fn nonsecret(&self, ty: SecretType) -> &Nfa {
        match ty {
            SecretType::One => &self.epoch_ns1,
            SecretType::Two => &self.epoch_ns2,
        }
    }
}

pub fn build_epoch_blocks(io: &IoAlphabet) -> EpochBlocks {
    let c = Classes::of(io);
    let alpha = io.alphabet().clone();

    let mut star = Nfa::new(alpha.clone(), 1);
    edges(&mut star, 0, &c.all, 0);
    star.add_initial(0);
    star.set_marked(0, true);
    star.set_names(vec!["0".into()]);

    let block = |n: usize| {
        let mut g = Nfa::new(alpha.clone(), n);
        g.add_initial(0);
        g.set_marked(1, true);
        let mut names = vec!["init".to_string()];
        names.extend((0..n - 1).map(|i| i.to_string()));
        g.set_names(names);
        g
    };

    let mut epoch = block(2);
    edges(&mut epoch, 0, &c.o, 1);
    edges(&mut epoch, 1, &c.uo, 1);

    let mut epoch_ns1 = block(2);
    edges(&mut epoch_ns1, 0, &c.ns_o, 1);
    edges(&mut epoch_ns1, 1, &c.ns_uo, 1);

    let mut epoch_ns2 = block(3);
    edges(&mut epoch_ns2, 0, &c.ns_o, 1);
    edges(&mut epoch_ns2, 0, &c.o, 2);
    edges(&mut epoch_ns2, 1, &c.uo, 1);
    edges(&mut epoch_ns2, 2, &c.uo, 2);
    edges(&mut epoch_ns2, 2, &c.ns_uo, 1);

    EpochBlocks { star, epoch, epoch_ns1, epoch_ns2 }
}

/// K-step nonsecret specification built by repeated concatenation.
///
/// Separate mode: `H_* ⊍ H_epoch,j ⊍ H_epoch ⊍ … (K times)`.
/// Joint mode: `H_* ⊍ H_epoch,j ⊍ … (K + 1 times)`.
pub fn build_kstep_spec(io: &IoAlphabet, k: usize, mode: Mode, ty: SecretType) -> SpecAutomaton {
    let b = build_epoch_blocks(io);
    let mut h = b.star.clone();
    let mut tags = vec![StateTag { block: 0, local: 0 }];
    h.set_names(vec!["(0,0)".into()]);
    let mut level_marks = Vec::with_capacity(k + 1);
    for block in 1..=k + 1 {
        let next = match (mode, block) {
            (Mode::Separate, 1) | (Mode::Joint, _) => b.nonsecret(ty),
            (Mode::Separate, _) => &b.epoch,
        };
        let (merged, map) = merge_concatenate_mapped(&h, next).expect("epoch blocks satisfy the merge precondition");
        h = merged;
        for (local, id) in map.iter().enumerate() {
            if let Some(id) = *id {
                // Local index 0 is the block's initial state, removed by the merge.
                let local = local as u32 - 1;
                tags.push(StateTag { block: block as u32, local });
                h.set_state_name(id, format!("({block},{local})"));
            }
        }
        level_marks.push(h.marked_states().collect());
    }
    debug_assert_eq!(tags.len(), h.num_states());
    let universal = generates_all(&h);
    SpecAutomaton {
        nfa: h,
        level_marks: (mode == Mode::Separate).then_some(level_marks),
        universal,
        tags: Some(tags),
    }
}

/// Joint infinite-step specification marking `L_epoch,NS,j^+`.
pub fn build_infinite_joint_spec(io: &IoAlphabet, ty: SecretType) -> SpecAutomaton {
    let c = Classes::of(io);
    let g = match ty {
        SecretType::One => {
            let mut g = Nfa::new(io.alphabet().clone(), 2);
            edges(&mut g, 0, &c.ns_o, 1);
            edges(&mut g, 1, &c.ns, 1);
            g.set_marked(1, true);
            g
        }
        SecretType::Two => {
            let mut g = Nfa::new(io.alphabet().clone(), 3);
            edges(&mut g, 0, &c.ns_o, 1);
            edges(&mut g, 0, &c.o, 2);
            edges(&mut g, 1, &c.uo, 1);
            edges(&mut g, 1, &c.ns_o, 1);
            edges(&mut g, 1, &c.o, 2);
            edges(&mut g, 2, &c.uo, 2);
            edges(&mut g, 2, &c.ns_uo, 1);
            g.set_marked(1, true);
            g
        }
    };
    let mut g = g;
    g.add_initial(0);
    SpecAutomaton::plain(g)
}

/// Builds the specification for a notion (separate specs carry level marks).
pub fn build_spec(io: &IoAlphabet, notion: &OpacityNotion) -> SpecAutomaton {
    match notion.kind {
        NotionKind::Cso => build_cso_spec(io),
        NotionKind::Iso => build_iso_spec(io),
        NotionKind::KStep => build_kstep_spec(io, notion.k, notion.mode, notion.secret_type),
        NotionKind::InfiniteStep => build_infinite_joint_spec(io, notion.secret_type),
    }
}
