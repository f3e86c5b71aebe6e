//! Benchmark families. Random families are driven by a seeded ChaCha stream
//! and reproduce bit-identically for the same configuration.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Alphabet, EventId, Nfa, StateId};
use crate::moore::LabeledSystem;

/// Knobs of the dense family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseConfig {
    pub events: usize,
    pub observable: usize,
    /// Inclusive out-degree range per state.
    pub out_degree: (usize, usize),
}

impl Default for DenseConfig {
    fn default() -> Self {
        Self { events: 18, observable: 6, out_degree: (1, 6) }
    }
}

/// Knobs of the grid family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub drop_prob: f64,
    /// Total events as a multiple of the observable-event count.
    pub event_factor: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { drop_prob: 0.3, event_factor: 2 }
    }
}

fn events(prefix: &str, n: usize) -> Alphabet {
    Alphabet::from_names((0..n).map(|i| format!("{prefix}{i}")))
}

fn finish(name: String, g: Nfa, secret: &[StateId], observable: &[EventId]) -> LabeledSystem {
    let mut sys = LabeledSystem::with_secrets(g, secret, observable);
    sys.name = name;
    sys
}

pub fn gen_dense(n: usize, seed: u64) -> LabeledSystem {
    gen_dense_with(n, seed, &DenseConfig::default())
}

/// Random system: all states initial, one secret state, uniform events and
/// targets, out-degree uniform in the configured range.
pub fn gen_dense_with(n: usize, seed: u64, cfg: &DenseConfig) -> LabeledSystem {
    assert!(n >= 2, "dense systems need at least two states");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = events("e", cfg.events).into_shared();
    let mut g = Nfa::new(alpha, n);
    for q in 0..n as StateId {
        let deg = rng.gen_range(cfg.out_degree.0..=cfg.out_degree.1);
        for _ in 0..deg {
            let e = EventId(rng.gen_range(0..cfg.events as u32));
            let t = rng.gen_range(0..n as StateId);
            g.add_transition(q, e, t);
        }
    }
    g.set_initial(0..n as StateId);
    let secret = rng.gen_range(0..n as StateId);
    let obs: Vec<EventId> = (0..cfg.observable as u32).map(EventId).collect();
    finish(format!("dense_{n}_{seed}"), g, &[secret], &obs)
}

pub fn gen_grid(side: usize, seed: u64) -> LabeledSystem {
    gen_grid_with(side, seed, &GridConfig::default())
}

/// `ceil(log2(n))` for `n ≥ 2`.
fn log2_ceil(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// Grid of `side × side` states with 4-neighbour moves. Each directed edge
/// is dropped with `drop_prob`, otherwise labeled with a uniform event.
pub fn gen_grid_with(side: usize, seed: u64, cfg: &GridConfig) -> LabeledSystem {
    assert!(side >= 2, "grids need side at least 2");
    let n = side * side;
    let k = log2_ceil(n);
    let total = k * cfg.event_factor.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = events("g", total).into_shared();
    let mut g = Nfa::new(alpha, n);
    for r in 0..side {
        for c in 0..side {
            let q = (r * side + c) as StateId;
            let nbrs = [
                (r > 0).then(|| (r - 1, c)),
                (r + 1 < side).then(|| (r + 1, c)),
                (c > 0).then(|| (r, c - 1)),
                (c + 1 < side).then(|| (r, c + 1)),
            ];
            for (nr, nc) in nbrs.into_iter().flatten() {
                if rng.gen_bool(cfg.drop_prob) {
                    continue;
                }
                let e = EventId(rng.gen_range(0..total as u32));
                g.add_transition(q, e, (nr * side + nc) as StateId);
            }
        }
    }
    g.set_initial(0..n as StateId);
    let secret: Vec<StateId> = sample(&mut rng, n, k.min(n)).into_iter().map(|i| i as StateId).collect();
    let obs: Vec<EventId> = (0..k as u32).map(EventId).collect();
    finish(format!("grid_{side}_{seed}"), g, &secret, &obs)
}

/// `δ(i, σ_j) = (i + j) mod n`, all events observable, initial `X \ {0}`,
/// state 0 secret.
pub fn gen_cyclic(n: usize) -> LabeledSystem {
    assert!(n >= 2);
    let alpha = events("σ", n).into_shared();
    let mut g = Nfa::new(alpha, n);
    for i in 0..n {
        for j in 0..n {
            g.add_transition(i as StateId, EventId(j as u32), ((i + j) % n) as StateId);
        }
    }
    g.set_initial(1..n as StateId);
    let obs: Vec<EventId> = (0..n as u32).map(EventId).collect();
    finish(format!("cyclic_{n}"), g, &[0], &obs)
}

/// States `1..=i` (index `j - 1` holds state `j`), `δ(j, σ_k) = k`,
/// initial state 2, state 1 secret, all events observable.
pub fn gen_reset(i: usize) -> LabeledSystem {
    assert!(i >= 2);
    let alpha = Alphabet::from_names((1..=i).map(|k| format!("σ{k}"))).into_shared();
    let mut g = Nfa::new(alpha, i);
    for j in 0..i as StateId {
        for k in 0..i as u32 {
            g.add_transition(j, EventId(k), k);
        }
    }
    g.set_initial([1]);
    g.set_names((1..=i).map(|k| k.to_string()).collect());
    let obs: Vec<EventId> = (0..i as u32).map(EventId).collect();
    finish(format!("reset_{i}"), g, &[0], &obs)
}

/// `n + 1` states over `{a, b}`: state 0 loops on both and moves to 1 on
/// `b`; state `i` moves to `i + 1` on both; state `n` is marked.
pub fn gen_revblow(n: usize) -> Nfa {
    assert!(n >= 1);
    let alpha = Alphabet::from_names(["a", "b"]).into_shared();
    let (a, b) = (EventId(0), EventId(1));
    let mut g = Nfa::new(alpha, n + 1);
    g.add_transition(0, a, 0);
    g.add_transition(0, b, 0);
    g.add_transition(0, b, 1);
    for i in 1..n as StateId {
        g.add_transition(i, a, i + 1);
        g.add_transition(i, b, i + 1);
    }
    g.add_initial(0);
    g.set_marked(n as StateId, true);
    g
}
