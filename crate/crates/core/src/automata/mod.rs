//! Finite automata over interned alphabets and the constructions the
//! verifiers are built from.

mod alphabet;
pub(crate) mod bitset;
mod dfa;
mod nfa;
mod ops;

pub use alphabet::{Alphabet, EventId, Symbol};
pub use dfa::{complement, determinize, determinize_with, Dfa, Limits, SubsetLabels, NONE};
pub use nfa::{Nfa, StateId};
pub use ops::{
    check_reachable_predicate, enumerate_marked, enumerate_marked_capped, generates_all,
    merge_concatenate, merge_concatenate_mapped, product, product_with, reverse, Product,
    ENUMERATION_CAP,
};

pub(crate) use alphabet::same_alphabet;
