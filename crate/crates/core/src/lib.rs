//! Opacity verification for finite automata.
//!
//! Every notion (current-state, initial-state, joint and separate K-step
//! with both secret types, infinite-step) is reduced to a containment
//! `Θ(L_m(G)) ⊆ Θ(L_m(G × H_NS))` between the label-transformed system `G`
//! and its product with a nonsecret specification `H_NS`.
//!
//! ```
//! use opacity::{autfile, specs::OpacityNotion, verifier};
//!
//! let sys = autfile::parse_aut(
//!     "name tiny\nstates 2\ninitial 0\nsecret 1\nevents a:o\ntrans 0 a 1\ntrans 0 a 0\n",
//! )
//! .unwrap();
//! let v = verifier::verify_state_based(&sys, &OpacityNotion::cso(), None, &Default::default()).unwrap();
//! assert!(v.opaque);
//! ```

pub mod autfile;
pub mod automata;
pub mod baselines;
mod error;
pub mod generators;
pub mod moore;
pub mod specs;
pub mod verifier;

pub use automata::{Alphabet, Dfa, EventId, Limits, Nfa, StateId};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use moore::{IoAlphabet, LabeledSystem, ObservationMask};
pub use specs::{Mode, OpacityNotion, SecretType, SpecAutomaton};
pub use verifier::{Method, Verdict, VerifyOptions};
