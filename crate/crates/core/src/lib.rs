//! Stable-husband enumeration for the stable marriage problem, a
//! branching-process model of the same procedure on random preferences,
//! a brute-force oracle for small instances, and the generating-function
//! tail bounds used to show that a fixed girl has a logarithmic number of
//! stable husbands.
//!
//! Girls and boys are both indexed `0..n`; the two index spaces are
//! separate. All randomness flows from explicit `u64` seeds through
//! [`rng`] so every result is reproducible.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod harness;
pub mod instance;
pub mod labels;
pub mod matching;
pub mod oracle;
pub mod process;
pub mod rng;
pub mod special;

pub use instance::{InstanceError, Matching, PreferenceInstance, Violation};
pub use matching::{
    find_blocking_pairs, gale_shapley_boys_propose, stable_husbands, BlockingPair,
    HusbandEnumeration, MatchingError,
};
pub use oracle::{enumerate_stable, OracleError, StableSet};

/// Index of a girl, in `0..n`.
pub type Girl = usize;
/// Index of a boy, in `0..n`.
pub type Boy = usize;
