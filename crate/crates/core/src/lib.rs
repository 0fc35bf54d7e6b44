//! Medication-response detection from smartphone active tests.
//!
//! The pipeline: parse active-test recordings (voice, balance, gait,
//! dexterity, reaction), pair each participant's same-day pre-dose and
//! post-dose sessions, extract the full published feature set, train a
//! Gini random forest to discriminate baseline from treatment instances,
//! and evaluate with repeated 10-fold cross-validation against a random
//! classifier null. A synthetic cohort simulator with controllable
//! effect sizes stands in for study data.

pub mod accel;
pub mod cv;
pub mod dfa;
pub mod error;
pub mod extract;
pub mod fit;
pub mod forest;
pub mod jsonl;
pub mod ks;
pub mod led;
pub mod lomb;
pub mod pairing;
pub mod registry;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod tap;
pub mod types;
pub mod voice;
pub mod wav;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
