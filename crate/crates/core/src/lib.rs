//! Transductive online learning laboratory.
//!
//! Finite hypothesis classes, their combinatorial dimensions, learner and
//! adversary strategies, an exact minimax oracle for the game value, and
//! the experiment drivers behind the `transduct` CLI.

pub mod bitset;
pub mod error;
pub mod hypothesis;

pub use bitset::HypSet;
pub use error::{Error, Result};
pub use hypothesis::{HypothesisClass, Instance, Label, LabeledSequence, SpaceState, VersionSpace};
pub mod zoo;
pub mod dimensions;
pub mod trees;
pub mod game;
pub mod strategies;
pub mod experiments;
