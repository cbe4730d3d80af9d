//! Learner and adversary strategies.
//!
//! Rounds are indexed `t = 0..n` into the instance sequence the adversary
//! chose. Randomized strategies own a [`ChaCha8Rng`] that the engine reseeds
//! from `(seed, stream)` before every run.

mod adversaries;
mod learners;

pub use adversaries::{
    bfs_guarantee, bfs_tree_adversary, dyadic_adversary, dyadic_order, minimax_adversary, random_label_adversary,
    vc_adversary, BfsTrace, BfsTreeAdversary, DyadicAdversary, MinimaxAdversary,
    RandomLabelAdversary, SequenceMode, Thresholds, VcAdversary,
};
pub use learners::{
    best_response_learner, default_learning_rate, halving_learner, mw_learner, random_learner,
    soa_learner, BestResponseLearner, HalvingLearner, MwLearner, RandomLearner, SoaLearner,
};

use crate::error::Result;
use crate::hypothesis::{HypothesisClass, Instance, Label};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub trait Learner: Send + Sync {
    fn name(&self) -> String;

    /// Called once per run with the full instance sequence.
    fn init(&mut self, class: &HypothesisClass, sequence: &[Instance]) -> Result<()>;

    fn predict(&mut self, t: usize) -> Result<Label>;

    fn observe(&mut self, t: usize, label: Label) -> Result<()>;

    fn reseed(&mut self, _seed: u64, _stream: u64) {}

    fn clone_box(&self) -> Box<dyn Learner>;
}

impl Clone for Box<dyn Learner> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// An adversary for the realizable game: it sees each prediction before
/// answering with a label.
pub trait Adversary: Send + Sync {
    fn name(&self) -> String;

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>>;

    fn label(&mut self, t: usize, prediction: Label) -> Result<Label>;

    fn reseed(&mut self, _seed: u64, _stream: u64) {}

    fn clone_box(&self) -> Box<dyn Adversary>;
}

/// An adversary for the agnostic game: every label is committed before the
/// learner's prediction exists, and any label is allowed.
pub trait AgnosticAdversary: Send + Sync {
    fn name(&self) -> String;

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>>;

    fn commit(&mut self, t: usize) -> Result<Label>;

    fn reseed(&mut self, _seed: u64, _stream: u64) {}

    fn clone_box(&self) -> Box<dyn AgnosticAdversary>;
}

/// The class a learner actually works over for one sequence.
///
/// Explicit classes are restricted to the distinct instances of the sequence
/// (so the learner sees `H|x`); tree-cube classes keep their implicit
/// representation and the whole branch set.
#[derive(Clone, Debug)]
pub(crate) struct Projection {
    pub class: HypothesisClass,
    /// Column of `class` queried at each round.
    pub columns: Vec<Instance>,
}

impl Projection {
    pub fn new(class: &HypothesisClass, sequence: &[Instance]) -> Result<Self> {
        for &x in sequence {
            class.check_instance(x)?;
        }
        if !class.is_explicit() || sequence.is_empty() {
            return Ok(Projection {
                class: class.clone(),
                columns: sequence.to_vec(),
            });
        }
        let mut distinct: Vec<Instance> = Vec::new();
        let columns = sequence
            .iter()
            .map(|x| match distinct.iter().position(|d| d == x) {
                Some(i) => i,
                None => {
                    distinct.push(*x);
                    distinct.len() - 1
                }
            })
            .collect();
        Ok(Projection {
            class: class.restrict(&distinct)?,
            columns,
        })
    }

    pub fn column(&self, t: usize) -> Result<Instance> {
        self.columns.get(t).copied().ok_or_else(|| {
            crate::error::Error::contract(format!("round {t} is past the sequence end"))
        })
    }
}
