use super::{seeded, Learner, Projection};
use crate::dimensions::{Budget, LittlestoneOracle};
use crate::error::{Error, Result};
use crate::game::SequenceSolver;
use crate::hypothesis::{HypothesisClass, Instance, Label, VersionSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::{Arc, Mutex};

fn uninit() -> Error {
    Error::contract("learner used before init")
}

// Shared bookkeeping: the working class, the column per round and the
// version space after the labels seen so far.
#[derive(Clone, Debug)]
struct Tracker {
    proj: Projection,
    vs: VersionSpace,
}

impl Tracker {
    fn new(class: &HypothesisClass, sequence: &[Instance]) -> Result<Self> {
        let proj = Projection::new(class, sequence)?;
        let vs = proj.class.full_space();
        Ok(Tracker { proj, vs })
    }

    fn observe(&mut self, t: usize, label: Label) -> Result<()> {
        let x = self.proj.column(t)?;
        self.proj.class.check_label(label)?;
        let next = self.vs.filter_unchecked(x, label);
        if next.is_empty() {
            return Err(Error::ProtocolViolation {
                round: t + 1,
                detail: format!("label {label} leaves no consistent hypothesis"),
            });
        }
        self.vs = next;
        Ok(())
    }
}

/// Predicts the majority label of the version space over `H|x`.
#[derive(Clone, Debug, Default)]
pub struct HalvingLearner {
    state: Option<Tracker>,
}

pub fn halving_learner() -> HalvingLearner {
    HalvingLearner::default()
}

impl HalvingLearner {
    pub fn version_space(&self) -> Option<&VersionSpace> {
        self.state.as_ref().map(|s| &s.vs)
    }
}

impl Learner for HalvingLearner {
    fn name(&self) -> String {
        "halving".into()
    }

    fn init(&mut self, class: &HypothesisClass, sequence: &[Instance]) -> Result<()> {
        self.state = Some(Tracker::new(class, sequence)?);
        Ok(())
    }

    fn predict(&mut self, t: usize) -> Result<Label> {
        let s = self.state.as_ref().ok_or_else(uninit)?;
        let counts = s.vs.label_counts(s.proj.column(t)?)?;
        let mut best = 0;
        for (y, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = y;
            }
        }
        Ok(best as Label)
    }

    fn observe(&mut self, t: usize, label: Label) -> Result<()> {
        self.state.as_mut().ok_or_else(uninit)?.observe(t, label)
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Predicts the label whose restriction has the largest Littlestone
/// dimension, lowest label on ties. Clones share one memo table.
#[derive(Clone, Debug)]
pub struct SoaLearner {
    budget: Budget,
    state: Option<(Tracker, Arc<Mutex<LittlestoneOracle>>)>,
}

pub fn soa_learner(budget: Budget) -> SoaLearner {
    SoaLearner {
        budget,
        state: None,
    }
}

impl Learner for SoaLearner {
    fn name(&self) -> String {
        "soa".into()
    }

    fn init(&mut self, class: &HypothesisClass, sequence: &[Instance]) -> Result<()> {
        let tracker = Tracker::new(class, sequence)?;
        let oracle = LittlestoneOracle::new(&tracker.proj.class, &self.budget)?;
        self.state = Some((tracker, Arc::new(Mutex::new(oracle))));
        Ok(())
    }

    fn predict(&mut self, t: usize) -> Result<Label> {
        let (s, oracle) = self.state.as_ref().ok_or_else(uninit)?;
        let parts = s.vs.split(s.proj.column(t)?);
        if parts.len() == 1 {
            return Ok(parts[0].0);
        }
        let mut oracle = oracle.lock().expect("oracle lock");
        let mut best: Option<(Label, u32)> = None;
        for (y, part) in &parts {
            let d = oracle.ld(part)?;
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((*y, d));
            }
        }
        Ok(best.map_or(0, |(y, _)| y))
    }

    fn observe(&mut self, t: usize, label: Label) -> Result<()> {
        self.state.as_mut().ok_or_else(uninit)?.0.observe(t, label)
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// `η = √(8 ln|H|x| / n)`, or 0 when either factor vanishes.
pub fn default_learning_rate(hypotheses: usize, n: usize) -> f64 {
    if hypotheses <= 1 || n == 0 {
        return 0.0;
    }
    (8.0 * (hypotheses as f64).ln() / n as f64).sqrt()
}

/// Multiplicative weights over the rows of `H|x`; samples its prediction
/// from the weight mass behind each label.
#[derive(Clone, Debug)]
pub struct MwLearner {
    eta: Option<f64>,
    rng: ChaCha8Rng,
    state: Option<MwState>,
}

#[derive(Clone, Debug)]
struct MwState {
    proj: Projection,
    weights: Vec<f64>,
    eta: f64,
}

/// `eta = None` picks [`default_learning_rate`] at init.
pub fn mw_learner(eta: Option<f64>, seed: u64) -> MwLearner {
    MwLearner {
        eta,
        rng: seeded(seed, 0),
        state: None,
    }
}

impl MwLearner {
    pub fn weights(&self) -> Option<&[f64]> {
        self.state.as_ref().map(|s| s.weights.as_slice())
    }

    pub fn eta(&self) -> Option<f64> {
        self.state.as_ref().map(|s| s.eta)
    }
}

impl Learner for MwLearner {
    fn name(&self) -> String {
        "mw".into()
    }

    fn init(&mut self, class: &HypothesisClass, sequence: &[Instance]) -> Result<()> {
        // one weight per hypothesis, so implicit classes must be small enough to list
        let listed;
        let class = if class.is_explicit() {
            class
        } else {
            let limit = Budget::default().max_hypotheses;
            listed = class.materialize(limit).map_err(|_| {
                Error::budget("multiplicative weights experts", class.hypothesis_count(), limit)
            })?;
            &listed
        };
        let proj = Projection::new(class, sequence)?;
        let size = proj.class.explicit_count().expect("projection of an explicit class");
        let eta = self.eta.unwrap_or_else(|| default_learning_rate(size, sequence.len()));
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::contract(format!("learning rate {eta} is not a nonnegative number")));
        }
        self.state = Some(MwState {
            proj,
            weights: vec![1.0; size],
            eta,
        });
        Ok(())
    }

    fn predict(&mut self, t: usize) -> Result<Label> {
        let s = self.state.as_ref().ok_or_else(uninit)?;
        let x = s.proj.column(t)?;
        let mut mass = vec![0.0; s.proj.class.label_count()];
        for (h, w) in s.weights.iter().enumerate() {
            mass[s.proj.class.at(h as u64, x) as usize] += w;
        }
        let total: f64 = mass.iter().sum();
        let mut u = self.rng.gen::<f64>() * total;
        for (y, m) in mass.iter().enumerate() {
            if *m > 0.0 && u < *m {
                return Ok(y as Label);
            }
            u -= m;
        }
        // rounding left `u` past the last bucket
        Ok(mass.iter().rposition(|m| *m > 0.0).unwrap_or(0) as Label)
    }

    fn observe(&mut self, t: usize, label: Label) -> Result<()> {
        let s = self.state.as_mut().ok_or_else(uninit)?;
        let x = s.proj.column(t)?;
        s.proj.class.check_label(label)?;
        let factor = (-s.eta).exp();
        for (h, w) in s.weights.iter_mut().enumerate() {
            if s.proj.class.at(h as u64, x) != label {
                *w *= factor;
            }
        }
        // keep the largest weight at 1
        let top = s.weights.iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            s.weights.iter_mut().for_each(|w| *w /= top);
        }
        Ok(())
    }

    fn reseed(&mut self, seed: u64, stream: u64) {
        self.rng = seeded(seed, stream);
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Plays the fixed-sequence minimax strategy. Clones share the solver.
#[derive(Clone, Debug)]
pub struct BestResponseLearner {
    budget: Budget,
    state: Option<(Tracker, Arc<Mutex<SequenceSolver>>)>,
}

pub fn best_response_learner(budget: Budget) -> BestResponseLearner {
    BestResponseLearner {
        budget,
        state: None,
    }
}

impl Learner for BestResponseLearner {
    fn name(&self) -> String {
        "best-response".into()
    }

    fn init(&mut self, class: &HypothesisClass, sequence: &[Instance]) -> Result<()> {
        let tracker = Tracker::new(class, sequence)?;
        let solver = SequenceSolver::new(&tracker.proj.class, tracker.proj.columns.clone(), &self.budget)?;
        self.state = Some((tracker, Arc::new(Mutex::new(solver))));
        Ok(())
    }

    fn predict(&mut self, t: usize) -> Result<Label> {
        let (s, solver) = self.state.as_ref().ok_or_else(uninit)?;
        solver.lock().expect("solver lock").best_prediction(&s.vs, t)
    }

    fn observe(&mut self, t: usize, label: Label) -> Result<()> {
        self.state.as_mut().ok_or_else(uninit)?.0.observe(t, label)
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Uniformly random labels; a baseline that ignores all feedback.
#[derive(Clone, Debug)]
pub struct RandomLearner {
    rng: ChaCha8Rng,
    labels: usize,
}

pub fn random_learner(seed: u64) -> RandomLearner {
    RandomLearner {
        rng: seeded(seed, 0),
        labels: 2,
    }
}

impl Learner for RandomLearner {
    fn name(&self) -> String {
        "random".into()
    }

    fn init(&mut self, class: &HypothesisClass, _sequence: &[Instance]) -> Result<()> {
        self.labels = class.label_count();
        Ok(())
    }

    fn predict(&mut self, _t: usize) -> Result<Label> {
        Ok(self.rng.gen_range(0..self.labels) as Label)
    }

    fn observe(&mut self, _t: usize, _label: Label) -> Result<()> {
        Ok(())
    }

    fn reseed(&mut self, seed: u64, stream: u64) {
        self.rng = seeded(seed, stream);
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}
