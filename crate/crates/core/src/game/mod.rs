//! The transductive game: running it and computing its value.
//!
//! The adversary fixes the whole instance sequence first and the learner
//! sees it before round 1. In the realizable game every label prefix must
//! stay consistent with some hypothesis; in the agnostic game labels are
//! unrestricted and committed before the prediction.

mod minimax;

pub use minimax::{
    domain_automorphisms, fixed_sequence_value, transductive_value, GameValue, SequenceSolver,
};

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label};
use crate::strategies::{Adversary, AgnosticAdversary, Learner};
use rayon::prelude::*;
use std::io::Write;

/// Record of one game.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub sequence: Vec<Instance>,
    pub predictions: Vec<Label>,
    pub labels: Vec<Label>,
    /// Consistent hypotheses after each round's label.
    pub version_space_sizes: Vec<u64>,
}

impl Transcript {
    /// Rounds (0-based) where the prediction missed.
    pub fn mistake_set(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&t| self.predictions[t] != self.labels[t])
            .collect()
    }

    pub fn mistakes(&self) -> usize {
        self.mistake_set().len()
    }

    /// CSV with columns `t,x,prediction,label,mistake,version_space_size`;
    /// `t` counts rounds from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "prediction", "label", "mistake", "version_space_size"])?;
        for t in 0..self.labels.len() {
            w.write_record([
                (t + 1).to_string(),
                self.sequence[t].to_string(),
                self.predictions[t].to_string(),
                self.labels[t].to_string(),
                ((self.predictions[t] != self.labels[t]) as u8).to_string(),
                self.version_space_sizes[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_sequence(class: &HypothesisClass, seq: &[Instance], n: usize) -> Result<()> {
    if seq.len() != n {
        return Err(Error::ProtocolViolation {
            round: 0,
            detail: format!("adversary chose {} instances for n = {n}", seq.len()),
        });
    }
    for &x in seq {
        if x >= class.domain_size() {
            return Err(Error::ProtocolViolation {
                round: 0,
                detail: format!("instance {x} outside the domain"),
            });
        }
    }
    Ok(())
}

fn check_prediction(class: &HypothesisClass, t: usize, y: Label) -> Result<()> {
    if y as usize >= class.label_count() {
        return Err(Error::ProtocolViolation {
            round: t + 1,
            detail: format!("learner predicted label {y} outside the label set"),
        });
    }
    Ok(())
}

/// Play the realizable game once. Randomized players are reseeded from
/// `seed` (learner on stream 0, adversary on stream 1).
pub fn run_realizable(
    class: &HypothesisClass,
    adversary: &mut dyn Adversary,
    learner: &mut dyn Learner,
    n: usize,
    seed: u64,
) -> Result<Transcript> {
    learner.reseed(seed, 0);
    adversary.reseed(seed, 1);
    let sequence = adversary.choose_sequence(class, n)?;
    check_sequence(class, &sequence, n)?;
    learner.init(class, &sequence)?;
    let mut vs = class.full_space();
    let mut tr = Transcript {
        sequence: sequence.clone(),
        ..Transcript::default()
    };
    for (t, &x) in sequence.iter().enumerate() {
        let pred = learner.predict(t)?;
        check_prediction(class, t, pred)?;
        let y = adversary.label(t, pred)?;
        if y as usize >= class.label_count() {
            return Err(Error::ProtocolViolation {
                round: t + 1,
                detail: format!("adversary sent label {y} outside the label set"),
            });
        }
        vs = vs.filter_unchecked(x, y);
        if vs.is_empty() {
            return Err(Error::ProtocolViolation {
                round: t + 1,
                detail: format!("label {y} at instance {x} makes the sequence unrealizable"),
            });
        }
        learner.observe(t, y)?;
        tr.predictions.push(pred);
        tr.labels.push(y);
        tr.version_space_sizes.push(vs.len());
    }
    Ok(tr)
}

/// Largest number of mistakes any realizable labeling of `sequence` forces
/// on a deterministic learner, with one labeling that attains it.
///
/// Explores the full label tree, cloning the learner at every branch point.
pub fn worst_case_mistakes(
    class: &HypothesisClass,
    sequence: &[Instance],
    learner: &dyn Learner,
) -> Result<(u32, Vec<Label>)> {
    let mut root = learner.clone_box();
    root.init(class, sequence)?;
    fn go(
        seq: &[Instance],
        t: usize,
        vs: &crate::hypothesis::VersionSpace,
        learner: Box<dyn Learner>,
        labels: &mut Vec<Label>,
    ) -> Result<(u32, Vec<Label>)> {
        if t == seq.len() {
            return Ok((0, labels.clone()));
        }
        let mut learner = learner;
        let pred = learner.predict(t)?;
        let parts = vs.split(seq[t]);
        let mut best: Option<(u32, Vec<Label>)> = None;
        let last = parts.len() - 1;
        let mut owned = Some(learner);
        for (i, (y, part)) in parts.into_iter().enumerate() {
            let mut l = if i == last {
                owned.take().expect("learner kept for the last branch")
            } else {
                owned.as_ref().expect("learner available").clone_box()
            };
            l.observe(t, y)?;
            labels.push(y);
            let (m, path) = go(seq, t + 1, &part, l, labels)?;
            labels.pop();
            let m = m + (pred != y) as u32;
            if best.as_ref().is_none_or(|(b, _)| m > *b) {
                best = Some((m, path));
            }
        }
        Ok(best.expect("a nonempty version space has a realizable label"))
    }
    go(sequence, 0, &class.full_space(), root, &mut Vec::with_capacity(sequence.len()))
}

/// One agnostic game: the adversary's label for round `t` is fixed before
/// the learner is asked to predict. Returns the transcript and the fewest
/// mistakes of any single hypothesis on the realized labels.
pub fn play_agnostic(
    class: &HypothesisClass,
    adversary: &mut dyn AgnosticAdversary,
    learner: &mut dyn Learner,
    n: usize,
) -> Result<(Transcript, u64)> {
    let sequence = adversary.choose_sequence(class, n)?;
    check_sequence(class, &sequence, n)?;
    learner.init(class, &sequence)?;
    let mut vs = class.full_space();
    let mut tr = Transcript {
        sequence: sequence.clone(),
        ..Transcript::default()
    };
    for (t, &x) in sequence.iter().enumerate() {
        let committed = adversary.commit(t)?;
        if committed as usize >= class.label_count() {
            return Err(Error::ProtocolViolation {
                round: t + 1,
                detail: format!("adversary committed label {committed} outside the label set"),
            });
        }
        let pred = learner.predict(t)?;
        check_prediction(class, t, pred)?;
        learner.observe(t, committed)?;
        vs = vs.filter_unchecked(x, committed);
        tr.predictions.push(pred);
        tr.labels.push(committed);
        tr.version_space_sizes.push(vs.len());
    }
    let best = best_hypothesis_mistakes(class, &tr.sequence, &tr.labels)?;
    Ok((tr, best))
}

/// `min_h |{t : h(x_t) ≠ y_t}|`.
pub fn best_hypothesis_mistakes(class: &HypothesisClass, seq: &[Instance], labels: &[Label]) -> Result<u64> {
    let count = class.explicit_count().ok_or_else(|| {
        Error::contract("best-hypothesis accounting needs an explicit class")
    })?;
    Ok((0..count as u64)
        .map(|h| {
            seq.iter()
                .zip(labels)
                .filter(|&(&x, &y)| class.at(h, x) != y)
                .count() as u64
        })
        .min()
        .unwrap_or(0))
}

/// Monte-Carlo summary of agnostic play.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretReport {
    pub trials: usize,
    pub mean_learner_mistakes: f64,
    pub mean_best_hypothesis_mistakes: f64,
    pub mean_regret: f64,
    /// Standard error of `mean_regret`.
    pub std_error: f64,
    /// `3 · std_error`.
    pub confidence_halfwidth: f64,
}

/// Normal-approximation width multiplier used for every Monte-Carlo check.
pub const CONFIDENCE_SIGMAS: f64 = 3.0;

/// Repeat the agnostic game `trials` times. Trial `i` reseeds the learner on
/// stream `2i` and the adversary on stream `2i + 1`, so results do not
/// depend on thread scheduling.
pub fn run_agnostic(
    class: &HypothesisClass,
    adversary: &dyn AgnosticAdversary,
    learner: &dyn Learner,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RegretReport> {
    if trials == 0 {
        return Err(Error::contract("run_agnostic needs at least one trial"));
    }
    let per_trial: Vec<Result<(u64, u64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut a = adversary.clone_box();
            let mut l = learner.clone_box();
            a.reseed(seed, 2 * i + 1);
            l.reseed(seed, 2 * i);
            let (tr, best) = play_agnostic(class, a.as_mut(), l.as_mut(), n)?;
            Ok((tr.mistakes() as u64, best))
        })
        .collect();
    let mut results = Vec::with_capacity(trials);
    for r in per_trial {
        results.push(r?);
    }
    let k = trials as f64;
    let mean_l = results.iter().map(|r| r.0 as f64).sum::<f64>() / k;
    let mean_b = results.iter().map(|r| r.1 as f64).sum::<f64>() / k;
    let regrets: Vec<f64> = results.iter().map(|r| r.0 as f64 - r.1 as f64).collect();
    let mean = mean_l - mean_b;
    let var = if trials > 1 {
        regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let se = (var / k).sqrt();
    Ok(RegretReport {
        trials,
        mean_learner_mistakes: mean_l,
        mean_best_hypothesis_mistakes: mean_b,
        mean_regret: mean,
        std_error: se,
        confidence_halfwidth: CONFIDENCE_SIGMAS * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensions::Budget;
    use crate::strategies::*;
    use crate::zoo;

    struct Liar;

    impl Adversary for Liar {
        fn name(&self) -> String {
            "liar".into()
        }
        fn choose_sequence(&mut self, _: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
            Ok(vec![0; n])
        }
        fn label(&mut self, t: usize, _: Label) -> Result<Label> {
            Ok((t % 2) as Label)
        }
        fn clone_box(&self) -> Box<dyn Adversary> {
            Box::new(Liar)
        }
    }

    #[test]
    fn cube_vs_vc_adversary() {
        let c = zoo::full_cube(3).unwrap();
        let mut a = vc_adversary(Budget::default());
        let tr = run_realizable(&c, &mut a, &mut halving_learner(), 3, 0).unwrap();
        assert_eq!(tr.mistakes(), 3);
        assert_eq!(tr.version_space_sizes, vec![4, 2, 1]);
    }

    #[test]
    fn protocol_violation_names_the_round() {
        let c = zoo::full_cube(2).unwrap();
        let err = run_realizable(&c, &mut Liar, &mut halving_learner(), 3, 0).unwrap_err();
        assert!(matches!(err, Error::ProtocolViolation { round: 2, .. }), "{err}");
    }

    #[test]
    fn transcript_csv() {
        let c = zoo::full_cube(2).unwrap();
        let mut a = vc_adversary(Budget::default());
        let tr = run_realizable(&c, &mut a, &mut halving_learner(), 2, 0).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,prediction,label,mistake,version_space_size");
        assert_eq!(lines[1], "1,0,0,1,1,2");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn worst_case_matches_value_for_best_response() {
        let b = Budget::default();
        let t3 = zoo::thresholds(3).unwrap();
        let seq = [1, 2, 0];
        let (m, labels) = worst_case_mistakes(&t3, &seq, &best_response_learner(b)).unwrap();
        assert_eq!(m, fixed_sequence_value(&t3, &seq, &b).unwrap());
        assert_eq!(labels.len(), 3);
        let (m, _) = worst_case_mistakes(&zoo::full_cube(3).unwrap(), &[0, 1, 2], &halving_learner()).unwrap();
        assert_eq!(m, 3);
    }

    #[test]
    fn singleton_agnostic_regret_is_zero() {
        let c = zoo::singleton(2).unwrap();
        let a = random_label_adversary(SequenceMode::Cycle, Budget::default(), 0);
        let l = mw_learner(None, 0);
        let r = run_agnostic(&c, &a, &l, 20, 50, 1).unwrap();
        assert_eq!(r.mean_regret, 0.0);
        assert_eq!(r.confidence_halfwidth, 0.0);
    }

    #[test]
    fn agnostic_runs_are_reproducible() {
        let c = zoo::full_cube(2).unwrap();
        let a = random_label_adversary(SequenceMode::Shattered, Budget::default(), 0);
        let l = mw_learner(None, 0);
        let r1 = run_agnostic(&c, &a, &l, 20, 64, 9).unwrap();
        let r2 = run_agnostic(&c, &a, &l, 20, 64, 9).unwrap();
        assert_eq!(r1, r2);
        let r3 = run_agnostic(&c, &a, &l, 20, 64, 10).unwrap();
        assert_ne!(r1, r3);
        assert!((r1.mean_regret - (r1.mean_learner_mistakes - r1.mean_best_hypothesis_mistakes)).abs() < 1e-12);
    }

    #[test]
    fn best_hypothesis_accounting() {
        let c = zoo::thresholds(2).unwrap();
        // labels 0,1 at x_1,x_2: every threshold misses at least once
        assert_eq!(best_hypothesis_mistakes(&c, &[0, 1], &[0, 1]).unwrap(), 1);
        assert_eq!(best_hypothesis_mistakes(&c, &[0, 1], &[1, 0]).unwrap(), 0);
    }
}
