use super::{seeded, Adversary, AgnosticAdversary};
use crate::bitset::HypSet;
use crate::dimensions::{littlestone_tree, natarajan_dim, threshold_dim, vc_dim, Budget};
use crate::error::{Error, Result};
use crate::game::SequenceSolver;
use crate::hypothesis::{HypothesisClass, Instance, Label, VersionSpace};
use crate::trees::{bfs_sequence, defining_tree, shatters, LittlestoneTree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn not_started() -> Error {
    Error::contract("adversary asked for a label before choosing a sequence")
}

fn floor_log2(n: u64) -> u32 {
    if n == 0 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

fn instance_at(seq: &[Instance], t: usize) -> Result<Instance> {
    seq.get(t)
        .copied()
        .ok_or_else(|| Error::contract(format!("round {t} is past the sequence end")))
}

// Lowest realizable label other than `avoid`, else the lowest realizable one.
fn contrary_label(vs: &VersionSpace, x: Instance, avoid: Label) -> Result<Label> {
    let parts = vs.split(x);
    parts
        .iter()
        .map(|(y, _)| *y)
        .find(|&y| y != avoid)
        .or_else(|| parts.first().map(|(y, _)| *y))
        .ok_or_else(|| Error::contract("adversary version space is empty"))
}

/// Presents a Natarajan-shattered set (a VC-shattered set for binary
/// classes) and contradicts every prediction on it; later rounds contradict
/// whenever a second label is still realizable.
#[derive(Clone, Debug)]
pub struct VcAdversary {
    budget: Budget,
    state: Option<VcState>,
}

#[derive(Clone, Debug)]
struct VcState {
    sequence: Vec<Instance>,
    /// `(f0, f1)` on the shattered prefix.
    pairs: Vec<(Label, Label)>,
    vs: VersionSpace,
}

pub fn vc_adversary(budget: Budget) -> VcAdversary {
    VcAdversary {
        budget,
        state: None,
    }
}

impl VcAdversary {
    /// Size of the shattered prefix of the chosen sequence.
    pub fn shattered_len(&self) -> Option<usize> {
        self.state.as_ref().map(|s| s.pairs.len())
    }
}

impl Adversary for VcAdversary {
    fn name(&self) -> String {
        "vc".into()
    }

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
        let w = natarajan_dim(class, &self.budget)?;
        let d = w.set.len().min(n);
        let mut sequence: Vec<Instance> = w.set[..d].to_vec();
        let pairs = (0..d).map(|i| (w.f0[i], w.f1[i])).collect();
        let rest = (0..class.domain_size()).filter(|x| !w.set.contains(x));
        sequence.extend(rest.take(n - d));
        let filler = sequence.first().copied().unwrap_or(0);
        sequence.resize(n, filler);
        self.state = Some(VcState {
            sequence: sequence.clone(),
            pairs,
            vs: class.full_space(),
        });
        Ok(sequence)
    }

    fn label(&mut self, t: usize, prediction: Label) -> Result<Label> {
        let s = self.state.as_mut().ok_or_else(not_started)?;
        let x = instance_at(&s.sequence, t)?;
        let y = match s.pairs.get(t) {
            Some(&(f0, f1)) => {
                if prediction == f0 {
                    f1
                } else {
                    f0
                }
            }
            None => contrary_label(&s.vs, x, prediction)?,
        };
        s.vs = s.vs.filter_unchecked(x, y);
        Ok(y)
    }

    fn clone_box(&self) -> Box<dyn Adversary> {
        Box::new(self.clone())
    }
}

/// Indices `1..N` of a length-`N - 1` chain in dyadic order:
/// `N/2, N/4, 3N/4, N/8, ...`. `n_pow` is `log2 N`.
pub fn dyadic_order(n_pow: u32) -> Vec<usize> {
    let n = 1usize << n_pow;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..=n_pow {
        let step = n >> i;
        out.extend((1..1usize << i).step_by(2).map(|j| j * step));
    }
    out
}

/// Binary search over a threshold chain, forcing one mistake per level.
///
/// With `k = min(⌊log td⌋, ⌊log n⌋)` and `N = 2^k`, the adversary uses
/// chain positions `2..=N` as `x'_1..x'_{N-1}` so that `h_1` plays the role
/// of the all-outside hypothesis `h'_0`. It keeps the interval `(a, b)` of
/// chain indices still consistent with every label given, contradicts the
/// learner at points strictly inside it, and answers elsewhere with the
/// label forced by `h'_a`.
#[derive(Clone, Debug)]
pub struct DyadicAdversary {
    budget: Budget,
    state: Option<DyadicState>,
}

#[derive(Clone, Debug)]
enum DyadicState {
    Chain {
        /// Chain index `m` of each round.
        index: Vec<usize>,
        inside: Label,
        outside: Label,
        a: usize,
        b: usize,
    },
    /// No chain of length 2: contradict once where two labels are realizable.
    Degenerate { sequence: Vec<Instance>, vs: VersionSpace },
}

pub fn dyadic_adversary(budget: Budget) -> DyadicAdversary {
    DyadicAdversary {
        budget,
        state: None,
    }
}

impl DyadicAdversary {
    /// `k`, the number of dyadic levels played (0 in the degenerate case).
    pub fn levels(&self) -> Option<u32> {
        match self.state.as_ref()? {
            DyadicState::Chain { index, .. } => {
                let n = index.iter().copied().max().unwrap_or(0) + 1;
                Some(floor_log2(n as u64))
            }
            DyadicState::Degenerate { .. } => Some(0),
        }
    }
}

impl Adversary for DyadicAdversary {
    fn name(&self) -> String {
        "dyadic".into()
    }

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
        let w = threshold_dim(class, &self.budget)?;
        let k = floor_log2(w.len() as u64).min(floor_log2(n as u64));
        if k == 0 {
            let full = class.full_space();
            let x = (0..class.domain_size())
                .find(|&x| full.split(x).len() >= 2)
                .unwrap_or(0);
            let sequence = vec![x; n];
            self.state = Some(DyadicState::Degenerate {
                sequence: sequence.clone(),
                vs: full,
            });
            return Ok(sequence);
        }
        let big_n = 1usize << k;
        let mut index = dyadic_order(k);
        index.resize(n, big_n / 2);
        // x'_m is chain position m + 1, i.e. witness entry m
        let sequence: Vec<Instance> = index.iter().map(|&m| w.instances[m]).collect();
        self.state = Some(DyadicState::Chain {
            index,
            inside: w.inside,
            outside: w.outside,
            a: 0,
            b: big_n,
        });
        Ok(sequence)
    }

    fn label(&mut self, t: usize, prediction: Label) -> Result<Label> {
        match self.state.as_mut().ok_or_else(not_started)? {
            DyadicState::Chain {
                index,
                inside,
                outside,
                a,
                b,
                ..
            } => {
                let m = *index
                    .get(t)
                    .ok_or_else(|| Error::contract(format!("round {t} is past the sequence end")))?;
                let y = if *a < m && m < *b {
                    if prediction == *inside {
                        *outside
                    } else {
                        *inside
                    }
                } else if m <= *a {
                    *inside
                } else {
                    *outside
                };
                if y == *inside {
                    *a = (*a).max(m);
                } else {
                    *b = (*b).min(m);
                }
                Ok(y)
            }
            DyadicState::Degenerate { sequence, vs } => {
                let x = instance_at(sequence, t)?;
                let y = contrary_label(vs, x, prediction)?;
                *vs = vs.filter_unchecked(x, y);
                Ok(y)
            }
        }
    }

    fn clone_box(&self) -> Box<dyn Adversary> {
        Box::new(self.clone())
    }
}

/// Threshold schedule for the breadth-first tree adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Thresholds {
    /// `t*_k = 2^(2^(2k))`.
    Guaranteed,
    /// `t*_k = 2^(2k)`; exploratory only, carries no guarantee.
    Scaled,
}

impl Thresholds {
    /// `e` with `t*_k = 2^e`, saturating.
    fn exponent(self, k: u32) -> u64 {
        match self {
            Thresholds::Guaranteed => {
                if 2 * k >= 64 {
                    u64::MAX
                } else {
                    1u64 << (2 * k)
                }
            }
            Thresholds::Scaled => 2 * k as u64,
        }
    }
}

// a / b >= 2^-e, exactly. Counts stay below 2^63, so any e >= 64 passes
// whenever a >= 1.
fn at_least_tau(a: u64, b: u64, e: u64) -> bool {
    if a == 0 {
        return false;
    }
    if e >= 64 {
        return true;
    }
    (a as u128) << e >= b as u128
}

/// Per-round record of a breadth-first tree adversary run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BfsTrace {
    /// `(|H_{t,1}|, |H_t|)` at each round.
    pub ratios: Vec<(u64, u64)>,
    /// `k` at the start of each round.
    pub k_start: Vec<u32>,
    /// Rounds where `r_t` fell inside `[τ_t, 1 - τ_t]`.
    pub forced: Vec<usize>,
}

impl BfsTrace {
    /// Whether the recorded run satisfies the per-round invariants: ratios in
    /// `[0, 1]` over a nonempty space, `k` starting at 1 and rising by one
    /// after each forced round, and `k = j` at the start of the `j`-th forced round.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut k = 1;
        let mut forced = self.forced.iter().peekable();
        for (t, (&(a, b), &ks)) in self.ratios.iter().zip(&self.k_start).enumerate() {
            if b == 0 || a > b {
                return Err(format!("round {}: ratio {a}/{b}", t + 1));
            }
            if ks != k {
                return Err(format!("round {}: k = {ks}, expected {k}", t + 1));
            }
            if forced.peek() == Some(&&t) {
                forced.next();
                k += 1;
            }
        }
        if forced.next().is_some() {
            return Err("forced round outside the run".into());
        }
        Ok(())
    }
}

/// `min(⌊log(d)/2⌋, ⌊log log(n)/2⌋)`, the number of forced mistakes
/// guaranteed for a shattered tree of depth `d` and horizon `n`.
pub fn bfs_guarantee(depth: u32, n: u64) -> u32 {
    if depth == 0 || n < 2 {
        return 0;
    }
    let log_n = floor_log2(n);
    let loglog = if log_n == 0 { 0 } else { floor_log2(log_n as u64) };
    (floor_log2(depth as u64) / 2).min(loglog / 2)
}

/// The witnesses `H_1`, one per branch of the shattered tree.
#[derive(Clone, Debug)]
enum Witnesses {
    /// Tree-cube class on its defining tree: every branch, counted implicitly.
    Implicit(VersionSpace),
    Listed {
        class: HypothesisClass,
        ids: Vec<u64>,
        alive: HypSet,
    },
}

impl Witnesses {
    fn counts(&self, x: Instance) -> (u64, u64) {
        match self {
            Witnesses::Implicit(vs) => {
                let total = vs.len();
                (vs.filter_unchecked(x, 1).len(), total)
            }
            Witnesses::Listed { class, ids, alive } => {
                let ones = alive.iter().filter(|&i| class.at(ids[i], x) == 1).count();
                (ones as u64, alive.len() as u64)
            }
        }
    }

    fn filter(&mut self, x: Instance, y: Label) {
        match self {
            Witnesses::Implicit(vs) => *vs = vs.filter_unchecked(x, y),
            Witnesses::Listed { class, ids, alive } => {
                for i in alive.iter().collect::<Vec<_>>() {
                    if class.at(ids[i], x) != y {
                        alive.remove(i);
                    }
                }
            }
        }
    }
}

/// The threshold adversary on a shattered tree, presented breadth first.
///
/// At round `t` it compares `r_t = |H_{t,1}| / |H_t|` with `τ_t = 1/t*_k`:
/// inside `[τ_t, 1 - τ_t]` it contradicts the prediction and increments
/// `k`; otherwise it answers with the majority value.
#[derive(Clone, Debug)]
pub struct BfsTreeAdversary {
    tree: Option<LittlestoneTree>,
    thresholds: Thresholds,
    budget: Budget,
    state: Option<(Vec<Instance>, Witnesses, u32)>,
    trace: BfsTrace,
}

/// `tree = None` uses the defining tree of a tree-cube class, or a
/// maximum-depth shattered tree of an explicit class.
pub fn bfs_tree_adversary(
    tree: Option<LittlestoneTree>,
    thresholds: Thresholds,
    budget: Budget,
) -> BfsTreeAdversary {
    BfsTreeAdversary {
        tree,
        thresholds,
        budget,
        state: None,
        trace: BfsTrace::default(),
    }
}

impl BfsTreeAdversary {
    pub fn trace(&self) -> &BfsTrace {
        &self.trace
    }

    pub fn tree_depth(&self) -> Option<u32> {
        self.tree.as_ref().map(|t| t.depth())
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }
}

impl Adversary for BfsTreeAdversary {
    fn name(&self) -> String {
        match self.thresholds {
            Thresholds::Guaranteed => "bfs-tree".into(),
            Thresholds::Scaled => "bfs-tree-scaled".into(),
        }
    }

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
        if !class.is_binary() {
            return Err(Error::NotBinary(class.label_count()));
        }
        let tree = match (&self.tree, class.tree_cube_shape()) {
            (Some(t), _) => t.clone(),
            (None, Some(cube)) => defining_tree(cube.depth())?,
            (None, None) => littlestone_tree(class, &self.budget)?
                .ok_or_else(|| Error::contract("class shatters no tree"))?,
        };
        let implicit = class
            .tree_cube_shape()
            .is_some_and(|c| c.depth() == tree.depth() && tree == defining_tree(c.depth()).expect("valid depth"));
        let witnesses = if implicit {
            Witnesses::Implicit(class.full_space())
        } else {
            let ids = shatters(class, &tree)?
                .ok_or_else(|| Error::contract("the tree is not shattered by the class"))?;
            let alive = HypSet::full(ids.len());
            Witnesses::Listed {
                class: class.clone(),
                ids,
                alive,
            }
        };
        let sequence = if n == 0 { vec![] } else { bfs_sequence(&tree, n)? };
        self.tree = Some(tree);
        self.state = Some((sequence.clone(), witnesses, 1));
        self.trace = BfsTrace::default();
        Ok(sequence)
    }

    fn label(&mut self, t: usize, prediction: Label) -> Result<Label> {
        let (sequence, witnesses, k) = self.state.as_mut().ok_or_else(not_started)?;
        let x = instance_at(sequence, t)?;
        let (ones, total) = witnesses.counts(x);
        let e = self.thresholds.exponent(*k);
        let in_band = at_least_tau(ones, total, e) && at_least_tau(total - ones, total, e);
        self.trace.ratios.push((ones, total));
        self.trace.k_start.push(*k);
        let y = if in_band {
            self.trace.forced.push(t);
            *k += 1;
            1 - prediction.min(1)
        } else if ones * 2 < total {
            0
        } else {
            1
        };
        witnesses.filter(x, y);
        Ok(y)
    }

    fn clone_box(&self) -> Box<dyn Adversary> {
        Box::new(self.clone())
    }
}

/// Plays the exact minimax strategy on a value-attaining sequence.
#[derive(Clone, Debug)]
pub struct MinimaxAdversary {
    budget: Budget,
    state: Option<(std::sync::Arc<std::sync::Mutex<SequenceSolver>>, VersionSpace)>,
    value: Option<u32>,
}

pub fn minimax_adversary(budget: Budget) -> MinimaxAdversary {
    MinimaxAdversary {
        budget,
        state: None,
        value: None,
    }
}

impl MinimaxAdversary {
    /// `M(H, n)` as computed when the sequence was chosen.
    pub fn value(&self) -> Option<u32> {
        self.value
    }
}

impl Adversary for MinimaxAdversary {
    fn name(&self) -> String {
        "minimax".into()
    }

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
        let best = crate::game::transductive_value(class, n, &self.budget)?;
        let mut sequence = best.sequence;
        let filler = sequence.first().copied().unwrap_or(0);
        sequence.resize(n, filler);
        let solver = SequenceSolver::new(class, sequence.clone(), &self.budget)?;
        self.value = Some(best.value);
        self.state = Some((std::sync::Arc::new(std::sync::Mutex::new(solver)), class.full_space()));
        Ok(sequence)
    }

    fn label(&mut self, t: usize, prediction: Label) -> Result<Label> {
        let (solver, vs) = self.state.as_mut().ok_or_else(not_started)?;
        let mut solver = solver.lock().expect("solver lock");
        let y = solver.best_label(vs, t, prediction)?;
        *vs = vs.filter_unchecked(solver.sequence()[t], y);
        Ok(y)
    }

    fn clone_box(&self) -> Box<dyn Adversary> {
        Box::new(self.clone())
    }
}

/// Instance order for the random-label adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceMode {
    /// `d` shattered points, each repeated `k = ⌊n/d⌋` times in blocks; the
    /// `n - kd` leftover rounds repeat the first point.
    Shattered,
    /// Instances `0, 1, ..., m-1, 0, 1, ...`.
    Cycle,
}

/// Oblivious adversary drawing i.i.d. uniform labels.
#[derive(Clone, Debug)]
pub struct RandomLabelAdversary {
    mode: SequenceMode,
    budget: Budget,
    rng: ChaCha8Rng,
    labels: usize,
    blocks: Option<(usize, usize)>,
}

pub fn random_label_adversary(mode: SequenceMode, budget: Budget, seed: u64) -> RandomLabelAdversary {
    RandomLabelAdversary {
        mode,
        budget,
        rng: seeded(seed, 1),
        labels: 2,
        blocks: None,
    }
}

impl RandomLabelAdversary {
    /// `(d, k)` of the shattered layout once a sequence was chosen.
    pub fn blocks(&self) -> Option<(usize, usize)> {
        self.blocks
    }

    /// `d·√k / (2√2)`, the expected-regret lower bound for the shattered layout.
    pub fn lower_bound(&self) -> Option<f64> {
        let (d, k) = self.blocks?;
        Some(d as f64 * (k as f64).sqrt() / (2.0 * 2f64.sqrt()))
    }
}

impl AgnosticAdversary for RandomLabelAdversary {
    fn name(&self) -> String {
        match self.mode {
            SequenceMode::Shattered => "random".into(),
            SequenceMode::Cycle => "random-cycle".into(),
        }
    }

    fn choose_sequence(&mut self, class: &HypothesisClass, n: usize) -> Result<Vec<Instance>> {
        self.labels = class.label_count();
        match self.mode {
            SequenceMode::Cycle => {
                self.blocks = None;
                Ok((0..n).map(|t| t % class.domain_size()).collect())
            }
            SequenceMode::Shattered => {
                let set = vc_dim(class, &self.budget)?.set;
                let d = set.len();
                if d == 0 {
                    self.blocks = Some((0, 0));
                    return Ok(vec![0; n]);
                }
                let k = n / d;
                let mut seq: Vec<Instance> = set.iter().flat_map(|&x| std::iter::repeat_n(x, k)).collect();
                seq.resize(n, set[0]);
                self.blocks = Some((d, k));
                Ok(seq)
            }
        }
    }

    fn commit(&mut self, _t: usize) -> Result<Label> {
        Ok(self.rng.gen_range(0..self.labels) as Label)
    }

    fn reseed(&mut self, seed: u64, stream: u64) {
        self.rng = seeded(seed, stream);
    }

    fn clone_box(&self) -> Box<dyn AgnosticAdversary> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn dyadic_order_levels() {
        assert_eq!(dyadic_order(1), vec![1]);
        assert_eq!(dyadic_order(2), vec![2, 1, 3]);
        assert_eq!(dyadic_order(3), vec![4, 2, 6, 1, 3, 5, 7]);
        let mut all = dyadic_order(5);
        all.sort();
        assert_eq!(all, (1..32).collect::<Vec<_>>());
    }

    #[test]
    fn threshold_comparison_is_exact() {
        // 1/16 against tau = 1/16 at k = 1
        assert!(at_least_tau(1, 16, 4));
        assert!(!at_least_tau(1, 17, 4));
        assert!(!at_least_tau(0, 5, 4));
        assert!(at_least_tau(1, 1 << 62, u64::MAX));
        assert_eq!(Thresholds::Guaranteed.exponent(1), 4);
        assert_eq!(Thresholds::Guaranteed.exponent(2), 16);
        assert_eq!(Thresholds::Guaranteed.exponent(40), u64::MAX);
        assert_eq!(Thresholds::Scaled.exponent(3), 6);
    }

    #[test]
    fn guarantee_values() {
        assert_eq!(bfs_guarantee(4, 16), 1);
        assert_eq!(bfs_guarantee(16, 65536), 2);
        assert_eq!(bfs_guarantee(3, 1000), 0);
        assert_eq!(bfs_guarantee(16, 15), 0);
    }

    #[test]
    fn vc_sequence_layout() {
        let c = zoo::full_cube(3).unwrap();
        let mut a = vc_adversary(Budget::default());
        assert_eq!(a.choose_sequence(&c, 5).unwrap(), vec![0, 1, 2, 0, 0]);
        assert_eq!(a.shattered_len(), Some(3));
        assert_eq!(a.label(0, 0).unwrap(), 1);
        assert_eq!(a.label(1, 1).unwrap(), 0);
    }

    #[test]
    fn dyadic_layout_on_thresholds() {
        let c = zoo::thresholds(7).unwrap();
        let mut a = dyadic_adversary(Budget::default());
        let seq = a.choose_sequence(&c, 7).unwrap();
        assert_eq!(a.levels(), Some(2));
        // chain x_1..x_7 = instances 0..6; x'_m = x_{m+1}
        assert_eq!(seq, vec![2, 1, 3, 2, 2, 2, 2]);
    }

    #[test]
    fn shattered_blocks() {
        let c = zoo::full_cube(2).unwrap();
        let mut a = random_label_adversary(SequenceMode::Shattered, Budget::default(), 0);
        let seq = a.choose_sequence(&c, 7).unwrap();
        assert_eq!(seq, vec![0, 0, 0, 1, 1, 1, 0]);
        assert_eq!(a.blocks(), Some((2, 3)));
        let lb = a.lower_bound().unwrap();
        assert!((lb - 2.0 * 3f64.sqrt() / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn trace_check_catches_bad_k() {
        let good = BfsTrace {
            ratios: vec![(1, 2), (0, 1)],
            k_start: vec![1, 2],
            forced: vec![0],
        };
        assert!(good.check().is_ok());
        let bad = BfsTrace {
            k_start: vec![1, 1],
            ..good
        };
        assert!(bad.check().is_err());
    }
}
