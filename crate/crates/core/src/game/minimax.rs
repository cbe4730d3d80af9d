//! Exact game values by memoized minimax over version spaces.

use crate::dimensions::Budget;
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label, SpaceState, VersionSpace};
use rayon::prelude::*;
use std::collections::HashMap;

/// Minimax values `V(vs, t)` for one fixed instance sequence.
///
/// `V(vs, t) = 0` past the end; otherwise the learner picks `ŷ` to minimize
/// and the adversary picks a label `y` keeping `vs` nonempty to maximize
/// `1(ŷ ≠ y) + V(vs|x_t→y, t + 1)`.
#[derive(Debug)]
pub struct SequenceSolver {
    sequence: Vec<Instance>,
    memo: HashMap<(SpaceState, usize), u32>,
    max_states: u64,
}

impl SequenceSolver {
    pub fn new(class: &HypothesisClass, sequence: Vec<Instance>, budget: &Budget) -> Result<Self> {
        for &x in &sequence {
            class.check_instance(x)?;
        }
        Ok(SequenceSolver {
            sequence,
            memo: HashMap::new(),
            max_states: budget.max_states,
        })
    }

    pub fn sequence(&self) -> &[Instance] {
        &self.sequence
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }

    pub fn value(&mut self, vs: &VersionSpace, t: usize) -> Result<u32> {
        if vs.is_empty() {
            return Err(Error::contract("game value of an empty version space"));
        }
        self.value_inner(vs, t)
    }

    fn value_inner(&mut self, vs: &VersionSpace, t: usize) -> Result<u32> {
        if t >= self.sequence.len() || vs.len() <= 1 {
            return Ok(0);
        }
        let key = (vs.state().clone(), t);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let parts = vs.split(self.sequence[t]);
        let mut values = Vec::with_capacity(parts.len());
        for (_, part) in &parts {
            values.push(self.value_inner(part, t + 1)?);
        }
        let v = combine(&values);
        if self.memo.len() as u64 >= self.max_states {
            return Err(Error::budget("minimax states", self.memo.len() as u64, self.max_states));
        }
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Values of the nonempty restrictions at round `t`, by label.
    pub fn label_values(&mut self, vs: &VersionSpace, t: usize) -> Result<Vec<(Label, u32)>> {
        let x = *self
            .sequence
            .get(t)
            .ok_or_else(|| Error::contract(format!("round {t} is past the sequence end")))?;
        vs.split(x)
            .into_iter()
            .map(|(y, part)| Ok((y, self.value_inner(&part, t + 1)?)))
            .collect()
    }

    /// An optimal prediction: the label with the largest continuation value
    /// (lowest label on ties).
    pub fn best_prediction(&mut self, vs: &VersionSpace, t: usize) -> Result<Label> {
        let values = self.label_values(vs, t)?;
        let mut best: Option<(Label, u32)> = None;
        for (y, v) in values {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((y, v));
            }
        }
        best.map(|(y, _)| y)
            .ok_or_else(|| Error::contract("no realizable label at this round"))
    }

    /// An optimal realizable reply to `prediction` (lowest label on ties).
    pub fn best_label(&mut self, vs: &VersionSpace, t: usize, prediction: Label) -> Result<Label> {
        let values = self.label_values(vs, t)?;
        let mut best: Option<(Label, u32)> = None;
        for (y, v) in values {
            let score = v + (y != prediction) as u32;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((y, score));
            }
        }
        best.map(|(y, _)| y)
            .ok_or_else(|| Error::contract("no realizable label at this round"))
    }
}

// min over ŷ of max over y of 1(ŷ≠y) + v_y: predict the best continuation,
// so the value is max(v1, 1 + v2) for the two largest entries.
fn combine(values: &[u32]) -> u32 {
    let (mut first, mut second) = (0u32, None::<u32>);
    for (i, &v) in values.iter().enumerate() {
        if i == 0 {
            first = v;
        } else if v > first {
            second = Some(first);
            first = v;
        } else {
            second = Some(second.map_or(v, |s| s.max(v)));
        }
    }
    match second {
        Some(s) => first.max(1 + s),
        None => first,
    }
}

pub fn fixed_sequence_value(
    class: &HypothesisClass,
    sequence: &[Instance],
    budget: &Budget,
) -> Result<u32> {
    SequenceSolver::new(class, sequence.to_vec(), budget)?.value(&class.full_space(), 0)
}

/// `M(H, n)` with a sequence attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameValue {
    pub value: u32,
    pub sequence: Vec<Instance>,
}

fn floor_log2(n: u64) -> u32 {
    63 - n.leading_zeros()
}

fn falling_factorial(m: u64, l: u64) -> u64 {
    (0..l).fold(1u64, |acc, i| acc.saturating_mul(m - i))
}

/// Instance permutations that map the row set onto itself. Only searched
/// for domains of at most 7 instances; larger domains get the identity.
pub fn domain_automorphisms(class: &HypothesisClass) -> Vec<Vec<Instance>> {
    let m = class.domain_size();
    let identity: Vec<Instance> = (0..m).collect();
    if m > 7 || !class.is_explicit() {
        return vec![identity];
    }
    let rows = class.sorted_rows();
    let row_set: std::collections::HashSet<&Vec<Label>> = rows.iter().collect();
    let mut out = Vec::new();
    let mut perm = identity.clone();
    permutations(&mut perm, 0, &mut |p| {
        let ok = rows.iter().all(|r| {
            let image: Vec<Label> = (0..m).map(|j| r[p[j]]).collect();
            row_set.contains(&image)
        });
        if ok {
            out.push(p.to_vec());
        }
    });
    out.sort();
    out
}

fn permutations(p: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, f);
        p.swap(i, j);
    }
}

// Ordered tuples of `l` distinct instances from `0..m`, lexicographic.
fn distinct_tuples(m: usize, l: usize) -> Vec<Vec<Instance>> {
    fn go(m: usize, l: usize, used: &mut Vec<bool>, cur: &mut Vec<Instance>, out: &mut Vec<Vec<Instance>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for x in 0..m {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(m, l, used, cur, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(m, l, &mut vec![false; m], &mut Vec::with_capacity(l), &mut out);
    out
}

// `seq` is the lexicographically least member of its orbit.
fn is_orbit_minimal(seq: &[Instance], group: &[Vec<Instance>]) -> bool {
    group.iter().all(|p| {
        for &x in seq {
            match p[x].cmp(&x) {
                std::cmp::Ordering::Less => return false,
                std::cmp::Ordering::Greater => return true,
                std::cmp::Ordering::Equal => {}
            }
        }
        true
    })
}

/// Exact `M(H, n)`: the maximum of [`fixed_sequence_value`] over sequences
/// of `min(n, m)` distinct instances. A repeated instance has a forced label
/// in the realizable game, so repeats never help the adversary, and values
/// only grow when a sequence is extended.
///
/// Sequences that are images of one another under a domain automorphism
/// have equal values, so only the least one of each orbit is solved.
pub fn transductive_value(class: &HypothesisClass, n: usize, budget: &Budget) -> Result<GameValue> {
    let m = class.domain_size();
    let l = n.min(m);
    if l == 0 {
        return Ok(GameValue {
            value: 0,
            sequence: vec![],
        });
    }
    let count = falling_factorial(m as u64, l as u64);
    if count > budget.max_sequences {
        return Err(Error::budget("instance sequences", count, budget.max_sequences));
    }
    // no sequence can beat the halving bound or its own length
    let cap = (l as u32).min(floor_log2(class.hypothesis_count()));
    let group = domain_automorphisms(class);
    let candidates: Vec<Vec<Instance>> = distinct_tuples(m, l)
        .into_iter()
        .filter(|s| is_orbit_minimal(s, &group))
        .collect();
    let mut best = GameValue {
        value: 0,
        sequence: candidates[0].clone(),
    };
    // chunks keep the early exit deterministic: the first maximizer in
    // lexicographic order wins regardless of scheduling
    for chunk in candidates.chunks(64) {
        let values: Vec<Result<u32>> = chunk
            .par_iter()
            .map(|s| fixed_sequence_value(class, s, budget))
            .collect();
        for (s, v) in chunk.iter().zip(values) {
            let v = v?;
            if v > best.value {
                best = GameValue {
                    value: v,
                    sequence: s.clone(),
                };
            }
        }
        if best.value == cap {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    // Direct recursion over explicit row lists: learner minimizes over every
    // label, adversary maximizes over realizable labels.
    fn brute(rows: &[Vec<Label>], seq: &[Instance], k: Label) -> u32 {
        let Some((&x, rest)) = seq.split_first() else {
            return 0;
        };
        (0..k)
            .map(|pred| {
                (0..k)
                    .filter_map(|y| {
                        let sub: Vec<Vec<Label>> = rows.iter().filter(|r| r[x] == y).cloned().collect();
                        (!sub.is_empty()).then(|| (pred != y) as u32 + brute(&sub, rest, k))
                    })
                    .max()
                    .unwrap()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn fixed_sequence_examples() {
        let b = Budget::default();
        let t3 = zoo::thresholds(3).unwrap();
        assert_eq!(fixed_sequence_value(&t3, &[1, 2, 0], &b).unwrap(), 2);
        let c3 = zoo::full_cube(3).unwrap();
        assert_eq!(fixed_sequence_value(&c3, &[0, 1, 2], &b).unwrap(), 3);
        assert_eq!(fixed_sequence_value(&c3, &[], &b).unwrap(), 0);
    }

    #[test]
    fn matches_brute_force() {
        let b = Budget::default();
        for seed in 0..40u64 {
            let k = 2 + (seed % 2) as usize;
            let c = zoo::random_class(4, k, 2 + (seed as usize * 3) % 12, seed).unwrap();
            let rows = c.sorted_rows();
            for seq in [vec![0, 1, 2, 3], vec![3, 1, 0], vec![2, 2, 1]] {
                assert_eq!(
                    fixed_sequence_value(&c, &seq, &b).unwrap(),
                    brute(&rows, &seq, k as Label),
                    "seed {seed} seq {seq:?}"
                );
            }
        }
    }

    #[test]
    fn repeats_never_raise_the_value() {
        let b = Budget::default();
        for seed in 0..40u64 {
            let c = zoo::random_class(4, 2, 1 + (seed as usize * 5) % 16, seed).unwrap();
            let base = fixed_sequence_value(&c, &[0, 1, 2, 3], &b).unwrap();
            for pos in 0..=4 {
                for rep in 0..4 {
                    let mut s = vec![0, 1, 2, 3];
                    // a repeat inserted after its first occurrence
                    if pos <= rep {
                        continue;
                    }
                    s.insert(pos, rep);
                    assert!(fixed_sequence_value(&c, &s, &b).unwrap() <= base);
                }
            }
        }
    }

    #[test]
    fn transductive_examples() {
        let b = Budget::default();
        let c3 = zoo::full_cube(3).unwrap();
        assert_eq!(transductive_value(&c3, 5, &b).unwrap().value, 3);
        let t3 = zoo::thresholds(3).unwrap();
        let v = transductive_value(&t3, 3, &b).unwrap();
        assert_eq!(v.value, 2);
        assert_eq!(fixed_sequence_value(&t3, &v.sequence, &b).unwrap(), 2);
        assert_eq!(transductive_value(&t3, 0, &b).unwrap().value, 0);
    }

    #[test]
    fn transductive_equals_max_over_all_orders() {
        let b = Budget::default();
        for seed in 0..20u64 {
            let c = zoo::random_class(4, 2, 2 + seed as usize % 14, seed).unwrap();
            let exhaustive = distinct_tuples(4, 4)
                .iter()
                .map(|s| fixed_sequence_value(&c, s, &b).unwrap())
                .max()
                .unwrap();
            assert_eq!(transductive_value(&c, 4, &b).unwrap().value, exhaustive);
        }
    }

    #[test]
    fn cube_automorphisms_are_all_permutations() {
        assert_eq!(domain_automorphisms(&zoo::full_cube(3).unwrap()).len(), 6);
        assert_eq!(domain_automorphisms(&zoo::thresholds(3).unwrap()).len(), 1);
    }

    #[test]
    fn sequence_budget_is_enforced() {
        let b = Budget {
            max_sequences: 10,
            ..Budget::default()
        };
        let c = zoo::full_cube(4).unwrap();
        assert!(matches!(
            transductive_value(&c, 4, &b),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
