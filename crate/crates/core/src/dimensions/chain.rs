//! Threshold and multiclass threshold dimensions.
//!
//! A multiclass threshold chain of length `t` is a list of distinct
//! instances `x_1..x_t` and hypotheses `h_1..h_t` with row labels `y_i` and
//! column labels `y'_j` such that `h_i(x_j) = y_i` for `j ≤ i`,
//! `h_i(x_j) = y'_j` for `j > i`, and no row label equals a column label.
//! A threshold chain is the special case where every row label is one fixed
//! `inside` label and every column label one fixed `outside` label; binary
//! threshold dimension uses `inside = 1`, `outside = 0`.
//!
//! Both are found by the same depth-first search that appends one
//! `(x_t, h_t)` at a time: the new instance must receive a common value
//! from all earlier hypotheses, and the new hypothesis must be constant on
//! the chain so far together with the new instance.

use super::Budget;
use crate::bitset::HypSet;
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdWitness {
    pub instances: Vec<Instance>,
    pub hypotheses: Vec<u64>,
    /// Label of `h_i(x_j)` for `j ≤ i`.
    pub inside: Label,
    /// Label of `h_i(x_j)` for `j > i`.
    pub outside: Label,
}

impl ThresholdWitness {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn verify(&self, class: &HypothesisClass) -> bool {
        let t = self.len();
        if self.hypotheses.len() != t || (t > 0 && self.inside == self.outside) {
            return false;
        }
        if !distinct(&self.instances) || self.instances.iter().any(|&x| x >= class.domain_size()) {
            return false;
        }
        if self.hypotheses.iter().any(|&h| h >= class.hypothesis_count()) {
            return false;
        }
        (0..t).all(|i| {
            (0..t).all(|j| {
                let want = if j <= i { self.inside } else { self.outside };
                class.at(self.hypotheses[i], self.instances[j]) == want
            })
        })
    }

    /// Rewrite an `inside = 0, outside = 1` chain of length `t` in the
    /// binary orientation, which keeps `t - 1` rows.
    pub fn to_standard_binary(&self) -> Option<ThresholdWitness> {
        match (self.inside, self.outside) {
            (1, 0) => Some(self.clone()),
            (0, 1) => {
                let t = self.len();
                if t == 0 {
                    return Some(self.clone());
                }
                // x'_j = x_{t+1-j} for j < t, h'_c = h_{t-c}
                let instances = (1..t).map(|j| self.instances[t - j]).collect();
                let hypotheses = (1..t).map(|c| self.hypotheses[t - c - 1]).collect();
                Some(ThresholdWitness {
                    instances,
                    hypotheses,
                    inside: 1,
                    outside: 0,
                })
            }
            _ => None,
        }
    }
}

impl fmt::Display for ThresholdWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "threshold chain {:?} hypotheses {:?} labels ({}, {})",
            self.instances, self.hypotheses, self.inside, self.outside
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtdWitness {
    pub instances: Vec<Instance>,
    pub hypotheses: Vec<u64>,
    /// `y_i`
    pub rows: Vec<Label>,
    /// `y'_j`
    pub cols: Vec<Label>,
}

impl MtdWitness {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn verify(&self, class: &HypothesisClass) -> bool {
        let t = self.len();
        if self.hypotheses.len() != t || self.rows.len() != t || self.cols.len() != t {
            return false;
        }
        if !distinct(&self.instances) || self.instances.iter().any(|&x| x >= class.domain_size()) {
            return false;
        }
        if self.hypotheses.iter().any(|&h| h >= class.hypothesis_count()) {
            return false;
        }
        let k = class.label_count() as Label;
        if self.rows.iter().chain(&self.cols).any(|&y| y >= k) {
            return false;
        }
        if self.rows.iter().any(|y| self.cols.contains(y)) {
            return false;
        }
        (0..t).all(|i| {
            (0..t).all(|j| {
                let want = if j <= i { self.rows[i] } else { self.cols[j] };
                class.at(self.hypotheses[i], self.instances[j]) == want
            })
        })
    }
}

impl fmt::Display for MtdWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mtd chain {:?} hypotheses {:?} rows {:?} cols {:?}",
            self.instances, self.hypotheses, self.rows, self.cols
        )
    }
}

fn distinct(xs: &[Instance]) -> bool {
    let set: HashSet<_> = xs.iter().collect();
    set.len() == xs.len()
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    Pair { inside: Label, outside: Label },
    Free,
}

/// Common value of the chain's hypotheses on an unused instance.
const DISAGREE: Label = Label::MAX;
const UNCONSTRAINED: Label = Label::MAX - 1;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    used: u64,
    rows: u64,
    cols: u64,
    profile: Vec<Label>,
}

struct Step {
    x: Instance,
    h: u64,
    y: Label,
    c: Label,
    next: Key,
}

struct Search<'a> {
    class: &'a HypothesisClass,
    mode: Mode,
    memo: HashMap<Key, u32>,
    max_states: u64,
    limit: u32,
}

impl Search<'_> {
    fn new<'c>(class: &'c HypothesisClass, mode: Mode, budget: &Budget) -> Search<'c> {
        let limit = class.domain_size().min(class.hypothesis_count() as usize) as u32;
        Search {
            class,
            mode,
            memo: HashMap::new(),
            max_states: budget.max_states,
            limit,
        }
    }

    fn root(&self) -> Key {
        Key {
            used: 0,
            rows: 0,
            cols: 0,
            profile: vec![UNCONSTRAINED; self.class.domain_size()],
        }
    }

    // Hypotheses that equal `y` on every used instance and on `x`.
    fn constant_on(&self, used: u64, x: Instance, y: Label) -> Option<HypSet> {
        let mut set = self.class.label_mask(x, y)?.clone();
        for z in iter_bits(used) {
            set = set.intersection(self.class.label_mask(z, y)?);
            if set.is_empty() {
                return None;
            }
        }
        Some(set)
    }

    /// Successor states in tie-break order, one per distinct effect.
    fn steps(&self, key: &Key) -> Vec<Step> {
        let class = self.class;
        let m = class.domain_size();
        let first = key.used == 0;
        let mut out = Vec::new();
        for x in 0..m {
            if key.used >> x & 1 == 1 {
                continue;
            }
            let c = key.profile[x];
            if c == DISAGREE {
                continue;
            }
            if !first {
                match self.mode {
                    Mode::Pair { outside, .. } if c != outside => continue,
                    Mode::Free if key.rows >> c & 1 == 1 => continue,
                    _ => {}
                }
            }
            let free = matches!(self.mode, Mode::Free);
            let cols = if first || !free { key.cols } else { key.cols | 1 << c };
            let used = key.used | 1 << x;
            let labels: Vec<Label> = match self.mode {
                Mode::Pair { inside, .. } => vec![inside],
                Mode::Free => (0..class.label_count() as Label)
                    .filter(|&y| cols >> y & 1 == 0 && (first || y != c))
                    .collect(),
            };
            for y in labels {
                let Some(cands) = self.constant_on(key.used, x, y) else {
                    continue;
                };
                let mut seen = HashSet::new();
                for h in cands.iter() {
                    let profile: Vec<Label> = (0..m)
                        .map(|z| {
                            if used >> z & 1 == 1 {
                                0
                            } else {
                                let v = class.at(h as u64, z);
                                match key.profile[z] {
                                    UNCONSTRAINED => v,
                                    p if p == v => v,
                                    _ => DISAGREE,
                                }
                            }
                        })
                        .collect();
                    if !seen.insert(profile.clone()) {
                        continue;
                    }
                    out.push(Step {
                        x,
                        h: h as u64,
                        y,
                        c,
                        next: Key {
                            used,
                            rows: if free { key.rows | 1 << y } else { 0 },
                            cols,
                            profile,
                        },
                    });
                }
            }
        }
        out
    }

    /// Longest extension of the chain described by `key`.
    fn best(&mut self, key: &Key, depth: u32) -> Result<u32> {
        if let Some(&v) = self.memo.get(key) {
            return Ok(v);
        }
        let cap = self.limit - depth;
        let mut best = 0;
        if cap > 0 {
            for s in self.steps(key) {
                let v = 1 + self.best(&s.next, depth + 1)?;
                best = best.max(v);
                if best == cap {
                    break;
                }
            }
        }
        if self.memo.len() as u64 >= self.max_states {
            return Err(Error::budget("chain search states", self.memo.len() as u64, self.max_states));
        }
        self.memo.insert(key.clone(), best);
        Ok(best)
    }

    fn run(&mut self) -> Result<Vec<Step>> {
        let mut key = self.root();
        let mut want = self.best(&key, 0)?;
        let mut chain = Vec::new();
        let mut depth = 0;
        while want > 0 {
            let mut found = None;
            for s in self.steps(&key) {
                if 1 + self.best(&s.next, depth + 1)? == want {
                    found = Some(s);
                    break;
                }
            }
            let s = found.ok_or_else(|| Error::contract("chain replay lost the optimum"))?;
            key = s.next.clone();
            chain.push(s);
            want -= 1;
            depth += 1;
        }
        Ok(chain)
    }
}

fn iter_bits(mut v: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if v == 0 {
            return None;
        }
        let i = v.trailing_zeros() as usize;
        v &= v - 1;
        Some(i)
    })
}

fn searchable(class: &HypothesisClass, budget: &Budget) -> Result<HypothesisClass> {
    let class = budget.explicit(class)?;
    if class.domain_size() > 64 {
        return Err(Error::budget("domain size for chain search", class.domain_size() as u64, 64));
    }
    Ok(class)
}

/// Longest threshold chain with the given label pair.
pub fn threshold_dim_for_pair(
    class: &HypothesisClass,
    inside: Label,
    outside: Label,
    budget: &Budget,
) -> Result<ThresholdWitness> {
    if inside == outside {
        return Err(Error::contract("threshold labels must differ"));
    }
    class.check_label(inside)?;
    class.check_label(outside)?;
    let explicit = searchable(class, budget)?;
    let chain = Search::new(&explicit, Mode::Pair { inside, outside }, budget).run()?;
    Ok(ThresholdWitness {
        instances: chain.iter().map(|s| s.x).collect(),
        hypotheses: chain.iter().map(|s| s.h).collect(),
        inside,
        outside,
    })
}

/// Threshold dimension: labels `(1, 0)` for binary classes, otherwise the
/// best ordered pair of distinct labels (lowest pair on ties).
pub fn threshold_dim(class: &HypothesisClass, budget: &Budget) -> Result<ThresholdWitness> {
    if class.is_binary() {
        return threshold_dim_for_pair(class, 1, 0, budget);
    }
    let k = class.label_count() as Label;
    let mut best: Option<ThresholdWitness> = None;
    for inside in 0..k {
        for outside in 0..k {
            if inside == outside {
                continue;
            }
            let w = threshold_dim_for_pair(class, inside, outside, budget)?;
            if best.as_ref().is_none_or(|b| w.len() > b.len()) {
                best = Some(w);
            }
        }
    }
    Ok(best.expect("k >= 2"))
}

/// Multiclass threshold dimension with a witness chain.
pub fn mtd(class: &HypothesisClass, budget: &Budget) -> Result<MtdWitness> {
    if class.label_count() > 64 {
        return Err(Error::budget("label count for mtd", class.label_count() as u64, 64));
    }
    let explicit = searchable(class, budget)?;
    let chain = Search::new(&explicit, Mode::Free, budget).run()?;
    let rows: Vec<Label> = chain.iter().map(|s| s.y).collect();
    // y'_1 never appears in the table; any label outside the rows will do
    let first_col = (0..class.label_count() as Label)
        .find(|y| !rows.contains(y))
        .unwrap_or(0);
    let cols = chain
        .iter()
        .enumerate()
        .map(|(j, s)| if j == 0 { first_col } else { s.c })
        .collect();
    Ok(MtdWitness {
        instances: chain.iter().map(|s| s.x).collect(),
        hypotheses: chain.iter().map(|s| s.h).collect(),
        rows,
        cols,
    })
}

/// Pigeonhole a multiclass chain of length `t` over `k` labels down to a
/// threshold chain of length at least `⌊t / k²⌋`: keep the most common row
/// label, then among those the most common column label.
pub fn mtd_to_threshold_extract(
    class: &HypothesisClass,
    w: &MtdWitness,
) -> Result<ThresholdWitness> {
    if !w.verify(class) {
        return Err(Error::contract("input is not a valid multiclass threshold chain"));
    }
    if w.is_empty() {
        return Ok(ThresholdWitness {
            instances: vec![],
            hypotheses: vec![],
            inside: 1,
            outside: 0,
        });
    }
    let most_common = |items: &mut dyn Iterator<Item = Label>| -> Label {
        let mut counts: HashMap<Label, usize> = HashMap::new();
        for y in items {
            *counts.entry(y).or_default() += 1;
        }
        let top = counts.values().copied().max().unwrap_or(0);
        counts
            .into_iter()
            .filter(|&(_, n)| n == top)
            .map(|(y, _)| y)
            .min()
            .unwrap_or(0)
    };
    let a = most_common(&mut w.rows.iter().copied());
    let rows_a: Vec<usize> = (0..w.len()).filter(|&i| w.rows[i] == a).collect();
    let b = most_common(&mut rows_a.iter().map(|&i| w.cols[i]));
    let mut keep: Vec<usize> = rows_a.iter().copied().filter(|&i| w.cols[i] == b).collect();
    // the smallest kept index never acts as a column, so the first row with
    // label `a` can join regardless of its column label
    if rows_a[0] < keep[0] {
        keep.insert(0, rows_a[0]);
    }
    let out = ThresholdWitness {
        instances: keep.iter().map(|&i| w.instances[i]).collect(),
        hypotheses: keep.iter().map(|&i| w.hypotheses[i]).collect(),
        inside: a,
        outside: b,
    };
    debug_assert!(out.verify(class));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn b() -> Budget {
        Budget::default()
    }

    // Exhaustive check over ordered instance tuples and hypothesis tuples.
    fn brute_td(class: &HypothesisClass, inside: Label, outside: Label) -> usize {
        let m = class.domain_size();
        let n = class.hypothesis_count();
        let mut best = 0;
        fn extend(
            class: &HypothesisClass,
            xs: &mut Vec<usize>,
            hs: &mut Vec<u64>,
            inside: Label,
            outside: Label,
            best: &mut usize,
            m: usize,
            n: u64,
        ) {
            *best = (*best).max(xs.len());
            for x in 0..m {
                if xs.contains(&x) {
                    continue;
                }
                for h in 0..n {
                    xs.push(x);
                    hs.push(h);
                    let t = xs.len();
                    let ok = (0..t).all(|i| {
                        (0..t).all(|j| {
                            class.at(hs[i], xs[j]) == if j <= i { inside } else { outside }
                        })
                    });
                    if ok {
                        extend(class, xs, hs, inside, outside, best, m, n);
                    }
                    xs.pop();
                    hs.pop();
                }
            }
        }
        extend(class, &mut vec![], &mut vec![], inside, outside, &mut best, m, n);
        best
    }

    #[test]
    fn threshold_examples() {
        let t5 = zoo::thresholds(5).unwrap();
        let w = threshold_dim(&t5, &b()).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.verify(&t5));
        assert_eq!(threshold_dim(&zoo::full_cube(3).unwrap(), &b()).unwrap().len(), 3);
        assert_eq!(threshold_dim(&zoo::singleton(3).unwrap(), &b()).unwrap().len(), 0);
    }

    #[test]
    fn mtd_examples() {
        let c = zoo::full_cube(3).unwrap();
        let w = mtd(&c, &b()).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.verify(&c));
        let t5 = zoo::thresholds(5).unwrap();
        let w = mtd(&t5, &b()).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.verify(&t5));
        // a single hypothesis already forms a chain of length one
        let s = zoo::singleton(3).unwrap();
        let w = mtd(&s, &b()).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.verify(&s));
    }

    #[test]
    fn search_matches_brute_force() {
        for seed in 0..40u64 {
            let k = 2 + (seed % 2) as usize;
            let c = zoo::random_class(4, k, 2 + (seed as usize * 3) % 12, seed).unwrap();
            for inside in 0..k as Label {
                for outside in 0..k as Label {
                    if inside != outside {
                        let w = threshold_dim_for_pair(&c, inside, outside, &b()).unwrap();
                        assert!(w.verify(&c));
                        assert_eq!(w.len(), brute_td(&c, inside, outside), "seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn extraction_examples() {
        let t5 = zoo::thresholds(5).unwrap();
        let w = mtd(&t5, &b()).unwrap();
        let e = mtd_to_threshold_extract(&t5, &w).unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.verify(&t5));
        let c = zoo::multiclass_cube(3, 3).unwrap();
        let w = mtd(&c, &b()).unwrap();
        let e = mtd_to_threshold_extract(&c, &w).unwrap();
        assert!(e.verify(&c));
        assert!(e.len() >= w.len() / 9);
        let mut bad = w.clone();
        bad.rows[0] = bad.cols[1];
        assert!(mtd_to_threshold_extract(&c, &bad).is_err());
    }

    #[test]
    fn flipped_binary_chain_reorients() {
        let c = zoo::thresholds(4).unwrap();
        let w = threshold_dim_for_pair(&c, 0, 1, &b()).unwrap();
        assert!(w.verify(&c));
        let s = w.to_standard_binary().unwrap();
        assert_eq!(s.len(), w.len() - 1);
        assert!(s.verify(&c));
    }
}
