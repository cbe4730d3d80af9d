//! VC and Natarajan dimensions by level-wise search over instance sets.
//!
//! Both shattering notions are closed under taking subsets, so the sets of
//! size `s + 1` worth testing all extend a shattered set of size `s`.

use super::Budget;
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label};
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShatteredSet {
    pub set: Vec<Instance>,
}

impl ShatteredSet {
    pub fn dim(&self) -> u32 {
        self.set.len() as u32
    }

    /// Every one of the `2^d` patterns is realized by some hypothesis.
    pub fn verify(&self, class: &HypothesisClass) -> bool {
        let d = self.set.len();
        if d > 24 || self.set.iter().any(|&x| x >= class.domain_size()) {
            return false;
        }
        let full = class.full_space();
        (0..1u64 << d).all(|pattern| {
            let pairs: Vec<_> = self
                .set
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, ((pattern >> i) & 1) as Label))
                .collect();
            full.filter_all(&pairs).map(|v| !v.is_empty()).unwrap_or(false)
        })
    }
}

impl fmt::Display for ShatteredSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "shattered set {:?}", self.set)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatarajanWitness {
    pub set: Vec<Instance>,
    /// `f0[i]`, `f1[i]` are the two labels at `set[i]`.
    pub f0: Vec<Label>,
    pub f1: Vec<Label>,
}

impl NatarajanWitness {
    pub fn dim(&self) -> u32 {
        self.set.len() as u32
    }

    pub fn verify(&self, class: &HypothesisClass) -> bool {
        let d = self.set.len();
        if d > 24
            || self.f0.len() != d
            || self.f1.len() != d
            || self.f0.iter().zip(&self.f1).any(|(a, b)| a == b)
            || self.set.iter().any(|&x| x >= class.domain_size())
        {
            return false;
        }
        let full = class.full_space();
        (0..1u64 << d).all(|subset| {
            let pairs: Vec<_> = (0..d)
                .map(|i| {
                    let y = if (subset >> i) & 1 == 1 { self.f1[i] } else { self.f0[i] };
                    (self.set[i], y)
                })
                .collect();
            full.filter_all(&pairs).map(|v| !v.is_empty()).unwrap_or(false)
        })
    }
}

impl fmt::Display for NatarajanWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "natarajan set {:?} f0 {:?} f1 {:?}", self.set, self.f0, self.f1)
    }
}

fn rows(class: &HypothesisClass) -> Vec<Vec<Label>> {
    (0..class.hypothesis_count()).map(|h| class.row(h)).collect()
}

/// Largest shattered set; the lexicographically first one of that size.
pub fn vc_dim(class: &HypothesisClass, budget: &Budget) -> Result<ShatteredSet> {
    if !class.is_binary() {
        return Err(Error::NotBinary(class.label_count()));
    }
    let class = budget.explicit(class)?;
    let rows = rows(&class);
    let m = class.domain_size();
    let mut level: Vec<Vec<Instance>> = vec![vec![]];
    loop {
        let mut next = Vec::new();
        for s in &level {
            let start = s.last().map_or(0, |&l| l + 1);
            for x in start..m {
                let mut cand = s.clone();
                cand.push(x);
                if rows.len() < 1 << cand.len() {
                    continue;
                }
                let patterns: HashSet<Vec<Label>> = rows
                    .iter()
                    .map(|r| cand.iter().map(|&i| r[i]).collect())
                    .collect();
                if patterns.len() == 1 << cand.len() {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            return Ok(ShatteredSet {
                set: level.swap_remove(0),
            });
        }
        level = next;
    }
}

// Pick an unordered label pair per coordinate so that every combination of
// the chosen pairs occurs among `patterns`.
fn natarajan_pairs(patterns: &[Vec<Label>], d: usize) -> Option<(Vec<Label>, Vec<Label>)> {
    fn go(
        patterns: &[&Vec<Label>],
        i: usize,
        d: usize,
        chosen: &mut Vec<(Label, Label)>,
    ) -> bool {
        if i == d {
            return true;
        }
        let mut labels: Vec<Label> = patterns.iter().map(|p| p[i]).collect();
        labels.sort_unstable();
        labels.dedup();
        for (ai, &a) in labels.iter().enumerate() {
            for &b in &labels[ai + 1..] {
                let keep: Vec<&Vec<Label>> = patterns
                    .iter()
                    .copied()
                    .filter(|p| p[i] == a || p[i] == b)
                    .collect();
                let prefixes: HashSet<&[Label]> = keep.iter().map(|p| &p[..=i]).collect();
                if prefixes.len() < 1 << (i + 1) {
                    continue;
                }
                chosen.push((a, b));
                if go(&keep, i + 1, d, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    // only patterns inside the product of earlier choices are kept, so the
    // prefix count equals the number of covered combinations
    let refs: Vec<&Vec<Label>> = patterns.iter().collect();
    let mut chosen = Vec::new();
    go(&refs, 0, d, &mut chosen).then(|| chosen.into_iter().unzip())
}

pub fn natarajan_dim(class: &HypothesisClass, budget: &Budget) -> Result<NatarajanWitness> {
    let class = budget.explicit(class)?;
    let rows = rows(&class);
    let m = class.domain_size();
    let mut level: Vec<NatarajanWitness> = vec![NatarajanWitness {
        set: vec![],
        f0: vec![],
        f1: vec![],
    }];
    loop {
        let mut next = Vec::new();
        for w in &level {
            let start = w.set.last().map_or(0, |&l| l + 1);
            for x in start..m {
                let mut cand = w.set.clone();
                cand.push(x);
                if rows.len() < 1 << cand.len() {
                    continue;
                }
                let patterns: HashSet<Vec<Label>> = rows
                    .iter()
                    .map(|r| cand.iter().map(|&i| r[i]).collect())
                    .collect();
                let mut patterns: Vec<Vec<Label>> = patterns.into_iter().collect();
                patterns.sort();
                if let Some((f0, f1)) = natarajan_pairs(&patterns, cand.len()) {
                    next.push(NatarajanWitness { set: cand, f0, f1 });
                }
            }
        }
        if next.is_empty() {
            return Ok(level.swap_remove(0));
        }
        level = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn vc_examples() {
        let b = Budget::default();
        assert_eq!(vc_dim(&zoo::full_cube(3).unwrap(), &b).unwrap().dim(), 3);
        let t = vc_dim(&zoo::thresholds(5).unwrap(), &b).unwrap();
        assert_eq!(t.set, vec![0]);
        assert!(t.verify(&zoo::thresholds(5).unwrap()));
        assert_eq!(vc_dim(&zoo::singleton(4).unwrap(), &b).unwrap().dim(), 0);
        assert!(matches!(
            vc_dim(&zoo::multiclass_cube(2, 3).unwrap(), &b),
            Err(Error::NotBinary(3))
        ));
    }

    #[test]
    fn natarajan_examples() {
        let b = Budget::default();
        let c = zoo::multiclass_cube(2, 3).unwrap();
        let w = natarajan_dim(&c, &b).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.verify(&c));
        assert_eq!(natarajan_dim(&zoo::singleton(3).unwrap(), &b).unwrap().dim(), 0);
        let ds = zoo::ds_claim(2).unwrap();
        let w = natarajan_dim(&ds, &b).unwrap();
        assert!(w.verify(&ds));
    }

    #[test]
    fn natarajan_equals_vc_on_binary() {
        let b = Budget::default();
        for seed in 0..30 {
            let c = zoo::random_class(5, 2, 1 + (seed as usize * 7) % 32, seed).unwrap();
            assert_eq!(
                natarajan_dim(&c, &b).unwrap().dim(),
                vc_dim(&c, &b).unwrap().dim()
            );
        }
    }
}
