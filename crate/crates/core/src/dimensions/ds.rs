//! DS dimension and pseudocube detection.

use super::Budget;
use crate::error::Result;
use crate::hypothesis::{HypothesisClass, Instance, Label};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsWitness {
    pub tuple: Vec<Instance>,
    pub pseudocube: Vec<Vec<Label>>,
}

impl DsWitness {
    pub fn dim(&self) -> u32 {
        self.tuple.len() as u32
    }

    /// The pseudocube lies inside `H|tuple` and satisfies the neighbor condition.
    pub fn verify(&self, class: &HypothesisClass) -> bool {
        let d = self.tuple.len();
        if d == 0 {
            return self.pseudocube.is_empty();
        }
        if self.tuple.iter().any(|&x| x >= class.domain_size()) {
            return false;
        }
        let projected: HashSet<Vec<Label>> = (0..class.hypothesis_count())
            .map(|h| self.tuple.iter().map(|&x| class.at(h, x)).collect())
            .collect();
        self.pseudocube.iter().all(|v| projected.contains(v)) && is_pseudocube(&self.pseudocube, d)
    }
}

impl fmt::Display for DsWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ds tuple {:?} pseudocube {:?}", self.tuple, self.pseudocube)
    }
}

/// Every vector has, for every coordinate, a member differing exactly there.
pub fn is_pseudocube(vectors: &[Vec<Label>], d: usize) -> bool {
    if vectors.is_empty() || vectors.iter().any(|v| v.len() != d) {
        return false;
    }
    vectors.iter().all(|y| {
        (0..d).all(|i| {
            vectors
                .iter()
                .any(|z| z[i] != y[i] && (0..d).all(|j| j == i || z[j] == y[j]))
        })
    })
}

/// Delete vectors that lack an `i`-neighbor until nothing changes; returns
/// whether anything survives, and the survivors (sorted).
pub fn has_pseudocube(vectors: &[Vec<Label>], d: usize) -> (bool, Vec<Vec<Label>>) {
    let mut alive: HashSet<Vec<Label>> = vectors.iter().filter(|v| v.len() == d).cloned().collect();
    if d == 0 {
        return (false, Vec::new());
    }
    loop {
        // vectors with coordinate i blanked, counted per class
        let mut groups: HashMap<(usize, Vec<Label>), usize> = HashMap::new();
        for v in &alive {
            for i in 0..d {
                let mut key = v.clone();
                key[i] = Label::MAX;
                *groups.entry((i, key)).or_default() += 1;
            }
        }
        let before = alive.len();
        alive.retain(|v| {
            (0..d).all(|i| {
                let mut key = v.clone();
                key[i] = Label::MAX;
                groups[&(i, key)] >= 2
            })
        });
        if alive.len() == before {
            break;
        }
    }
    let mut out: Vec<Vec<Label>> = alive.into_iter().collect();
    out.sort();
    (!out.is_empty(), out)
}

fn combinations(m: usize, d: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if d > m {
        return;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        if f(&idx) {
            return;
        }
        let Some(i) = (0..d).rev().find(|&i| idx[i] < i + m - d) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest `d` such that some set of `d` distinct instances carries a
/// `d`-pseudocube in its projection. Projections of pseudocubes are
/// pseudocubes, so the search stops at the first size with none.
pub fn ds_dim(class: &HypothesisClass, budget: &Budget) -> Result<DsWitness> {
    let class = budget.explicit(class)?;
    let rows: Vec<Vec<Label>> = (0..class.hypothesis_count()).map(|h| class.row(h)).collect();
    let m = class.domain_size();
    let mut best = DsWitness {
        tuple: vec![],
        pseudocube: vec![],
    };
    for d in 1..=m {
        let mut found = None;
        combinations(m, d, |tuple| {
            let projected: HashSet<Vec<Label>> = rows
                .iter()
                .map(|r| tuple.iter().map(|&x| r[x]).collect())
                .collect();
            let projected: Vec<Vec<Label>> = projected.into_iter().collect();
            let (ok, survivors) = has_pseudocube(&projected, d);
            if ok {
                found = Some(DsWitness {
                    tuple: tuple.to_vec(),
                    pseudocube: survivors,
                });
            }
            ok
        });
        match found {
            Some(w) => best = w,
            None => break,
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn pseudocube_examples() {
        let cube = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let (ok, s) = has_pseudocube(&cube, 2);
        assert!(ok);
        assert_eq!(s, cube);
        assert!(!has_pseudocube(&[vec![0, 0]], 2).0);
        assert!(!has_pseudocube(&[vec![0, 0], vec![1, 0], vec![0, 1]], 2).0);
    }

    #[test]
    fn survivors_are_pseudocubes() {
        let vs = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
            vec![2, 2],
            vec![2, 0],
        ];
        let (ok, s) = has_pseudocube(&vs, 2);
        assert!(ok);
        assert!(is_pseudocube(&s, 2));
        // (2,0) loses its only 1-neighbor once (2,2) is pruned
        assert_eq!(s, vs[..4].to_vec());
    }

    #[test]
    fn ds_examples() {
        let b = Budget::default();
        let w = ds_dim(&zoo::full_cube(2).unwrap(), &b).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.verify(&zoo::full_cube(2).unwrap()));
        assert_eq!(ds_dim(&zoo::singleton(3).unwrap(), &b).unwrap().dim(), 0);
        let c = zoo::ds_claim(3).unwrap();
        let w = ds_dim(&c, &b).unwrap();
        assert_eq!(w.dim(), 1);
        assert!(w.verify(&c));
    }

    #[test]
    fn combinations_in_lex_order() {
        let mut seen = Vec::new();
        combinations(4, 2, |t| {
            seen.push(t.to_vec());
            false
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
    }
}
