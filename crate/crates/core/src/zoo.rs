//! Generators for the named hypothesis classes.
//!
//! Index conventions (instances and labels are 0-based everywhere):
//!
//! * `thresholds(N)`: instance `j` is `x_{j+1}`; row `i` is `h_i` with
//!   `h_i(x_{j+1}) = 1` iff `j + 1 <= i`, for `i = 0..=N`.
//! * `full_cube(m)`, `multiclass_cube(m, k)`: all `k^m` rows in
//!   lexicographic order.
//! * `singleton(m)`: the all-zero function on `m` instances.
//! * `tree_cube(d)`: instances are tree nodes in breadth-first order,
//!   hypotheses are branches (see [`crate::hypothesis::tree_cube`]).
//! * `ds_claim(n)`: instance `l` is tree depth `l` (`0..=n`); hypothesis `u`
//!   is a branch of the depth-`n` tree and maps depth `l` to the label of the
//!   edge it takes there. The edge leaving node `v` towards child `b` has
//!   label `2 * bfs(v) + b`.
//! * `g_truncation(i_max)`: instances are the nodes of the depth-`i_max`
//!   tree. For every `i` in `1..=i_max` and branch `j` of the top `i + 1`
//!   levels, the hypothesis follows branch `j` there and is `0` elsewhere,
//!   with its bit tagged as label `offset(i) + 2j + bit`.
//! * `random(m, k, H, seed)`: `H` distinct rows drawn without replacement,
//!   sorted lexicographically.

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Label, DEFAULT_MATERIALIZE_LIMIT};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt;

pub fn thresholds(n: usize) -> Result<HypothesisClass> {
    if n == 0 {
        return Err(Error::contract("thresholds(N) needs N >= 1"));
    }
    let rows = (0..=n)
        .map(|i| (0..n).map(|j| (j < i) as Label).collect())
        .collect();
    HypothesisClass::from_distinct_rows(n, 2, rows)
}

pub fn full_cube(m: usize) -> Result<HypothesisClass> {
    multiclass_cube(m, 2)
}

fn cube_size(m: usize, k: usize) -> Option<u64> {
    (k as u64).checked_pow(u32::try_from(m).ok()?)
}

fn decode(mut code: u64, m: usize, k: usize) -> Vec<Label> {
    let mut row = vec![0; m];
    for slot in row.iter_mut().rev() {
        *slot = (code % k as u64) as Label;
        code /= k as u64;
    }
    row
}

pub fn multiclass_cube(m: usize, k: usize) -> Result<HypothesisClass> {
    if m == 0 || k < 2 {
        return Err(Error::contract("multiclass_cube needs m >= 1 and k >= 2"));
    }
    let size = cube_size(m, k).unwrap_or(u64::MAX);
    if size > DEFAULT_MATERIALIZE_LIMIT {
        return Err(Error::budget("cube hypotheses", size, DEFAULT_MATERIALIZE_LIMIT));
    }
    let rows = (0..size).map(|c| decode(c, m, k)).collect();
    HypothesisClass::from_distinct_rows(m, k, rows)
}

pub fn singleton(m: usize) -> Result<HypothesisClass> {
    if m == 0 {
        return Err(Error::contract("singleton needs a nonempty domain"));
    }
    HypothesisClass::from_distinct_rows(m, 2, vec![vec![0; m]])
}

pub fn tree_cube(d: u32) -> Result<HypothesisClass> {
    HypothesisClass::tree_cube(d)
}

/// Number of labels used by [`ds_claim`]: two per node of the depth-`n` tree.
pub fn ds_claim_label_count(n: usize) -> usize {
    (1usize << (n + 2)) - 2
}

pub fn ds_claim(n: usize) -> Result<HypothesisClass> {
    if n == 0 {
        return Err(Error::contract("ds_claim(n) needs n >= 1"));
    }
    if n > 16 {
        return Err(Error::budget("ds_claim depth", n as u64, 16));
    }
    let width = n + 1;
    let rows = (0..1u64 << width)
        .map(|u| {
            (0..width)
                .map(|l| {
                    // node at depth l on branch u, and the bit taken there
                    let node_bits = u >> (width - l);
                    let bfs = (1u64 << l) - 1 + node_bits;
                    let bit = (u >> (width - 1 - l)) & 1;
                    (2 * bfs + bit) as Label
                })
                .collect()
        })
        .collect();
    HypothesisClass::from_distinct_rows(width, ds_claim_label_count(n), rows)
}

fn g_offset(i: usize) -> usize {
    // labels used by levels 1..i: sum of 2 * 2^(i'+1)
    (1..i).map(|l| 1usize << (l + 2)).sum()
}

pub fn g_truncation(i_max: usize) -> Result<HypothesisClass> {
    if i_max == 0 {
        return Err(Error::contract("g_truncation needs i_max >= 1"));
    }
    if i_max > 10 {
        return Err(Error::budget("g_truncation depth", i_max as u64, 10));
    }
    let nodes = (1usize << (i_max + 1)) - 1;
    let mut rows = Vec::new();
    for i in 1..=i_max {
        let cube = crate::hypothesis::TreeCube::new(i as u32)?;
        for j in 0..cube.branch_count() {
            let row = (0..nodes)
                .map(|x| {
                    let bit = if (x as u64) < cube.node_count() {
                        cube.evaluate(j, x as u64) as usize
                    } else {
                        0
                    };
                    (g_offset(i) + 2 * j as usize + bit) as Label
                })
                .collect();
            rows.push(row);
        }
    }
    HypothesisClass::from_distinct_rows(nodes, g_offset(i_max + 1), rows)
}

pub fn random_class(m: usize, k: usize, size: usize, seed: u64) -> Result<HypothesisClass> {
    if m == 0 || k < 2 || size == 0 {
        return Err(Error::contract("random_class needs m >= 1, k >= 2, H >= 1"));
    }
    let total = cube_size(m, k);
    if total.is_some_and(|t| (size as u64) > t) {
        return Err(Error::contract(format!("cannot draw {size} distinct rows from {k}^{m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<Label>> = match total {
        Some(t) if t <= u32::MAX as u64 => index::sample(&mut rng, t as usize, size)
            .into_iter()
            .map(|c| decode(c as u64, m, k))
            .collect(),
        _ => {
            use rand::Rng;
            let mut seen = HashSet::new();
            while seen.len() < size {
                let row: Vec<Label> = (0..m).map(|_| rng.gen_range(0..k as Label)).collect();
                seen.insert(row);
            }
            seen.into_iter().collect()
        }
    };
    rows.sort();
    HypothesisClass::from_distinct_rows(m, k, rows)
}

/// A named, parameterized class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    Thresholds(usize),
    FullCube(usize),
    MulticlassCube { m: usize, k: usize },
    Singleton(usize),
    TreeCube(u32),
    DsClaim(usize),
    GTruncation(usize),
    Random { m: usize, k: usize, size: usize, seed: u64 },
}

impl ClassSpec {
    /// Build from a family name and its integer parameters.
    pub fn parse(family: &str, params: &[usize], seed: u64) -> Result<ClassSpec> {
        let need = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::contract(format!(
                    "family `{family}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        Ok(match family {
            "thresholds" => {
                need(1)?;
                ClassSpec::Thresholds(params[0])
            }
            "full_cube" | "cube" => {
                need(1)?;
                ClassSpec::FullCube(params[0])
            }
            "multiclass_cube" => {
                need(2)?;
                ClassSpec::MulticlassCube {
                    m: params[0],
                    k: params[1],
                }
            }
            "singleton" => {
                if params.is_empty() {
                    ClassSpec::Singleton(1)
                } else {
                    need(1)?;
                    ClassSpec::Singleton(params[0])
                }
            }
            "tree_cube" => {
                need(1)?;
                ClassSpec::TreeCube(params[0] as u32)
            }
            "ds_claim" => {
                need(1)?;
                ClassSpec::DsClaim(params[0])
            }
            "g_truncation" => {
                need(1)?;
                ClassSpec::GTruncation(params[0])
            }
            "random" => {
                need(3)?;
                ClassSpec::Random {
                    m: params[0],
                    k: params[1],
                    size: params[2],
                    seed,
                }
            }
            other => return Err(Error::contract(format!("unknown family `{other}`"))),
        })
    }

    pub fn build(&self) -> Result<HypothesisClass> {
        match *self {
            ClassSpec::Thresholds(n) => thresholds(n),
            ClassSpec::FullCube(m) => full_cube(m),
            ClassSpec::MulticlassCube { m, k } => multiclass_cube(m, k),
            ClassSpec::Singleton(m) => singleton(m),
            ClassSpec::TreeCube(d) => tree_cube(d),
            ClassSpec::DsClaim(n) => ds_claim(n),
            ClassSpec::GTruncation(i) => g_truncation(i),
            ClassSpec::Random { m, k, size, seed } => random_class(m, k, size, seed),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ClassSpec::Thresholds(_) => "thresholds",
            ClassSpec::FullCube(_) => "full_cube",
            ClassSpec::MulticlassCube { .. } => "multiclass_cube",
            ClassSpec::Singleton(_) => "singleton",
            ClassSpec::TreeCube(_) => "tree_cube",
            ClassSpec::DsClaim(_) => "ds_claim",
            ClassSpec::GTruncation(_) => "g_truncation",
            ClassSpec::Random { .. } => "random",
        }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, ClassSpec::TreeCube(_))
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSpec::Thresholds(n) => write!(f, "thresholds({n})"),
            ClassSpec::FullCube(m) => write!(f, "full_cube({m})"),
            ClassSpec::MulticlassCube { m, k } => write!(f, "multiclass_cube({m},{k})"),
            ClassSpec::Singleton(m) => write!(f, "singleton({m})"),
            ClassSpec::TreeCube(d) => write!(f, "tree_cube({d})"),
            ClassSpec::DsClaim(n) => write!(f, "ds_claim({n})"),
            ClassSpec::GTruncation(i) => write!(f, "g_truncation({i})"),
            ClassSpec::Random { m, k, size, seed } => write!(f, "random({m},{k},{size};seed={seed})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_rows() {
        let t = thresholds(1).unwrap();
        assert_eq!(t.sorted_rows(), vec![vec![0], vec![1]]);
        let t = thresholds(3).unwrap();
        assert_eq!(t.row(2), vec![1, 1, 0]);
        assert!(thresholds(0).is_err());
    }

    #[test]
    fn cubes() {
        assert_eq!(full_cube(1).unwrap().hypothesis_count(), 2);
        assert_eq!(multiclass_cube(2, 3).unwrap().hypothesis_count(), 9);
        assert!(matches!(full_cube(40), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn ds_claim_labels() {
        let c = ds_claim(1).unwrap();
        assert_eq!(c.label_count(), 6);
        assert_eq!(c.hypothesis_count(), 4);
        // every edge label is used
        let used: HashSet<Label> = (0..4).flat_map(|h| c.row(h)).collect();
        assert_eq!(used.len(), 6);
        // branch 10: root right edge (label 1), then left edge below node 2 (label 4)
        assert_eq!(c.row(0b10), vec![1, 4]);
    }

    #[test]
    fn g_truncation_one_label_identifies() {
        let g = g_truncation(1).unwrap();
        let full = g.full_space();
        for x in 0..g.domain_size() {
            for (_, vs) in full.split(x) {
                assert_eq!(vs.len(), 1);
            }
        }
    }

    #[test]
    fn random_is_deterministic_and_complete() {
        let a = random_class(4, 2, 6, 1).unwrap();
        let b = random_class(4, 2, 6, 1).unwrap();
        assert_eq!(a.sorted_rows(), b.sorted_rows());
        assert_eq!(a.hypothesis_count(), 6);
        let all = random_class(3, 3, 27, 9).unwrap();
        assert_eq!(all, multiclass_cube(3, 3).unwrap());
        assert!(random_class(2, 2, 5, 0).is_err());
    }

    #[test]
    fn spec_parsing() {
        let s = ClassSpec::parse("thresholds", &[5], 0).unwrap();
        assert_eq!(s, ClassSpec::Thresholds(5));
        assert_eq!(s.to_string(), "thresholds(5)");
        assert!(ClassSpec::parse("nope", &[], 0).is_err());
        assert!(ClassSpec::parse("random", &[1], 0).is_err());
    }
}
