//! Multiclass threshold chains from shattered trees.
//!
//! Fix a hypothesis `h`, color the tree by `h`, and keep an
//! `h`-monochromatic complete subtree (color `y`). Its root `x` has an edge
//! label `y' ≠ y` on at least one side; the hypotheses that send `x` to `y'`
//! still shatter the part of the subtree on that side, so recursing there
//! and appending `(x, h)` with row label `y` and column label `y'` extends the
//! chain by one. Row and column labels have to stay disjoint across all
//! levels, so the choices of `h` and side are searched with backtracking.

use super::ramsey::{ceil_log2, ramsey_multi_color_on, whole_tree, Subtree};
use super::{shatters, LittlestoneTree};
use crate::dimensions::MtdWitness;
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label, VersionSpace};
use std::collections::HashSet;

/// `f_k(0) = 0`, `f_k(1) = 1`, `f_k(d) = 1 + f_k(⌈d / 2k⌉ - 1)`.
pub fn target_bound(k: usize, d: u32) -> u32 {
    match d {
        0 => 0,
        1 => 1,
        _ => {
            let next = (d as u64).div_ceil(2 * k as u64) as u32;
            1 + target_bound(k, next.saturating_sub(1))
        }
    }
}

/// Chain length this construction guarantees for a tree of depth `d`
/// (`d = -1` is the empty tree): the monochromatic subtree keeps
/// `⌈(d+1) / 2^⌈log2 k⌉⌉` levels, one of which is spent on the root.
pub fn mtd_tree_bound(k: usize, d: i64) -> u32 {
    if d < 0 {
        return 0;
    }
    let shrink = 1i64 << ceil_log2(k as u64);
    let levels = (d + 1 + shrink - 1) / shrink;
    if levels - 2 >= d {
        // only reachable when k = 1
        return (d + 1) as u32;
    }
    1 + mtd_tree_bound(k, levels - 2)
}

struct Link {
    x: Instance,
    h: u64,
    y: Label,
    y_col: Label,
}

struct Extractor<'a> {
    class: &'a HypothesisClass,
    tree: &'a LittlestoneTree,
    k: usize,
    visits: u64,
    max_visits: u64,
}

impl Extractor<'_> {
    fn search(&mut self, vs: &VersionSpace, sub: &Subtree, rows: u64, cols: u64) -> Result<Vec<Link>> {
        if sub.levels == 0 || vs.is_empty() {
            return Ok(Vec::new());
        }
        self.visits += 1;
        if self.visits > self.max_visits {
            return Err(Error::budget("tree extraction nodes", self.visits, self.max_visits));
        }
        let goal = mtd_tree_bound(self.k, sub.levels as i64 - 1) as usize;
        let mut best: Vec<Link> = Vec::new();
        let mut seen = HashSet::new();
        for h in vs.members() {
            let colors: Vec<Label> = sub
                .nodes
                .iter()
                .map(|&v| self.class.at(h, self.tree.instance(v)))
                .collect();
            if !seen.insert(colors) {
                continue;
            }
            let color = |v: usize| self.class.at(h, self.tree.instance(v));
            let mono = ramsey_multi_color_on(sub, self.k, &color);
            let Some(root) = mono.root() else { continue };
            let y = mono.color;
            if cols >> y & 1 == 1 {
                continue;
            }
            let x = self.tree.instance(root);
            let (y0, y1) = self.tree.edge_labels(root);
            for (side, y_col) in [(0usize, y0), (1, y1)] {
                if y_col == y || rows >> y_col & 1 == 1 || y_col as usize >= self.k {
                    continue;
                }
                let inner_vs = vs.filter_unchecked(x, y_col);
                let mut chain =
                    self.search(&inner_vs, &mono.child(side), rows | 1 << y, cols | 1 << y_col)?;
                chain.push(Link { x, h, y, y_col });
                if chain.len() > best.len() {
                    best = chain;
                }
                if best.len() >= goal {
                    return Ok(best);
                }
            }
        }
        Ok(best)
    }
}

/// A multiclass threshold chain read off a tree that `class` shatters.
pub fn mtd_from_tree(class: &HypothesisClass, tree: &LittlestoneTree) -> Result<MtdWitness> {
    let k = class.label_count();
    if k > 64 {
        return Err(Error::budget("label count for tree extraction", k as u64, 64));
    }
    if shatters(class, tree)?.is_none() {
        return Err(Error::contract("the class does not shatter the tree"));
    }
    let mut ex = Extractor {
        class,
        tree,
        k,
        visits: 0,
        max_visits: 1_000_000,
    };
    let links = ex.search(&class.full_space(), &whole_tree(tree.depth() + 1), 0, 0)?;
    Ok(MtdWitness {
        instances: links.iter().map(|l| l.x).collect(),
        hypotheses: links.iter().map(|l| l.h).collect(),
        rows: links.iter().map(|l| l.y).collect(),
        cols: links.iter().map(|l| l.y_col).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensions::{littlestone_tree, mtd, Budget};
    use crate::zoo;

    #[test]
    fn own_bound_dominates_target() {
        for k in 1..=8 {
            for d in 0..200u32 {
                assert!(
                    mtd_tree_bound(k, d as i64) >= target_bound(k, d),
                    "k {k} d {d}"
                );
            }
        }
        assert_eq!(target_bound(2, 1), 1);
        assert_eq!(target_bound(2, 0), 0);
    }

    #[test]
    fn depth_one_gives_a_chain() {
        let c = zoo::full_cube(3).unwrap();
        let t = LittlestoneTree::binary(1, vec![0, 1, 2]).unwrap();
        let w = mtd_from_tree(&c, &t).unwrap();
        assert!(w.verify(&c));
        assert!(w.len() as u32 >= target_bound(2, 1));
    }

    #[test]
    fn full_cube_depth_two_cross_checks() {
        let c = zoo::full_cube(3).unwrap();
        let t = littlestone_tree(&c, &Budget::default()).unwrap().unwrap();
        assert_eq!(t.depth(), 2);
        let w = mtd_from_tree(&c, &t).unwrap();
        assert!(w.verify(&c));
        assert!(w.len() as u32 >= mtd_tree_bound(2, 2));
        assert!(mtd(&c, &Budget::default()).unwrap().len() >= w.len());
    }

    #[test]
    fn multiclass_cube_depth_six() {
        let c = zoo::multiclass_cube(7, 3).unwrap();
        let t = LittlestoneTree::new(
            6,
            (0..127).map(|v| super::super::level_of(v) as usize).collect(),
            vec![(0, 1); 127],
        )
        .unwrap();
        let w = mtd_from_tree(&c, &t).unwrap();
        assert!(w.verify(&c));
        assert!(w.len() as u32 >= target_bound(3, 6));
        assert!(w.len() as u32 >= mtd_tree_bound(3, 6));
    }

    #[test]
    fn unshattered_tree_is_rejected() {
        let c = zoo::singleton(3).unwrap();
        let t = LittlestoneTree::binary(1, vec![0, 1, 2]).unwrap();
        assert!(matches!(mtd_from_tree(&c, &t), Err(Error::Contract(_))));
    }
}
