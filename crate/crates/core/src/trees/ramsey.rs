//! Monochromatic complete subtrees of colored complete binary trees.
//!
//! Sizes here are counted in levels: a complete subtree with `L` levels has
//! `2^L - 1` nodes. A subtree is stored as a heap-ordered array of host node
//! indices (root first, then its two children, ...), so the induced ancestor
//! order is read off the positions.

use super::{left_child, level_of, node_count, right_child};
use crate::error::{Error, Result};

/// A color per host node, in breadth-first order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeColoring {
    colors: Vec<u32>,
    k: u32,
}

impl TreeColoring {
    pub fn new(colors: Vec<u32>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::contract("a coloring needs at least one color"));
        }
        if !(colors.len() + 1).is_power_of_two() {
            return Err(Error::contract(format!(
                "{} colors do not cover a complete binary tree",
                colors.len()
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c >= k) {
            return Err(Error::contract(format!("color {c} outside [0, {k})")));
        }
        Ok(TreeColoring { colors, k })
    }

    pub fn color(&self, node: usize) -> u32 {
        self.colors[node]
    }

    pub fn colors(&self) -> usize {
        self.k as usize
    }

    /// Levels of the host tree.
    pub fn levels(&self) -> u32 {
        (self.colors.len() + 1).trailing_zeros()
    }
}

/// A complete subtree of a host tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtree {
    /// Host node indices in heap order.
    pub nodes: Vec<usize>,
    pub levels: u32,
    pub color: u32,
}

impl Subtree {
    fn empty(color: u32) -> Self {
        Subtree {
            nodes: Vec::new(),
            levels: 0,
            color,
        }
    }

    fn trimmed(&self, levels: u32) -> Vec<usize> {
        self.nodes[..node_count_levels(levels)].to_vec()
    }

    fn join(root: usize, left: &Subtree, right: &Subtree, color: u32) -> Subtree {
        let c = left.levels.min(right.levels);
        let (a, b) = (left.trimmed(c), right.trimmed(c));
        let mut nodes = vec![root];
        for l in 0..c {
            let range = node_count_levels(l)..node_count_levels(l + 1);
            nodes.extend_from_slice(&a[range.clone()]);
            nodes.extend_from_slice(&b[range]);
        }
        Subtree {
            nodes,
            levels: c + 1,
            color,
        }
    }

    pub fn root(&self) -> Option<usize> {
        self.nodes.first().copied()
    }

    /// The part of this subtree below the root's left (`side = 0`) or right child.
    pub fn child(&self, side: usize) -> Subtree {
        if self.levels <= 1 {
            return Subtree::empty(self.color);
        }
        let mut nodes = Vec::new();
        for l in 1..self.levels {
            let start = node_count_levels(l);
            let half = 1usize << (l - 1);
            let off = start + side * half;
            nodes.extend_from_slice(&self.nodes[off..off + half]);
        }
        Subtree {
            nodes,
            levels: self.levels - 1,
            color: self.color,
        }
    }
}

fn node_count_levels(levels: u32) -> usize {
    (1usize << levels) - 1
}

/// A full host tree viewed as a subtree, so the recursions below can run on
/// either.
pub fn whole_tree(levels: u32) -> Subtree {
    Subtree {
        nodes: (0..node_count_levels(levels)).collect(),
        levels,
        color: 0,
    }
}

struct View<'a> {
    nodes: &'a [usize],
    color: &'a dyn Fn(usize) -> u32,
}

impl View<'_> {
    fn col(&self, pos: usize) -> u32 {
        (self.color)(self.nodes[pos])
    }

    // Largest root-anchored `c`-monochromatic complete subtree at `pos`.
    fn greedy(&self, pos: usize, levels: u32, c: u32) -> Subtree {
        if levels == 0 || self.col(pos) != c {
            return Subtree::empty(c);
        }
        if levels == 1 {
            return Subtree {
                nodes: vec![self.nodes[pos]],
                levels: 1,
                color: c,
            };
        }
        let l = self.greedy(left_child(pos), levels - 1, c);
        let r = self.greedy(right_child(pos), levels - 1, c);
        Subtree::join(self.nodes[pos], &l, &r, c)
    }

    // The view below `pos` has `p + q - 1` levels; the result is 0-colored
    // with at least `p` levels or 1-colored with at least `q`.
    fn two_color(&self, pos: usize, p: u32, q: u32) -> Subtree {
        if p == 0 {
            return self.greedy(pos, q.saturating_sub(1), 0);
        }
        if q == 0 {
            return self.greedy(pos, p - 1, 1);
        }
        let (l, r) = (left_child(pos), right_child(pos));
        let here = self.col(pos);
        let (pp, qq) = if here == 0 { (p - 1, q) } else { (p, q - 1) };
        // Each child result is 0-colored with >= pp levels or 1-colored
        // with >= qq levels; an other-colored one is already large enough.
        let a = self.two_color(l, pp, qq);
        if a.color != here {
            return a;
        }
        let b = self.two_color(r, pp, qq);
        if b.color != here {
            return b;
        }
        Subtree::join(self.nodes[pos], &a, &b, here)
    }
}

/// Two-color extraction on a host tree with exactly `p + q - 1` levels.
pub fn ramsey_two_color(coloring: &TreeColoring, p: u32, q: u32) -> Result<Subtree> {
    if coloring.colors() > 2 {
        return Err(Error::contract("two-color extraction needs colors in {0, 1}"));
    }
    let levels = coloring.levels();
    if p + q == 0 || p + q - 1 != levels {
        return Err(Error::contract(format!(
            "tree has {levels} levels but p + q - 1 = {}",
            (p + q) as i64 - 1
        )));
    }
    let all = whole_tree(levels);
    let color = |n: usize| coloring.color(n);
    let view = View {
        nodes: &all.nodes,
        color: &color,
    };
    Ok(view.two_color(0, p, q))
}

/// Runs the two-color extraction on an arbitrary subtree of the host.
fn two_color_on(sub: &Subtree, color: &dyn Fn(usize) -> u32) -> Subtree {
    // p + q - 1 = levels with q = ⌈levels / 2⌉ <= p
    let p = sub.levels / 2 + 1;
    let q = sub.levels + 1 - p;
    let view = View {
        nodes: &sub.nodes,
        color,
    };
    view.two_color(0, p, q)
}

/// Multi-color extraction: `⌈log2 k⌉` rounds of parity splitting, each at
/// least halving the level count, so the result keeps at least
/// `levels / 2^⌈log2 k⌉` levels.
pub fn ramsey_multi_color(coloring: &TreeColoring) -> Subtree {
    let color = |n: usize| coloring.color(n);
    ramsey_multi_color_on(&whole_tree(coloring.levels()), coloring.colors(), &color)
}

/// [`ramsey_multi_color`] restricted to a complete subtree of the host.
pub fn ramsey_multi_color_on(sub: &Subtree, k: usize, color: &dyn Fn(usize) -> u32) -> Subtree {
    let rounds = ceil_log2(k as u64);
    let mut current = sub.clone();
    for shift in 0..rounds {
        if current.levels == 0 {
            break;
        }
        let parity = |n: usize| (color(n) >> shift) & 1;
        current = two_color_on(&current, &parity);
    }
    current.color = current.root().map(color).unwrap_or(0);
    current
}

pub fn ceil_log2(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

fn is_ancestor_or_self(a: usize, b: usize) -> bool {
    let (la, lb) = (level_of(a), level_of(b));
    if la > lb {
        return false;
    }
    let mut v = b;
    for _ in 0..(lb - la) {
        v = (v - 1) / 2;
    }
    v == a
}

/// Independent certificate check: `sub` induces a complete binary tree with
/// all leaves at one depth, is `color`-monochromatic and has at least
/// `min_levels` levels. With `respect_sides`, each left (right) child also
/// lies below its parent's left (right) host child.
pub fn verify_subtree(
    host_levels: u32,
    coloring: &dyn Fn(usize) -> u32,
    sub: &Subtree,
    color: u32,
    min_levels: f64,
    respect_sides: bool,
) -> std::result::Result<(), String> {
    let n = sub.nodes.len();
    if n + 1 != 1usize << sub.levels {
        return Err(format!("{n} nodes do not form {} complete levels", sub.levels));
    }
    if (sub.levels as f64) < min_levels {
        return Err(format!("{} levels, needed {min_levels}", sub.levels));
    }
    let host_n = node_count(host_levels.saturating_sub(1));
    let mut seen = std::collections::HashSet::new();
    for &v in &sub.nodes {
        if host_levels == 0 || v >= host_n {
            return Err(format!("node {v} outside the host tree"));
        }
        if !seen.insert(v) {
            return Err(format!("node {v} repeated"));
        }
        if coloring(v) != color {
            return Err(format!("node {v} has color {} not {color}", coloring(v)));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let want = is_ancestor_or_self(i, j);
            let got = is_ancestor_or_self(sub.nodes[i], sub.nodes[j]);
            if want != got {
                return Err(format!("induced order differs at positions {i}, {j}"));
            }
        }
        if respect_sides && right_child(i) < n {
            let v = sub.nodes[i];
            if !is_ancestor_or_self(left_child(v), sub.nodes[left_child(i)])
                || !is_ancestor_or_self(right_child(v), sub.nodes[right_child(i)])
            {
                return Err(format!("children of position {i} are on the wrong sides"));
            }
        }
    }
    Ok(())
}
