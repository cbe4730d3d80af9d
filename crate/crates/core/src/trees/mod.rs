//! Littlestone trees, shattering, breadth-first sequencing and the
//! constructive tree lemmas.
//!
//! A tree of depth `d` has nodes addressed by bit strings of length `0..=d`
//! (so `2^(d+1) - 1` nodes) and branches `u ∈ {0,1}^(d+1)`. Nodes are stored
//! in breadth-first order; the node with bit string `v` of length `l` sits at
//! index `2^l - 1 + int(v)`. Shattering a depth-`d` tree certifies a
//! Littlestone dimension of at least `d + 1`.

mod extract;
mod format;
pub mod ramsey;

pub use extract::{mtd_from_tree, mtd_tree_bound, target_bound};
pub use format::{parse_ltree, write_ltree};
pub use ramsey::{
    ramsey_multi_color, ramsey_multi_color_on, ramsey_two_color, verify_subtree, whole_tree, Subtree,
    TreeColoring,
};

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, Instance, Label};

/// Deepest tree we are willing to enumerate branches of.
pub const MAX_TREE_DEPTH: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LittlestoneTree {
    depth: u32,
    instances: Vec<Instance>,
    /// `(y_{v∘0}, y_{v∘1})` for every node `v`.
    edges: Vec<(Label, Label)>,
}

pub fn node_count(depth: u32) -> usize {
    (1usize << (depth + 1)) - 1
}

/// Level of a breadth-first node index (root is level 0).
pub fn level_of(node: usize) -> u32 {
    usize::BITS - 1 - (node + 1).leading_zeros()
}

pub fn left_child(node: usize) -> usize {
    2 * node + 1
}

pub fn right_child(node: usize) -> usize {
    2 * node + 2
}

impl LittlestoneTree {
    pub fn new(depth: u32, instances: Vec<Instance>, edges: Vec<(Label, Label)>) -> Result<Self> {
        if depth > MAX_TREE_DEPTH {
            return Err(Error::budget("tree depth", depth as u64, MAX_TREE_DEPTH as u64));
        }
        let n = node_count(depth);
        if instances.len() != n || edges.len() != n {
            return Err(Error::contract(format!(
                "a depth-{depth} tree needs {n} nodes, got {} instances and {} edge pairs",
                instances.len(),
                edges.len()
            )));
        }
        if let Some(i) = edges.iter().position(|(a, b)| a == b) {
            return Err(Error::contract(format!("node {i} has equal edge labels")));
        }
        Ok(LittlestoneTree {
            depth,
            instances,
            edges,
        })
    }

    /// Binary tree: left edges carry 0 and right edges 1.
    pub fn binary(depth: u32, instances: Vec<Instance>) -> Result<Self> {
        let n = instances.len();
        Self::new(depth, instances, vec![(0, 1); n])
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.instances.len()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, node: usize) -> Instance {
        self.instances[node]
    }

    pub fn edge_labels(&self, node: usize) -> (Label, Label) {
        self.edges[node]
    }

    pub fn is_binary_form(&self) -> bool {
        self.edges.iter().all(|&e| e == (0, 1))
    }

    pub fn branch_count(&self) -> u64 {
        1u64 << (self.depth + 1)
    }

    /// The labeled path of branch `u`, root first.
    pub fn branch_path(&self, u: u64) -> Vec<(Instance, Label)> {
        let width = self.depth + 1;
        let mut node = 0usize;
        let mut out = Vec::with_capacity(width as usize);
        for l in 0..width {
            let bit = (u >> (width - 1 - l)) & 1;
            let (y0, y1) = self.edges[node];
            out.push((self.instances[node], if bit == 0 { y0 } else { y1 }));
            node = if bit == 0 { left_child(node) } else { right_child(node) };
        }
        out
    }

    /// Subtree rooted at `node` of the given depth.
    pub fn subtree(&self, node: usize, depth: u32) -> Result<LittlestoneTree> {
        let mut instances = Vec::new();
        let mut edges = Vec::new();
        let mut frontier = vec![node];
        for _ in 0..=depth {
            let mut next = Vec::new();
            for &v in &frontier {
                if v >= self.instances.len() {
                    return Err(Error::contract("subtree reaches below the leaves"));
                }
                instances.push(self.instances[v]);
                edges.push(self.edges[v]);
                next.push(left_child(v));
                next.push(right_child(v));
            }
            frontier = next;
        }
        LittlestoneTree::new(depth, instances, edges)
    }
}

/// For every branch, the lowest-index hypothesis realizing its path; `None`
/// when some branch has no witness.
pub fn shatters(class: &HypothesisClass, tree: &LittlestoneTree) -> Result<Option<Vec<u64>>> {
    for &x in tree.instances() {
        class.check_instance(x)?;
    }
    let full = class.full_space();
    let mut witnesses = Vec::with_capacity(tree.branch_count() as usize);
    for u in 0..tree.branch_count() {
        let path = tree.branch_path(u);
        let mut vs = full.clone();
        for &(x, y) in &path {
            if y as usize >= class.label_count() {
                return Ok(None);
            }
            vs = vs.filter_unchecked(x, y);
            if vs.is_empty() {
                return Ok(None);
            }
        }
        witnesses.push(vs.first().expect("nonempty version space"));
    }
    Ok(Some(witnesses))
}

/// First `n` nodes in level order, repeating the last node when `n` exceeds
/// the node count.
pub fn bfs_sequence(tree: &LittlestoneTree, n: usize) -> Result<Vec<Instance>> {
    if n == 0 {
        return Err(Error::contract("bfs_sequence needs n >= 1"));
    }
    let nodes = tree.instances();
    let last = *nodes.last().expect("trees have a root");
    Ok((0..n).map(|i| nodes.get(i).copied().unwrap_or(last)).collect())
}

/// The tree a tree-cube class is built on: node `i` carries instance `i`.
pub fn defining_tree(depth: u32) -> Result<LittlestoneTree> {
    LittlestoneTree::binary(depth, (0..node_count(depth)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn full_cube_shatters_any_distinct_tree() {
        let c = zoo::full_cube(7).unwrap();
        let t = LittlestoneTree::binary(2, vec![3, 0, 6, 1, 2, 4, 5]).unwrap();
        let w = shatters(&c, &t).unwrap().unwrap();
        for (u, &h) in w.iter().enumerate() {
            for (x, y) in t.branch_path(u as u64) {
                assert_eq!(c.at(h, x), y);
            }
        }
    }

    #[test]
    fn singleton_shatters_nothing() {
        let c = zoo::singleton(3).unwrap();
        let t = LittlestoneTree::binary(1, vec![0, 1, 2]).unwrap();
        assert!(shatters(&c, &t).unwrap().is_none());
    }

    #[test]
    fn thresholds_shatter_dyadic_tree() {
        // root x4, children x2 / x6 (0-based 3, 1, 5)
        let c = zoo::thresholds(7).unwrap();
        let t = LittlestoneTree::binary(1, vec![3, 1, 5]).unwrap();
        assert!(shatters(&c, &t).unwrap().is_some());
        let t2 = LittlestoneTree::binary(2, vec![3, 1, 5, 0, 2, 4, 6]).unwrap();
        assert!(shatters(&c, &t2).unwrap().is_some());
    }

    #[test]
    fn tree_cube_shatters_its_tree() {
        let c = zoo::tree_cube(2).unwrap();
        let w = shatters(&c, &defining_tree(2).unwrap()).unwrap().unwrap();
        assert_eq!(w, (0..8).collect::<Vec<u64>>());
    }

    #[test]
    fn bfs_padding() {
        let t = defining_tree(2).unwrap();
        assert_eq!(bfs_sequence(&t, 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(bfs_sequence(&t, 7).unwrap(), (0..7).collect::<Vec<_>>());
        let t1 = LittlestoneTree::binary(1, vec![4, 5, 6]).unwrap();
        assert_eq!(bfs_sequence(&t1, 5).unwrap(), vec![4, 5, 6, 6, 6]);
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(LittlestoneTree::binary(1, vec![0, 1]).is_err());
        assert!(LittlestoneTree::new(0, vec![0], vec![(1, 1)]).is_err());
    }
}
