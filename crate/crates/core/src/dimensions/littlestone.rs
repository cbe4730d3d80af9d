//! Littlestone dimension through the mistake-tree recursion
//!
//! `LD(V) = max_x max_{y0≠y1} 1 + min(LD(V_{x→y0}), LD(V_{x→y1}))`, with
//! `LD(V) = 0` when no instance splits `V`. For a fixed `x` the best pair
//! is the one whose restrictions have the two largest dimensions.

use super::Budget;
use crate::bitset::HypSet;
use crate::error::{Error, Result};
use crate::hypothesis::tree_cube::tree_cube_littlestone;
use crate::hypothesis::{HypothesisClass, Label, SpaceState, TreeCubeState, VersionSpace};
use crate::trees::LittlestoneTree;
use std::collections::HashMap;

fn floor_log2(n: u64) -> u32 {
    63 - n.leading_zeros()
}

/// Memoized evaluator of the recursion for one class; reusable across calls.
#[derive(Debug)]
pub struct LittlestoneOracle {
    class: HypothesisClass,
    masks: HashMap<HypSet, u32>,
    cones: HashMap<TreeCubeState, u32>,
    max_states: u64,
}

impl LittlestoneOracle {
    pub fn new(class: &HypothesisClass, budget: &Budget) -> Result<Self> {
        if class.is_explicit() && class.hypothesis_count() > budget.max_hypotheses {
            return Err(Error::budget(
                "hypotheses",
                class.hypothesis_count(),
                budget.max_hypotheses,
            ));
        }
        Ok(LittlestoneOracle {
            class: class.clone(),
            masks: HashMap::new(),
            cones: HashMap::new(),
            max_states: budget.max_states,
        })
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn states(&self) -> usize {
        self.masks.len() + self.cones.len()
    }

    /// Dimension of a nonempty version space of this oracle's class.
    pub fn ld(&mut self, vs: &VersionSpace) -> Result<u32> {
        match vs.state() {
            SpaceState::Mask(m) => {
                if m.is_empty() {
                    return Err(Error::contract("littlestone dimension of an empty version space"));
                }
                self.ld_mask(m)
            }
            SpaceState::TreeCube(s) => {
                let cube = *self
                    .class
                    .tree_cube_shape()
                    .ok_or_else(|| Error::contract("version space from another class"))?;
                tree_cube_littlestone(&cube, s, &mut self.cones, self.max_states)
            }
        }
    }

    fn ld_mask(&mut self, mask: &HypSet) -> Result<u32> {
        let size = mask.len();
        if size <= 1 {
            return Ok(0);
        }
        if let Some(&v) = self.masks.get(mask) {
            return Ok(v);
        }
        let upper = floor_log2(size as u64);
        let mut best = 0;
        let class = self.class.clone();
        'outer: for x in 0..class.domain_size() {
            let masks = class.label_masks(x).expect("explicit class");
            // sizes first: a split can only beat `best` if its second-largest
            // part is big enough
            let mut parts: Vec<(usize, HypSet)> = masks
                .iter()
                .filter_map(|(_, lm)| {
                    let n = mask.intersection_len(lm);
                    (n > 0).then(|| (n, mask.intersection(lm)))
                })
                .collect();
            if parts.len() < 2 {
                continue;
            }
            parts.sort_by_key(|p| std::cmp::Reverse(p.0));
            if floor_log2(parts[1].0 as u64) < best {
                continue;
            }
            let (mut first, mut second) = (0u32, 0u32);
            let mut seen = 0;
            for (n, part) in &parts {
                // remaining parts are no larger, so their dimensions cannot
                // raise the second-largest value past this cap
                if seen >= 2 && floor_log2(*n as u64) <= second {
                    break;
                }
                let v = self.ld_mask(part)?;
                seen += 1;
                if seen == 1 {
                    first = v;
                } else if v > first {
                    second = first;
                    first = v;
                } else {
                    second = second.max(v);
                }
                if seen >= 2 && 1 + second == upper {
                    break;
                }
            }
            if seen >= 2 {
                best = best.max(1 + second);
            }
            if best == upper {
                break 'outer;
            }
        }
        if self.states() as u64 >= self.max_states {
            return Err(Error::budget("littlestone states", self.states() as u64, self.max_states));
        }
        self.masks.insert(mask.clone(), best);
        Ok(best)
    }
}

pub fn littlestone_dim(class: &HypothesisClass, budget: &Budget) -> Result<u32> {
    LittlestoneOracle::new(class, budget)?.ld(&class.full_space())
}

/// A shattered tree of depth `LD - 1` (none when `LD = 0`), rebuilt by
/// replaying the recursion with lowest-index tie-breaking.
pub fn littlestone_tree(class: &HypothesisClass, budget: &Budget) -> Result<Option<LittlestoneTree>> {
    let mut oracle = LittlestoneOracle::new(class, budget)?;
    let full = class.full_space();
    let ld = oracle.ld(&full)?;
    if ld == 0 {
        return Ok(None);
    }
    if ld > 12 {
        return Err(Error::budget("witness tree levels", ld as u64, 12));
    }
    let n = (1usize << ld) - 1;
    let mut instances = vec![0; n];
    let mut edges = vec![(0 as Label, 1 as Label); n];
    let mut stack = vec![(0usize, full, ld)];
    while let Some((node, vs, need)) = stack.pop() {
        let (x, y0, a, y1, b) = find_split(&mut oracle, &vs, need)?;
        instances[node] = x;
        edges[node] = (y0, y1);
        if need > 1 {
            stack.push((2 * node + 1, a, need - 1));
            stack.push((2 * node + 2, b, need - 1));
        }
    }
    LittlestoneTree::new(ld - 1, instances, edges).map(Some)
}

type Split = (usize, Label, VersionSpace, Label, VersionSpace);

fn find_split(oracle: &mut LittlestoneOracle, vs: &VersionSpace, need: u32) -> Result<Split> {
    let class = oracle.class().clone();
    for x in 0..class.domain_size() {
        let parts = vs.split(x);
        for i in 0..parts.len() {
            if oracle.ld(&parts[i].1)? + 1 < need {
                continue;
            }
            for j in i + 1..parts.len() {
                if oracle.ld(&parts[j].1)? + 1 >= need {
                    return Ok((
                        x,
                        parts[i].0,
                        parts[i].1.clone(),
                        parts[j].0,
                        parts[j].1.clone(),
                    ));
                }
            }
        }
    }
    Err(Error::contract("no split reaches the recorded dimension"))
}
