//! Finite hypothesis classes, labeled sequences and version spaces.

mod format;
pub mod tree_cube;

pub use format::{parse_hyp, write_hyp};
pub use tree_cube::{TreeCube, TreeCubeState};

use crate::bitset::HypSet;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub type Instance = usize;
pub type Label = u32;

/// A finite set of functions from `[0, m)` to `[0, k)`.
///
/// Cloning is cheap: the table lives behind an `Arc`.
#[derive(Clone)]
pub struct HypothesisClass {
    inner: Arc<Inner>,
}

struct Inner {
    domain_size: usize,
    label_count: usize,
    repr: Repr,
}

enum Repr {
    Table {
        rows: Vec<Label>,
        count: usize,
        /// Per instance, the labels that occur together with their hypothesis masks.
        masks: Vec<Vec<(Label, HypSet)>>,
    },
    TreeCube(TreeCube),
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HypothesisClass")
            .field("domain_size", &self.domain_size())
            .field("label_count", &self.label_count())
            .field("hypotheses", &self.hypothesis_count())
            .field("implicit", &!self.is_explicit())
            .finish()
    }
}

impl PartialEq for HypothesisClass {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        if self.domain_size() != other.domain_size() || self.label_count() != other.label_count() {
            return false;
        }
        match (&self.inner.repr, &other.inner.repr) {
            (Repr::TreeCube(a), Repr::TreeCube(b)) => a == b,
            _ => self.sorted_rows() == other.sorted_rows(),
        }
    }
}

impl HypothesisClass {
    /// Build an explicit class; identical rows are collapsed, keeping the first.
    pub fn from_rows(domain_size: usize, label_count: usize, rows: Vec<Vec<Label>>) -> Result<Self> {
        Self::build(domain_size, label_count, rows, false)
    }

    /// Like [`from_rows`](Self::from_rows) but duplicate rows are an error.
    pub fn from_distinct_rows(domain_size: usize, label_count: usize, rows: Vec<Vec<Label>>) -> Result<Self> {
        Self::build(domain_size, label_count, rows, true)
    }

    fn build(m: usize, k: usize, rows: Vec<Vec<Label>>, strict: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::contract(format!("label count must be at least 2, got {k}")));
        }
        if rows.is_empty() {
            return Err(Error::contract("a class needs at least one hypothesis"));
        }
        let mut seen: HashMap<&[Label], usize> = HashMap::with_capacity(rows.len());
        let mut flat = Vec::with_capacity(rows.len() * m);
        let mut count = 0;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::contract(format!(
                    "row {i} has length {}, expected {m}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&y| y as usize >= k) {
                return Err(Error::contract(format!("row {i} has label {bad} outside [0, {k})")));
            }
            if let Some(&j) = seen.get(row.as_slice()) {
                if strict {
                    return Err(Error::contract(format!("row {i} duplicates row {j}")));
                }
                continue;
            }
            seen.insert(row.as_slice(), i);
            flat.extend_from_slice(row);
            count += 1;
        }
        let masks = build_masks(m, count, &flat);
        Ok(HypothesisClass {
            inner: Arc::new(Inner {
                domain_size: m,
                label_count: k,
                repr: Repr::Table {
                    rows: flat,
                    count,
                    masks,
                },
            }),
        })
    }

    /// Implicit branch-witness class of the complete binary tree of depth `depth`.
    pub fn tree_cube(depth: u32) -> Result<Self> {
        let cube = TreeCube::new(depth)?;
        let m = usize::try_from(cube.node_count())
            .map_err(|_| Error::contract("tree cube too large for this platform"))?;
        Ok(HypothesisClass {
            inner: Arc::new(Inner {
                domain_size: m,
                label_count: 2,
                repr: Repr::TreeCube(cube),
            }),
        })
    }

    pub fn domain_size(&self) -> usize {
        self.inner.domain_size
    }

    pub fn label_count(&self) -> usize {
        self.inner.label_count
    }

    pub fn is_binary(&self) -> bool {
        self.inner.label_count == 2
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.inner.repr, Repr::Table { .. })
    }

    pub fn tree_cube_shape(&self) -> Option<&TreeCube> {
        match &self.inner.repr {
            Repr::TreeCube(c) => Some(c),
            _ => None,
        }
    }

    /// Number of hypotheses; implicit classes may exceed `usize` on 32-bit hosts, hence `u64`.
    pub fn hypothesis_count(&self) -> u64 {
        match &self.inner.repr {
            Repr::Table { count, .. } => *count as u64,
            Repr::TreeCube(c) => c.branch_count(),
        }
    }

    /// Hypothesis count for explicit classes, which always fits in memory.
    pub fn explicit_count(&self) -> Option<usize> {
        match &self.inner.repr {
            Repr::Table { count, .. } => Some(*count),
            Repr::TreeCube(_) => None,
        }
    }

    pub fn evaluate(&self, h: u64, x: Instance) -> Result<Label> {
        if h >= self.hypothesis_count() {
            return Err(Error::contract(format!(
                "hypothesis index {h} out of range (count {})",
                self.hypothesis_count()
            )));
        }
        self.check_instance(x)?;
        Ok(self.at(h, x))
    }

    /// Unchecked evaluation for hot loops; indices must be valid.
    #[inline]
    pub fn at(&self, h: u64, x: Instance) -> Label {
        match &self.inner.repr {
            Repr::Table { rows, .. } => rows[h as usize * self.inner.domain_size + x],
            Repr::TreeCube(c) => c.evaluate(h, x as u64),
        }
    }

    pub fn row(&self, h: u64) -> Vec<Label> {
        match &self.inner.repr {
            Repr::Table { rows, .. } => {
                let m = self.inner.domain_size;
                rows[h as usize * m..(h as usize + 1) * m].to_vec()
            }
            Repr::TreeCube(c) => (0..self.inner.domain_size)
                .map(|x| c.evaluate(h, x as u64))
                .collect(),
        }
    }

    /// Rows in lexicographic order.
    pub fn sorted_rows(&self) -> Vec<Vec<Label>> {
        let mut rows: Vec<Vec<Label>> = (0..self.hypothesis_count()).map(|h| self.row(h)).collect();
        rows.sort();
        rows
    }

    pub fn check_instance(&self, x: Instance) -> Result<()> {
        if x >= self.inner.domain_size {
            return Err(Error::contract(format!(
                "instance {x} out of range (domain size {})",
                self.inner.domain_size
            )));
        }
        Ok(())
    }

    pub fn check_label(&self, y: Label) -> Result<()> {
        if y as usize >= self.inner.label_count {
            return Err(Error::contract(format!(
                "label {y} out of range (label count {})",
                self.inner.label_count
            )));
        }
        Ok(())
    }

    /// Hypotheses labeling `x` with `y`, for explicit classes.
    pub fn label_mask(&self, x: Instance, y: Label) -> Option<&HypSet> {
        match &self.inner.repr {
            Repr::Table { masks, .. } => masks[x]
                .binary_search_by_key(&y, |(l, _)| *l)
                .ok()
                .map(|i| &masks[x][i].1),
            Repr::TreeCube(_) => None,
        }
    }

    /// The labels some hypothesis assigns to `x`, with their masks (explicit classes).
    pub fn label_masks(&self, x: Instance) -> Option<&[(Label, HypSet)]> {
        match &self.inner.repr {
            Repr::Table { masks, .. } => Some(&masks[x]),
            Repr::TreeCube(_) => None,
        }
    }

    /// Deduplicated class of restrictions to `instances` (in the given order).
    pub fn restrict(&self, instances: &[Instance]) -> Result<HypothesisClass> {
        Ok(self.restrict_with_map(instances)?.0)
    }

    /// Restriction plus, for each original hypothesis, the index of its restriction.
    ///
    /// Implicit classes are materialized first and must fit the default budget.
    pub fn restrict_with_map(&self, instances: &[Instance]) -> Result<(HypothesisClass, Vec<usize>)> {
        if instances.is_empty() {
            return Err(Error::contract("restriction to an empty instance list"));
        }
        for &x in instances {
            self.check_instance(x)?;
        }
        let n = self.hypothesis_count();
        if n > DEFAULT_MATERIALIZE_LIMIT {
            return Err(Error::budget("hypotheses to restrict", n, DEFAULT_MATERIALIZE_LIMIT));
        }
        let mut index: HashMap<Vec<Label>, usize> = HashMap::new();
        let mut rows = Vec::new();
        let mut map = Vec::with_capacity(n as usize);
        for h in 0..n {
            let r: Vec<Label> = instances.iter().map(|&x| self.at(h, x)).collect();
            let next = rows.len();
            let id = *index.entry(r.clone()).or_insert(next);
            if id == next {
                rows.push(r);
            }
            map.push(id);
        }
        let class = HypothesisClass::from_rows(instances.len(), self.label_count(), rows)?;
        Ok((class, map))
    }

    /// Explicit copy of this class; refuses when more than `max_hypotheses` rows would be produced.
    pub fn materialize(&self, max_hypotheses: u64) -> Result<HypothesisClass> {
        if self.is_explicit() {
            return Ok(self.clone());
        }
        let n = self.hypothesis_count();
        if n > max_hypotheses {
            return Err(Error::budget("materialized hypotheses", n, max_hypotheses));
        }
        let rows = (0..n).map(|h| self.row(h)).collect();
        HypothesisClass::from_distinct_rows(self.domain_size(), self.label_count(), rows)
    }

    pub fn is_realizable(&self, seq: &LabeledSequence) -> Result<bool> {
        seq.validate(self)?;
        Ok(!self.full_space().filter_all(seq.pairs())?.is_empty())
    }

    pub fn full_space(&self) -> VersionSpace {
        let state = match &self.inner.repr {
            Repr::Table { count, .. } => SpaceState::Mask(HypSet::full(*count)),
            Repr::TreeCube(c) => SpaceState::TreeCube(c.full_state()),
        };
        VersionSpace {
            class: self.clone(),
            state,
        }
    }

    /// Version space for an explicit subset of hypotheses.
    pub fn space_of(&self, members: HypSet) -> Result<VersionSpace> {
        match self.explicit_count() {
            Some(n) if members.universe() == n => Ok(VersionSpace {
                class: self.clone(),
                state: SpaceState::Mask(members),
            }),
            _ => Err(Error::contract("member mask does not match an explicit class")),
        }
    }
}

/// Largest implicit class that operations silently materialize.
pub const DEFAULT_MATERIALIZE_LIMIT: u64 = 1 << 20;

fn build_masks(m: usize, count: usize, flat: &[Label]) -> Vec<Vec<(Label, HypSet)>> {
    (0..m)
        .map(|x| {
            let mut by_label: Vec<(Label, HypSet)> = Vec::new();
            for h in 0..count {
                let y = flat[h * m + x];
                match by_label.binary_search_by_key(&y, |(l, _)| *l) {
                    Ok(i) => by_label[i].1.insert(h),
                    Err(i) => {
                        let mut s = HypSet::empty(count);
                        s.insert(h);
                        by_label.insert(i, (y, s));
                    }
                }
            }
            by_label
        })
        .collect()
}

/// An ordered list of `(instance, label)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabeledSequence {
    pairs: Vec<(Instance, Label)>,
}

impl LabeledSequence {
    pub fn new(pairs: Vec<(Instance, Label)>) -> Self {
        LabeledSequence { pairs }
    }

    pub fn pairs(&self) -> &[(Instance, Label)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, x: Instance, y: Label) {
        self.pairs.push((x, y));
    }

    pub fn validate(&self, class: &HypothesisClass) -> Result<()> {
        for &(x, y) in &self.pairs {
            class.check_instance(x)?;
            class.check_label(y)?;
        }
        Ok(())
    }
}

impl FromIterator<(Instance, Label)> for LabeledSequence {
    fn from_iter<I: IntoIterator<Item = (Instance, Label)>>(iter: I) -> Self {
        LabeledSequence {
            pairs: iter.into_iter().collect(),
        }
    }
}

/// Canonical member encoding of a version space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpaceState {
    Mask(HypSet),
    TreeCube(TreeCubeState),
}

/// The hypotheses of a class consistent with the labels seen so far.
#[derive(Clone)]
pub struct VersionSpace {
    class: HypothesisClass,
    state: SpaceState,
}

impl fmt::Debug for VersionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("VersionSpace").field(&self.state).finish()
    }
}

impl PartialEq for VersionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state
    }
}

impl Eq for VersionSpace {}

impl VersionSpace {
    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn state(&self) -> &SpaceState {
        &self.state
    }

    pub fn mask(&self) -> Option<&HypSet> {
        match &self.state {
            SpaceState::Mask(m) => Some(m),
            SpaceState::TreeCube(_) => None,
        }
    }

    pub fn len(&self) -> u64 {
        match &self.state {
            SpaceState::Mask(m) => m.len() as u64,
            SpaceState::TreeCube(s) => s.count(self.cube()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.state {
            SpaceState::Mask(m) => m.is_empty(),
            SpaceState::TreeCube(s) => s.is_empty(),
        }
    }

    fn cube(&self) -> &TreeCube {
        self.class
            .tree_cube_shape()
            .expect("tree-cube state on a non tree-cube class")
    }

    pub fn contains(&self, h: u64) -> bool {
        match &self.state {
            SpaceState::Mask(m) => m.contains(h as usize),
            SpaceState::TreeCube(s) => s.contains(self.cube(), h),
        }
    }

    /// Lowest-index member.
    pub fn first(&self) -> Option<u64> {
        match &self.state {
            SpaceState::Mask(m) => m.first().map(|h| h as u64),
            SpaceState::TreeCube(s) => s.first(self.cube()),
        }
    }

    /// Members in increasing index order.
    pub fn members(&self) -> Vec<u64> {
        match &self.state {
            SpaceState::Mask(m) => m.iter().map(|h| h as u64).collect(),
            SpaceState::TreeCube(s) => s.members(self.cube()),
        }
    }

    /// `{h ∈ self : h(x) = y}`; may be empty.
    pub fn filter(&self, x: Instance, y: Label) -> Result<VersionSpace> {
        self.class.check_instance(x)?;
        self.class.check_label(y)?;
        Ok(self.filter_unchecked(x, y))
    }

    pub fn filter_unchecked(&self, x: Instance, y: Label) -> VersionSpace {
        let state = match &self.state {
            SpaceState::Mask(m) => SpaceState::Mask(match self.class.label_mask(x, y) {
                Some(lm) => m.intersection(lm),
                None => HypSet::empty(m.universe()),
            }),
            SpaceState::TreeCube(s) => SpaceState::TreeCube(s.filter(x as u64, y)),
        };
        VersionSpace {
            class: self.class.clone(),
            state,
        }
    }

    pub fn filter_all(&self, pairs: &[(Instance, Label)]) -> Result<VersionSpace> {
        let mut vs = self.clone();
        for &(x, y) in pairs {
            vs = vs.filter(x, y)?;
        }
        Ok(vs)
    }

    /// `count[y] = |{h ∈ self : h(x) = y}|`.
    pub fn label_counts(&self, x: Instance) -> Result<Vec<u64>> {
        self.class.check_instance(x)?;
        if self.is_empty() {
            return Err(Error::contract("label counts of an empty version space"));
        }
        let mut counts = vec![0u64; self.class.label_count()];
        match &self.state {
            SpaceState::Mask(m) => {
                for (y, lm) in self.class.label_masks(x).unwrap_or(&[]) {
                    counts[*y as usize] = m.intersection_len(lm) as u64;
                }
            }
            SpaceState::TreeCube(s) => {
                let cube = self.cube();
                let ones = s.filter(x as u64, 1).count(cube);
                counts[1] = ones;
                counts[0] = s.count(cube) - ones;
            }
        }
        Ok(counts)
    }

    /// Nonempty restrictions `(y, self ∩ {h(x) = y})`, in increasing label order.
    pub fn split(&self, x: Instance) -> Vec<(Label, VersionSpace)> {
        (0..self.class.label_count() as Label)
            .filter_map(|y| {
                if let SpaceState::Mask(_) = self.state {
                    self.class.label_mask(x, y)?;
                }
                let v = self.filter_unchecked(x, y);
                (!v.is_empty()).then_some((y, v))
            })
            .collect()
    }
}
