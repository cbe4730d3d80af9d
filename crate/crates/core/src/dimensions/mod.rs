//! Exact combinatorial dimensions with checkable witnesses.

mod chain;
mod ds;
mod littlestone;
mod shatter;

pub use chain::{
    mtd, mtd_to_threshold_extract, threshold_dim, threshold_dim_for_pair, MtdWitness,
    ThresholdWitness,
};
pub use ds::{ds_dim, has_pseudocube, is_pseudocube, DsWitness};
pub use littlestone::{littlestone_dim, littlestone_tree, LittlestoneOracle};
pub use shatter::{natarajan_dim, vc_dim, NatarajanWitness, ShatteredSet};

use crate::error::{Error, Result};
use crate::hypothesis::HypothesisClass;
use crate::trees::LittlestoneTree;
use std::fmt;

/// Limits beyond which exact computations refuse rather than run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_domain: usize,
    pub max_hypotheses: u64,
    /// Memo entries for recursive searches.
    pub max_states: u64,
    /// Instance sequences the exact game value may enumerate.
    pub max_sequences: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_domain: 16,
            max_hypotheses: 4096,
            max_states: 4_000_000,
            max_sequences: 200_000,
        }
    }
}

impl Budget {
    pub fn unlimited_states(self) -> Self {
        Budget {
            max_states: u64::MAX,
            ..self
        }
    }

    /// An explicit copy of `class`, provided it fits.
    pub fn explicit(&self, class: &HypothesisClass) -> Result<HypothesisClass> {
        if class.domain_size() > self.max_domain {
            return Err(Error::budget(
                "domain size",
                class.domain_size() as u64,
                self.max_domain as u64,
            ));
        }
        if class.hypothesis_count() > self.max_hypotheses {
            return Err(Error::budget(
                "hypotheses",
                class.hypothesis_count(),
                self.max_hypotheses,
            ));
        }
        class.materialize(self.max_hypotheses)
    }
}

/// `Σ_{i≤d} C(m, i)`, saturating.
pub fn sauer_bound(m: u64, d: u64) -> u128 {
    weighted_sauer_bound(m, d, 1)
}

/// `Σ_{i≤d} C(m, i) · w^i`, saturating.
pub fn weighted_sauer_bound(m: u64, d: u64, w: u128) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for i in 0..=d.min(m) {
        if i > 0 {
            binom = binom.saturating_mul((m - i + 1) as u128) / i as u128;
            power = power.saturating_mul(w);
        }
        total = total.saturating_add(binom.saturating_mul(power));
    }
    total
}

/// `|H| ≤ Σ_{i≤vc} C(m, i)`.
pub fn sauer_check(class: &HypothesisClass, vc: u32) -> bool {
    class.hypothesis_count() as u128 <= sauer_bound(class.domain_size() as u64, vc as u64)
}

/// `|H| ≤ Σ_{i≤nd} C(m, i) · C(k+1, 2)^i`.
pub fn multiclass_sauer_check(class: &HypothesisClass, nd: u32) -> bool {
    let k = class.label_count() as u128;
    let pairs = (k + 1) * k / 2;
    class.hypothesis_count() as u128
        <= weighted_sauer_bound(class.domain_size() as u64, nd as u64, pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Vc,
    Ld,
    Td,
    Nd,
    Mtd,
    Ds,
}

impl Dim {
    pub const ALL: [Dim; 6] = [Dim::Vc, Dim::Ld, Dim::Td, Dim::Nd, Dim::Mtd, Dim::Ds];

    pub fn name(self) -> &'static str {
        match self {
            Dim::Vc => "vc",
            Dim::Ld => "ld",
            Dim::Td => "td",
            Dim::Nd => "nd",
            Dim::Mtd => "mtd",
            Dim::Ds => "ds",
        }
    }

    pub fn parse(s: &str) -> Result<Vec<Dim>> {
        if s == "all" {
            return Ok(Dim::ALL.to_vec());
        }
        Dim::ALL
            .iter()
            .find(|d| d.name() == s)
            .map(|d| vec![*d])
            .ok_or_else(|| Error::contract(format!("unknown dimension `{s}`")))
    }
}

/// Values and witnesses for whichever dimensions were requested.
#[derive(Clone, Debug, Default)]
pub struct DimensionReport {
    pub vc: Option<ShatteredSet>,
    pub ld: Option<u32>,
    pub ld_tree: Option<LittlestoneTree>,
    pub td: Option<ThresholdWitness>,
    pub nd: Option<NatarajanWitness>,
    pub mtd: Option<MtdWitness>,
    pub ds: Option<DsWitness>,
    /// Dimensions that could not be computed, with the reason.
    pub skipped: Vec<(Dim, Error)>,
}

impl DimensionReport {
    pub fn compute(class: &HypothesisClass, dims: &[Dim], budget: &Budget) -> DimensionReport {
        let mut r = DimensionReport::default();
        for &d in dims {
            let res = match d {
                Dim::Vc => {
                    if class.is_binary() {
                        vc_dim(class, budget).map(|w| r.vc = Some(w))
                    } else {
                        Err(Error::NotBinary(class.label_count()))
                    }
                }
                Dim::Ld => littlestone_dim(class, budget).map(|v| {
                    r.ld = Some(v);
                    r.ld_tree = littlestone_tree(class, budget).ok().flatten();
                }),
                Dim::Td => threshold_dim(class, budget).map(|w| r.td = Some(w)),
                Dim::Nd => natarajan_dim(class, budget).map(|w| r.nd = Some(w)),
                Dim::Mtd => mtd(class, budget).map(|w| r.mtd = Some(w)),
                Dim::Ds => ds_dim(class, budget).map(|w| r.ds = Some(w)),
            };
            if let Err(e) = res {
                r.skipped.push((d, e));
            }
        }
        r
    }

    pub fn value(&self, d: Dim) -> Option<u32> {
        match d {
            Dim::Vc => self.vc.as_ref().map(|w| w.dim()),
            Dim::Ld => self.ld,
            Dim::Td => self.td.as_ref().map(|w| w.len() as u32),
            Dim::Nd => self.nd.as_ref().map(|w| w.dim()),
            Dim::Mtd => self.mtd.as_ref().map(|w| w.len() as u32),
            Dim::Ds => self.ds.as_ref().map(|w| w.dim()),
        }
    }

    /// Re-check every witness against its definition.
    pub fn verify(&self, class: &HypothesisClass) -> Result<()> {
        let fail = |d: &str| Err(Error::contract(format!("{d} witness failed re-verification")));
        if let Some(w) = &self.vc {
            if !w.verify(class) {
                return fail("vc");
            }
        }
        if let Some(w) = &self.td {
            if !w.verify(class) {
                return fail("td");
            }
        }
        if let Some(w) = &self.nd {
            if !w.verify(class) {
                return fail("nd");
            }
        }
        if let Some(w) = &self.mtd {
            if !w.verify(class) {
                return fail("mtd");
            }
        }
        if let Some(w) = &self.ds {
            if !w.verify(class) {
                return fail("ds");
            }
        }
        if let (Some(ld), Some(t)) = (self.ld, &self.ld_tree) {
            if t.depth() + 1 != ld || crate::trees::shatters(class, t)?.is_none() {
                return fail("ld");
            }
        }
        Ok(())
    }

    /// `name value` lines, optionally followed by `#` certificate lines.
    pub fn render(&self, dims: &[Dim], witnesses: bool) -> String {
        let mut out = String::new();
        for &d in dims {
            match self.value(d) {
                Some(v) => out.push_str(&format!("{} {}\n", d.name(), v)),
                None => {
                    let why = self
                        .skipped
                        .iter()
                        .find(|(s, _)| *s == d)
                        .map(|(_, e)| e.to_string())
                        .unwrap_or_default();
                    out.push_str(&format!("{} not_computed # {}\n", d.name(), why));
                }
            }
        }
        if witnesses {
            for &d in dims {
                let line = match d {
                    Dim::Vc => self.vc.as_ref().map(|w| w.to_string()),
                    Dim::Ld => self.ld_tree.as_ref().map(|t| {
                        format!("ld tree depth {} instances {:?}", t.depth(), t.instances())
                    }),
                    Dim::Td => self.td.as_ref().map(|w| w.to_string()),
                    Dim::Nd => self.nd.as_ref().map(|w| w.to_string()),
                    Dim::Mtd => self.mtd.as_ref().map(|w| w.to_string()),
                    Dim::Ds => self.ds.as_ref().map(|w| w.to_string()),
                };
                if let Some(l) = line {
                    out.push_str(&format!("# {l}\n"));
                }
            }
        }
        out
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn binom(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn sauer_examples() {
        assert_eq!(sauer_bound(3, 3), 8);
        assert_eq!(sauer_bound(5, 1), 6);
        assert_eq!(weighted_sauer_bound(2, 2, 6), 1 + 12 + 36);
        assert!(sauer_check(&zoo::full_cube(3).unwrap(), 3));
        assert!(sauer_check(&zoo::thresholds(5).unwrap(), 1));
        assert!(multiclass_sauer_check(&zoo::multiclass_cube(2, 3).unwrap(), 2));
        assert!(!sauer_check(&zoo::full_cube(3).unwrap(), 2));
    }

    #[test]
    fn sauer_bound_matches_direct_sum() {
        for m in 0..20u64 {
            for d in 0..=m {
                let direct: u128 = (0..=d).map(|i| binom(m, i)).sum();
                assert_eq!(sauer_bound(m, d), direct);
            }
        }
    }

    #[test]
    fn report_renders_and_verifies() {
        let c = zoo::thresholds(5).unwrap();
        let r = DimensionReport::compute(&c, &Dim::ALL, &Budget::default());
        r.verify(&c).unwrap();
        let text = r.render(&Dim::ALL, true);
        assert!(text.starts_with("vc 1\nld 2\ntd 5\nnd 1\nmtd 5\nds 1\n"), "{text}");
        assert!(text.contains("\n# "));
    }
}
