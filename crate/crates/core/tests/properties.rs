use proptest::prelude::*;
use transduct_core::dimensions::{
    ds_dim, littlestone_dim, littlestone_tree, mtd, natarajan_dim, threshold_dim, vc_dim, Budget,
};
use transduct_core::game::{
    fixed_sequence_value, run_agnostic, run_realizable, transductive_value, worst_case_mistakes,
};
use transduct_core::hypothesis::{parse_hyp, write_hyp};
use transduct_core::strategies::{
    best_response_learner, dyadic_adversary, halving_learner, minimax_adversary, mw_learner,
    random_label_adversary, soa_learner, vc_adversary, Adversary, Learner, SequenceMode,
};
use transduct_core::trees::{mtd_from_tree, parse_ltree, ramsey_two_color, shatters, write_ltree};
use transduct_core::trees::{verify_subtree, TreeColoring};
use transduct_core::zoo;
use transduct_core::{HypothesisClass, Instance, Label, LabeledSequence};

fn rows_of(c: &HypothesisClass) -> Vec<Vec<Label>> {
    c.sorted_rows()
}

// Small classes: m in 1..=5, k in {2, 3}, at most 16 rows.
fn small_class() -> impl Strategy<Value = HypothesisClass> {
    (1usize..=5, 2usize..=3, any::<u64>()).prop_flat_map(|(m, k, seed)| {
        let cap = (k as u64).pow(m as u32).min(16) as usize;
        (1..=cap).prop_map(move |size| zoo::random_class(m, k, size, seed).unwrap())
    })
}

fn small_binary_class() -> impl Strategy<Value = HypothesisClass> {
    (1usize..=5, any::<u64>()).prop_flat_map(|(m, seed)| {
        let cap = (1usize << m).min(16);
        (1..=cap).prop_map(move |size| zoo::random_class(m, 2, size, seed).unwrap())
    })
}

// Reference VC dimension: largest subset on which every labeling appears.
fn oracle_vc(c: &HypothesisClass) -> u32 {
    let m = c.domain_size();
    let rows = rows_of(c);
    let mut best = 0;
    for mask in 0u32..1 << m {
        let pts: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let mut seen = std::collections::HashSet::new();
        for r in &rows {
            seen.insert(pts.iter().map(|&i| r[i]).collect::<Vec<_>>());
        }
        if seen.len() == 1 << pts.len() {
            best = best.max(pts.len() as u32);
        }
    }
    best
}

// Reference Littlestone dimension by the plain recursion over row sets,
// counted in levels.
fn oracle_ld(rows: &[Vec<Label>], m: usize) -> u32 {
    if rows.is_empty() {
        return 0;
    }
    let mut best = 0;
    for x in 0..m {
        let mut parts: std::collections::BTreeMap<Label, Vec<Vec<Label>>> = Default::default();
        for r in rows {
            parts.entry(r[x]).or_default().push(r.clone());
        }
        if parts.len() < 2 {
            continue;
        }
        let mut vals: Vec<u32> = parts.values().map(|p| oracle_ld(p, m)).collect();
        vals.sort_unstable_by(|a, b| b.cmp(a));
        best = best.max(1 + vals[1]);
    }
    best
}

fn subclass(c: &HypothesisClass, keep: &[bool]) -> Option<HypothesisClass> {
    let rows: Vec<Vec<Label>> = rows_of(c)
        .into_iter()
        .zip(keep.iter().cycle())
        .filter(|(_, k)| **k)
        .map(|(r, _)| r)
        .collect();
    if rows.is_empty() {
        return None;
    }
    Some(HypothesisClass::from_rows(c.domain_size(), c.label_count(), rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dimensions_match_reference_oracles(c in small_binary_class()) {
        let b = Budget::default();
        prop_assert_eq!(vc_dim(&c, &b).unwrap().dim(), oracle_vc(&c));
        prop_assert_eq!(littlestone_dim(&c, &b).unwrap(), oracle_ld(&rows_of(&c), c.domain_size()));
    }

    #[test]
    fn witnesses_reverify(c in small_class()) {
        let b = Budget::default();
        prop_assert!(threshold_dim(&c, &b).unwrap().verify(&c));
        prop_assert!(natarajan_dim(&c, &b).unwrap().verify(&c));
        prop_assert!(mtd(&c, &b).unwrap().verify(&c));
        prop_assert!(ds_dim(&c, &b).unwrap().verify(&c));
        if c.is_binary() {
            prop_assert!(vc_dim(&c, &b).unwrap().verify(&c));
        }
        let ld = littlestone_dim(&c, &b).unwrap();
        match littlestone_tree(&c, &b).unwrap() {
            Some(t) => {
                prop_assert_eq!(t.depth() + 1, ld);
                prop_assert!(shatters(&c, &t).unwrap().is_some());
            }
            None => prop_assert_eq!(ld, 0),
        }
    }

    #[test]
    fn dimensions_monotone_under_subclasses(
        c in small_class(),
        keep in proptest::collection::vec(any::<bool>(), 1..8),
    ) {
        let Some(s) = subclass(&c, &keep) else { return Ok(()) };
        let b = Budget::default();
        prop_assert!(littlestone_dim(&s, &b).unwrap() <= littlestone_dim(&c, &b).unwrap());
        prop_assert!(threshold_dim(&s, &b).unwrap().len() <= threshold_dim(&c, &b).unwrap().len());
        prop_assert!(natarajan_dim(&s, &b).unwrap().dim() <= natarajan_dim(&c, &b).unwrap().dim());
        prop_assert!(mtd(&s, &b).unwrap().len() <= mtd(&c, &b).unwrap().len());
        prop_assert!(ds_dim(&s, &b).unwrap().dim() <= ds_dim(&c, &b).unwrap().dim());
    }

    #[test]
    fn binary_dimension_ordering(c in small_binary_class(), n in 0usize..=4) {
        let b = Budget::default();
        let vc = vc_dim(&c, &b).unwrap().dim();
        let ld = littlestone_dim(&c, &b).unwrap();
        let log_h = 63 - c.hypothesis_count().leading_zeros();
        prop_assert!(vc <= ld);
        prop_assert!(ld <= log_h);
        let v = transductive_value(&c, n, &b).unwrap().value;
        prop_assert!(v <= ld);
        prop_assert!(v >= vc.min(n as u32));
    }

    #[test]
    fn repeats_do_not_change_the_value(
        c in small_class(),
        seq in proptest::collection::vec(0usize..5, 1..5),
        at in 0usize..5,
    ) {
        let m = c.domain_size();
        let seq: Vec<Instance> = seq.into_iter().map(|x| x % m).collect();
        let mut longer = seq.clone();
        longer.insert(at.min(seq.len()), seq[at % seq.len()]);
        let b = Budget::default();
        let v = fixed_sequence_value(&c, &seq, &b).unwrap();
        prop_assert!(fixed_sequence_value(&c, &longer, &b).unwrap() <= v);
    }

    #[test]
    fn best_response_attains_the_fixed_sequence_value(
        c in small_class(),
        seq in proptest::collection::vec(0usize..5, 1..5),
    ) {
        let m = c.domain_size();
        let seq: Vec<Instance> = seq.into_iter().map(|x| x % m).collect();
        let b = Budget::default();
        let v = fixed_sequence_value(&c, &seq, &b).unwrap();
        let (worst, _) = worst_case_mistakes(&c, &seq, &best_response_learner(b)).unwrap();
        prop_assert_eq!(worst, v);
        // no learner does better than the value against its worst labeling
        let (h, _) = worst_case_mistakes(&c, &seq, &halving_learner()).unwrap();
        prop_assert!(h >= v);
    }

    #[test]
    fn realizable_adversaries_keep_prefixes_realizable(
        c in small_class(),
        n in 1usize..7,
        which in 0usize..3,
        seed in any::<u64>(),
    ) {
        let b = Budget::default();
        let mut adv: Box<dyn Adversary> = match which {
            0 => Box::new(vc_adversary(b)),
            1 => Box::new(minimax_adversary(b)),
            _ => Box::new(dyadic_adversary(b)),
        };
        let mut learner: Box<dyn Learner> = Box::new(mw_learner(None, seed));
        let tr = run_realizable(&c, adv.as_mut(), learner.as_mut(), n, seed).unwrap();
        let mut prefix = LabeledSequence::default();
        for t in 0..tr.sequence.len() {
            prefix.push(tr.sequence[t], tr.labels[t]);
            prop_assert!(c.is_realizable(&prefix).unwrap());
        }
    }

    #[test]
    fn soa_and_halving_bounds_on_single_runs(
        c in small_class(),
        n in 1usize..7,
        seed in any::<u64>(),
    ) {
        let b = Budget::default();
        let ld = littlestone_dim(&c, &b).unwrap() as usize;
        let tr = run_realizable(&c, &mut minimax_adversary(b), &mut soa_learner(b), n, seed).unwrap();
        prop_assert!(tr.mistakes() <= ld);
        let tr = run_realizable(&c, &mut vc_adversary(b), &mut halving_learner(), n, seed).unwrap();
        let distinct: std::collections::BTreeSet<_> = tr.sequence.iter().copied().collect();
        let distinct: Vec<_> = distinct.into_iter().collect();
        let size = c.restrict(&distinct).unwrap().hypothesis_count();
        prop_assert!(tr.mistakes() as u32 <= 63 - size.leading_zeros());
    }

    #[test]
    fn dyadic_forces_the_log_bound(big_n in 1usize..=16) {
        let c = zoo::thresholds(big_n).unwrap();
        let b = Budget::default();
        let bound = (63 - (big_n as u64).leading_zeros()) as usize;
        for learner in [
            Box::new(halving_learner()) as Box<dyn Learner>,
            Box::new(soa_learner(b)),
        ] {
            let mut learner = learner;
            let tr = run_realizable(&c, &mut dyadic_adversary(b), learner.as_mut(), big_n, 0).unwrap();
            prop_assert!(tr.mistakes() >= bound.max(1), "{} mistakes, N = {big_n}", tr.mistakes());
        }
    }

    #[test]
    fn hyp_format_round_trips(c in small_class()) {
        let text = write_hyp(&c);
        let back = parse_hyp(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(write_hyp(&back), text);
    }

    #[test]
    fn mtd_from_tree_reverifies(c in small_class()) {
        let b = Budget::default();
        if let Some(t) = littlestone_tree(&c, &b).unwrap() {
            let back = parse_ltree(&write_ltree(&t)).unwrap();
            prop_assert_eq!(&back, &t);
            let w = mtd_from_tree(&c, &t).unwrap();
            prop_assert!(w.verify(&c));
            prop_assert!(!w.is_empty());
        }
    }

    #[test]
    fn two_color_ramsey_on_random_colorings(levels in 1u32..=8, bits in any::<u64>(), p_pick in any::<u32>()) {
        let nodes = (1usize << levels) - 1;
        let colors: Vec<u32> = (0..nodes)
            .map(|i| ((bits.rotate_left(i as u32 * 7) ^ (i as u64 * 0x9e37)) & 1) as u32)
            .collect();
        let c = TreeColoring::new(colors.clone(), 2).unwrap();
        let p = 1 + p_pick % levels;
        let q = levels + 1 - p;
        let s = ramsey_two_color(&c, p, q).unwrap();
        let need = if s.color == 0 { p } else { q };
        let col = |v: usize| colors[v];
        prop_assert!(verify_subtree(levels, &col, &s, s.color, need as f64, true).is_ok());
    }

    #[test]
    fn agnostic_runs_are_reproducible(seed in any::<u64>()) {
        let c = zoo::full_cube(2).unwrap();
        let adv = random_label_adversary(SequenceMode::Shattered, Budget::default(), seed);
        let l = mw_learner(None, seed);
        let a = run_agnostic(&c, &adv, &l, 20, 16, seed).unwrap();
        let b = run_agnostic(&c, &adv, &l, 20, 16, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn singleton_regret_is_zero() {
    let c = zoo::singleton(3).unwrap();
    let adv = random_label_adversary(SequenceMode::Cycle, Budget::default(), 4);
    let r = run_agnostic(&c, &adv, &mw_learner(None, 4), 30, 50, 4).unwrap();
    assert_eq!(r.mean_regret, 0.0);
}
