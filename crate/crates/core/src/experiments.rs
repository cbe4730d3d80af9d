//! Experiment drivers: Khinchine enumeration and the trichotomy and
//! agnostic sweeps, each emitting CSV with the run configuration echoed as
//! `#` comment lines.

use crate::dimensions::{
    littlestone_dim, natarajan_dim, sauer_bound, threshold_dim, vc_dim, Budget,
};
use crate::error::{Error, Result};
use crate::game::{run_agnostic, transductive_value, RegretReport};
pub use crate::game::CONFIDENCE_SIGMAS;
use crate::hypothesis::HypothesisClass;
use crate::strategies::{mw_learner, random_label_adversary, SequenceMode};
use crate::zoo::ClassSpec;
use rand::Rng;
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

/// Command name plus ordered settings, echoed into every output header.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: String,
    pub settings: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn new(command: impl Into<String>) -> Self {
        ExperimentConfig {
            command: command.into(),
            settings: Vec::new(),
        }
    }

    pub fn set(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.settings.push((key.into(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut s = format!("# command: {}\n", self.command);
        for (k, v) in &self.settings {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }
}

/// `E|σ_1 + ... + σ_k|` over uniform signs, kept as the exact fraction
/// `numerator / 2^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Khinchine {
    pub k: u32,
    pub numerator: u128,
    pub expected_abs_sum: f64,
    /// `√(k/2)`.
    pub bound: f64,
}

pub const KHINCHINE_MAX_K: u32 = 24;

impl Khinchine {
    /// `(numerator / 2^k)^2 >= k/2`, in integers.
    pub fn bound_holds(&self) -> bool {
        2 * self.numerator * self.numerator >= self.k as u128 * (1u128 << (2 * self.k))
    }

    /// `(numerator / 2^k)^2 == k/2`, in integers.
    pub fn is_equality(&self) -> bool {
        2 * self.numerator * self.numerator == self.k as u128 * (1u128 << (2 * self.k))
    }
}

/// Exact enumeration of all `2^k` sign vectors.
pub fn khinchine_exact(k: u32) -> Result<Khinchine> {
    if k > KHINCHINE_MAX_K {
        return Err(Error::budget(
            format!("exact Khinchine enumeration of 2^{k} sign vectors; use khinchine_monte_carlo"),
            k as u64,
            KHINCHINE_MAX_K as u64,
        ));
    }
    let numerator: u128 = (0..1u64 << k)
        .map(|v| (2 * v.count_ones() as i64 - k as i64).unsigned_abs() as u128)
        .sum();
    Ok(Khinchine {
        k,
        numerator,
        expected_abs_sum: numerator as f64 / (1u64 << k) as f64,
        bound: (k as f64 / 2.0).sqrt(),
    })
}

/// Sample mean of `|Σσ|` with its standard error, for `k` beyond exact range.
pub fn khinchine_monte_carlo(k: u32, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = crate::strategies::seeded(seed, 0);
    let draws: Vec<f64> = (0..samples)
        .map(|_| {
            let s: i64 = (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).sum();
            s.unsigned_abs() as f64
        })
        .collect();
    let n = samples.max(1) as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn floor_log2(n: u64) -> u32 {
    if n == 0 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

/// Families accepted by [`trichotomy_sweep`].
pub const SWEEP_FAMILIES: [&str; 5] = ["thresholds", "cube", "tree-cube", "ds-claim", "singleton"];

fn sweep_class(family: &str, param: usize) -> Result<HypothesisClass> {
    let spec = match family {
        "thresholds" => ClassSpec::Thresholds(param),
        "cube" => ClassSpec::FullCube(param),
        "tree-cube" => ClassSpec::TreeCube(param as u32),
        "ds-claim" => ClassSpec::DsClaim(param),
        "singleton" => ClassSpec::Singleton(param),
        other => {
            return Err(Error::contract(format!(
                "unknown sweep family `{other}` (expected one of {})",
                SWEEP_FAMILIES.join(", ")
            )))
        }
    };
    let class = spec.build()?;
    // tree cubes are small enough here to be worth a table
    if class.is_explicit() {
        Ok(class)
    } else {
        class.materialize(1 << 12)
    }
}

#[derive(Clone, Debug)]
pub struct TrichotomyConfig {
    pub family: String,
    pub params: std::ops::RangeInclusive<usize>,
    pub ns: std::ops::RangeInclusive<usize>,
    pub budget: Budget,
    /// Record wall-clock seconds per row; off gives byte-identical output.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrichotomyRow {
    pub family: String,
    pub param: usize,
    pub n: usize,
    pub vc: Option<u32>,
    pub ld: Option<u32>,
    pub td: Option<u32>,
    /// Exact `M(H, n)` when `exact`, else a proven lower bound.
    pub lower: u32,
    pub upper: u32,
    pub exact: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrichotomySweep {
    pub rows: Vec<TrichotomyRow>,
    /// Violated shape assertions, one message each.
    pub violations: Vec<String>,
}

struct ClassDims {
    vc: Option<u32>,
    /// Natarajan dimension; equals `vc` on binary classes.
    nd: Option<u32>,
    ld: Option<u32>,
    td: Option<u32>,
    size: u64,
    domain: usize,
}

fn class_dims(class: &HypothesisClass, budget: &Budget) -> ClassDims {
    ClassDims {
        vc: if class.is_binary() {
            vc_dim(class, budget).ok().map(|w| w.dim())
        } else {
            None
        },
        nd: natarajan_dim(class, budget).ok().map(|w| w.dim()),
        ld: littlestone_dim(class, budget).ok(),
        td: threshold_dim(class, budget).ok().map(|w| w.len() as u32),
        size: class.hypothesis_count(),
        domain: class.domain_size(),
    }
}

/// Proven bracket on `M(H, n)`: the shattered-set and dyadic lower bounds,
/// and the Littlestone, horizon and halving upper bounds.
fn bracket(d: &ClassDims, n: usize) -> (u32, u32) {
    let n_eff = n.min(d.domain) as u64;
    let shatter = d.nd.map_or(0, |v| v.min(n as u32));
    let dyadic = d.td.map_or(0, |t| floor_log2(t as u64).min(floor_log2(n as u64)));
    let lower = shatter.max(dyadic);
    let mut halving = d.size;
    if let Some(vc) = d.vc {
        halving = halving.min(sauer_bound(n_eff, vc as u64).min(u64::MAX as u128) as u64);
    }
    let mut upper = (n_eff as u32).min(floor_log2(halving));
    if let Some(ld) = d.ld {
        upper = upper.min(ld);
    }
    (lower, upper)
}

/// The proven bracket `(lower, upper)` on `M(H, n)` without running the
/// exact oracle. Dimensions over budget are left out of the bracket.
pub fn value_bracket(class: &HypothesisClass, n: usize, budget: &Budget) -> (u32, u32) {
    bracket(&class_dims(class, budget), n)
}

pub fn trichotomy_sweep(config: &TrichotomyConfig) -> Result<TrichotomySweep> {
    if !SWEEP_FAMILIES.contains(&config.family.as_str()) {
        sweep_class(&config.family, 1)?;
    }
    let mut sweep = TrichotomySweep::default();
    for param in config.params.clone() {
        let class = sweep_class(&config.family, param)?;
        let dims = class_dims(&class, &config.budget);
        let ns: Vec<usize> = config.ns.clone().collect();
        let rows: Vec<TrichotomyRow> = ns
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let (mut lower, mut upper) = bracket(&dims, n);
                let mut exact = false;
                if let Ok(v) = transductive_value(&class, n, &config.budget) {
                    lower = v.value;
                    upper = v.value;
                    exact = true;
                }
                TrichotomyRow {
                    family: config.family.clone(),
                    param,
                    n,
                    vc: dims.vc,
                    ld: dims.ld,
                    td: dims.td,
                    lower,
                    upper,
                    exact,
                    seconds: if config.timing {
                        start.elapsed().as_secs_f64()
                    } else {
                        0.0
                    },
                }
            })
            .collect();
        check_shape(&config.family, &dims, &rows, &mut sweep.violations);
        sweep.rows.extend(rows);
    }
    Ok(sweep)
}

fn check_shape(family: &str, dims: &ClassDims, rows: &[TrichotomyRow], out: &mut Vec<String>) {
    let tag = |r: &TrichotomyRow| format!("{} param={} n={}", r.family, r.param, r.n);
    for r in rows {
        if r.lower > r.upper {
            out.push(format!("{}: lower {} > upper {}", tag(r), r.lower, r.upper));
        }
        if let Some(ld) = dims.ld {
            if r.lower > ld {
                out.push(format!("{}: M >= {} exceeds LD = {ld}", tag(r), r.lower));
            }
        }
    }
    for w in rows.windows(2) {
        if w[1].n > w[0].n && w[1].upper < w[0].lower {
            out.push(format!(
                "{}: M decreased from at least {} to at most {}",
                tag(&w[1]),
                w[0].lower,
                w[1].upper
            ));
        }
    }
    match family {
        "cube" => {
            // linear until saturation at d = VC
            let d = dims.vc.unwrap_or(0);
            for r in rows {
                let want = d.min(r.n as u32);
                if r.lower != want || r.upper != want {
                    out.push(format!(
                        "{}: M in [{}, {}] but min(d, n) = {want}",
                        tag(r),
                        r.lower,
                        r.upper
                    ));
                }
            }
        }
        "thresholds" => {
            for r in rows {
                let log_n = floor_log2(r.n as u64);
                if r.lower < log_n {
                    out.push(format!("{}: M >= {} is below floor(log n) = {log_n}", tag(r), r.lower));
                }
                if r.upper > 3 * log_n + 3 {
                    out.push(format!(
                        "{}: M <= {} exceeds 3 floor(log n) + 3 = {}",
                        tag(r),
                        r.upper,
                        3 * log_n + 3
                    ));
                }
            }
        }
        _ => {
            // a fixed class: nothing changes once every instance can be shown
            let tail: Vec<&TrichotomyRow> = rows.iter().filter(|r| r.n >= dims.domain).collect();
            if let Some(first) = tail.first() {
                for r in &tail[1..] {
                    if (r.lower, r.upper) != (first.lower, first.upper) {
                        out.push(format!(
                            "{}: tail moved from [{}, {}] to [{}, {}]",
                            tag(r),
                            first.lower,
                            first.upper,
                            r.lower,
                            r.upper
                        ));
                    }
                }
            }
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_trichotomy_csv<W: Write>(
    mut out: W,
    config: &ExperimentConfig,
    sweep: &TrichotomySweep,
) -> Result<()> {
    out.write_all(config.header().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "param",
        "n",
        "vc",
        "ld",
        "td",
        "M_exact_or_lower",
        "M_upper",
        "seconds",
    ])?;
    for r in &sweep.rows {
        w.write_record([
            r.family.clone(),
            r.param.to_string(),
            r.n.to_string(),
            opt(r.vc),
            opt(r.ld),
            opt(r.td),
            r.lower.to_string(),
            r.upper.to_string(),
            format!("{:.6}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AgnosticConfig {
    pub classes: Vec<ClassSpec>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: SequenceMode,
    /// `None` uses the default rate `√(8 ln|H|x| / n)`.
    pub eta: Option<f64>,
    pub budget: Budget,
    /// Confidence halfwidth in standard errors.
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgnosticRow {
    pub class: String,
    pub n: usize,
    pub trials: usize,
    pub report: RegretReport,
    /// `d·√k / (2√2)` for the shattered layout.
    pub lower_bound: Option<f64>,
    /// `√((n/2) ln|H|)`.
    pub upper_bound: f64,
}

#[derive(Clone, Debug, Default)]
pub struct AgnosticSweep {
    pub rows: Vec<AgnosticRow>,
    pub violations: Vec<String>,
}

/// Multiplicative weights against i.i.d. uniform labels, one row per class.
pub fn agnostic_sweep(config: &AgnosticConfig) -> Result<AgnosticSweep> {
    if config.trials < 100 {
        return Err(Error::contract(format!(
            "agnostic sweep needs at least 100 trials, got {}",
            config.trials
        )));
    }
    let mut sweep = AgnosticSweep::default();
    for spec in &config.classes {
        let class = spec.build()?;
        let mut adversary = random_label_adversary(config.mode, config.budget, config.seed);
        // layout only; trials reseed their own copies
        crate::strategies::AgnosticAdversary::choose_sequence(&mut adversary, &class, config.n)?;
        let learner = mw_learner(config.eta, config.seed);
        let mut report = run_agnostic(&class, &adversary, &learner, config.n, config.trials, config.seed)?;
        report.confidence_halfwidth = config.sigmas * report.std_error;
        let upper = (config.n as f64 / 2.0 * (class.hypothesis_count() as f64).ln()).sqrt();
        let row = AgnosticRow {
            class: spec.to_string(),
            n: config.n,
            trials: config.trials,
            lower_bound: adversary.lower_bound(),
            upper_bound: upper,
            report,
        };
        let ci = row.report.confidence_halfwidth;
        if let Some(lb) = row.lower_bound {
            if lb > row.report.mean_regret + ci {
                sweep.violations.push(format!(
                    "{}: lower bound {lb:.4} > mean regret {:.4} + {ci:.4}",
                    row.class, row.report.mean_regret
                ));
            }
        }
        if row.report.mean_regret > upper + ci {
            sweep.violations.push(format!(
                "{}: mean regret {:.4} > upper bound {upper:.4} + {ci:.4}",
                row.class, row.report.mean_regret
            ));
        }
        sweep.rows.push(row);
    }
    Ok(sweep)
}

pub fn write_agnostic_csv<W: Write>(
    mut out: W,
    config: &ExperimentConfig,
    sweep: &AgnosticSweep,
) -> Result<()> {
    out.write_all(config.header().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "n",
        "trials",
        "mean_regret",
        "lower_bound_value",
        "upper_bound_value",
        "ci_halfwidth",
    ])?;
    for r in &sweep.rows {
        w.write_record([
            r.class.clone(),
            r.n.to_string(),
            r.trials.to_string(),
            format!("{:.6}", r.report.mean_regret),
            opt(r.lower_bound.map(|v| format!("{v:.6}"))),
            format!("{:.6}", r.upper_bound),
            format!("{:.6}", r.report.confidence_halfwidth),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Budget used by sweeps: wide domains are fine for the linear-time
/// dimension searches on the sweep families.
pub fn sweep_budget() -> Budget {
    Budget {
        max_domain: 64,
        ..Budget::default()
    }
}

/// Build a zoo class from `family:p1,p2,...`.
pub fn parse_zoo_spec(text: &str, seed: u64) -> Result<ClassSpec> {
    let (family, params) = text.split_once(':').unwrap_or((text, ""));
    let params = params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::contract(format!("bad parameter `{p}` in `{text}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    ClassSpec::parse(&family.replace('-', "_"), &params, seed)
}
