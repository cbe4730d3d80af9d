use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use transduct_core::dimensions::{Budget, Dim, DimensionReport};
use transduct_core::experiments::{
    agnostic_sweep, khinchine_exact, khinchine_monte_carlo, parse_zoo_spec, sweep_budget,
    trichotomy_sweep, value_bracket, write_agnostic_csv, write_trichotomy_csv, AgnosticConfig,
    ExperimentConfig, TrichotomyConfig, CONFIDENCE_SIGMAS, KHINCHINE_MAX_K,
};
use transduct_core::game::{play_agnostic, run_realizable, transductive_value, Transcript};
use transduct_core::hypothesis::{parse_hyp, write_hyp};
use transduct_core::strategies::{
    best_response_learner, bfs_tree_adversary, dyadic_adversary, halving_learner,
    minimax_adversary, mw_learner, random_label_adversary, random_learner, soa_learner,
    vc_adversary, Adversary, AgnosticAdversary, Learner, SequenceMode, Thresholds,
};
use transduct_core::trees::{
    mtd_from_tree, parse_ltree, ramsey::ceil_log2, ramsey_multi_color, ramsey_two_color, shatters,
    verify_subtree, LittlestoneTree, TreeColoring,
};
use transduct_core::zoo::ClassSpec;
use transduct_core::{Error, HypothesisClass};

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Assertion(_) => 2,
            Failure::Core(Error::BudgetExceeded { .. }) => 3,
            Failure::Core(Error::ProtocolViolation { .. }) => 4,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

/// Transductive online learning laboratory.
#[derive(Parser, Debug)]
#[command(name = "transduct", version)]
struct Cli {
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Memo-table limit for exact searches.
    #[arg(long, global = true)]
    budget_states: Option<u64>,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte-Carlo confidence halfwidth, in standard errors.
    #[arg(long, global = true, default_value_t = CONFIDENCE_SIGMAS)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Combinatorial dimensions of a class.
    Dims {
        /// A HYP v1 file or a zoo spec such as `thresholds:7`.
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "all")]
        dim: String,
        /// Append certificate lines prefixed with `#`.
        #[arg(long)]
        witness: bool,
    },
    /// The game value M(H, n), exactly or as a proven bracket.
    Value {
        #[arg(long)]
        class: String,
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "bounds")]
        exact: bool,
        #[arg(long)]
        bounds: bool,
    },
    /// Play one game and report the mistakes.
    Play(PlayArgs),
    /// Class generators.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
    /// Littlestone tree utilities.
    Tree {
        #[command(subcommand)]
        command: TreeCommand,
    },
    /// Experiment sweeps emitting CSV.
    Sweep {
        #[command(subcommand)]
        command: SweepCommand,
    },
    /// Exact (or sampled) expected absolute sum of random signs.
    Khinchine {
        #[arg(long, default_value_t = 20)]
        k_max: u32,
        /// Estimate by sampling instead, with this many draws per k.
        #[arg(long)]
        monte_carlo: Option<usize>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum LearnerKind {
    Halving,
    Soa,
    Mw,
    BestResponse,
    Random,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AdversaryKind {
    Vc,
    Dyadic,
    BfsTree,
    Minimax,
    Random,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ThresholdKind {
    Guaranteed,
    Scaled,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeKind {
    Shattered,
    Cycle,
}

impl From<ModeKind> for SequenceMode {
    fn from(m: ModeKind) -> Self {
        match m {
            ModeKind::Shattered => SequenceMode::Shattered,
            ModeKind::Cycle => SequenceMode::Cycle,
        }
    }
}

#[derive(Args, Debug)]
struct PlayArgs {
    #[arg(long)]
    class: String,
    #[arg(long, value_enum)]
    learner: LearnerKind,
    #[arg(long, value_enum)]
    adversary: AdversaryKind,
    #[arg(long)]
    n: usize,
    /// Transcript CSV path.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Threshold schedule of the bfs-tree adversary.
    #[arg(long, value_enum, default_value = "guaranteed")]
    thresholds: ThresholdKind,
    /// LTREE v1 file for the bfs-tree adversary.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Instance order of the random adversary.
    #[arg(long, value_enum, default_value = "shattered")]
    mode: ModeKind,
    /// Learning rate of the mw learner.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum ZooCommand {
    /// Write a class in HYP v1 format.
    Emit {
        #[arg(long)]
        family: String,
        /// Family parameters, comma separated.
        #[arg(long, value_delimiter = ',')]
        param: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum TreeCommand {
    /// Check that a class shatters a tree.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        class: String,
        /// Also extract a multiclass threshold chain from the tree.
        #[arg(long)]
        mtd: bool,
    },
    /// Extract a monochromatic subtree from a node coloring.
    Ramsey {
        /// Host tree; nodes are colored by one hypothesis's labels.
        #[arg(long, requires = "class")]
        tree: Option<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        /// Hypothesis index whose labels color the tree.
        #[arg(long, default_value_t = 0)]
        hypothesis: u64,
        /// Explicit node colors in breadth-first order, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "tree")]
        colors: Vec<u32>,
        /// Number of colors; defaults to the largest color plus one.
        #[arg(long)]
        k: Option<u32>,
        /// Two-color mode: target levels for color 0 (q is implied).
        #[arg(long)]
        p: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum SweepCommand {
    /// Game values across a family and a horizon range.
    Trichotomy {
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = parse_range)]
        param_range: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_range)]
        n_range: RangeInclusive<usize>,
        /// Record wall-clock seconds per row.
        #[arg(long)]
        timing: bool,
    },
    /// Agnostic regret of multiplicative weights against random labels.
    Agnostic {
        /// Zoo specs, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        class: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_enum, default_value = "shattered")]
        mode: ModeKind,
        #[arg(long)]
        eta: Option<f64>,
    },
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| format!("bad range end `{b}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

struct Ctx {
    seed: u64,
    budget: Budget,
    out: Option<PathBuf>,
    tolerance: f64,
}

impl Ctx {
    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_with(&self, f: impl FnOnce(&mut Vec<u8>) -> Outcome) -> Outcome {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.emit(&String::from_utf8_lossy(&buf))
    }
}

/// A class from a HYP v1 file, or from a zoo spec when no such file exists.
fn load_class(arg: &str, seed: u64) -> Outcome<HypothesisClass> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(parse_hyp(&fs::read_to_string(path)?)?);
    }
    let spec = parse_zoo_spec(arg, seed).map_err(|e| {
        Failure::Usage(format!("`{arg}` is neither a readable file nor a zoo spec ({e})"))
    })?;
    Ok(spec.build()?)
}

fn load_tree(path: &Path) -> Outcome<LittlestoneTree> {
    Ok(parse_ltree(&fs::read_to_string(path)?)?)
}

fn dims(ctx: &Ctx, class: &str, dim: &str, witness: bool) -> Outcome {
    let class = load_class(class, ctx.seed)?;
    let dims = Dim::parse(dim)?;
    let report = DimensionReport::compute(&class, &dims, &ctx.budget);
    report.verify(&class)?;
    ctx.emit(&report.render(&dims, witness))?;
    // a single requested dimension that could not be computed is an error
    if dims.len() == 1 {
        if let Some((_, e)) = report.skipped.first() {
            return Err(e.clone().into());
        }
    }
    Ok(())
}

fn value(ctx: &Ctx, class: &str, n: usize, bounds: bool) -> Outcome {
    let class = load_class(class, ctx.seed)?;
    if bounds {
        let (lower, upper) = value_bracket(&class, n, &ctx.budget);
        return ctx.emit(&format!("lower {lower} upper {upper}\n"));
    }
    let v = transductive_value(&class, n, &ctx.budget)?;
    ctx.emit(&format!("M {}\n# sequence {:?}\n", v.value, v.sequence))
}

fn make_learner(kind: LearnerKind, args: &PlayArgs, ctx: &Ctx) -> Box<dyn Learner> {
    match kind {
        LearnerKind::Halving => Box::new(halving_learner()),
        LearnerKind::Soa => Box::new(soa_learner(ctx.budget)),
        LearnerKind::Mw => Box::new(mw_learner(args.eta, ctx.seed)),
        LearnerKind::BestResponse => Box::new(best_response_learner(ctx.budget)),
        LearnerKind::Random => Box::new(random_learner(ctx.seed)),
    }
}

fn write_transcript(path: &Path, tr: &Transcript) -> Outcome {
    let file = fs::File::create(path)?;
    tr.write_csv(std::io::BufWriter::new(file))?;
    Ok(())
}

fn play(ctx: &Ctx, args: &PlayArgs) -> Outcome {
    let class = load_class(&args.class, ctx.seed)?;
    let mut learner = make_learner(args.learner, args, ctx);
    let mut summary = String::new();
    let adversary_name;
    let tr = if let AdversaryKind::Random = args.adversary {
        let mut adv = random_label_adversary(args.mode.into(), ctx.budget, ctx.seed);
        learner.reseed(ctx.seed, 0);
        adv.reseed(ctx.seed, 1);
        let (tr, best) = play_agnostic(&class, &mut adv, learner.as_mut(), args.n)?;
        adversary_name = adv.name();
        summary.push_str(&format!("best_hypothesis_mistakes {best}\n"));
        summary.push_str(&format!("regret {}\n", tr.mistakes() as i64 - best as i64));
        if let Some(lb) = adv.lower_bound() {
            summary.push_str(&format!("# expected regret lower bound {lb:.6}\n"));
        }
        tr
    } else {
        let mut adv: Box<dyn Adversary> = match args.adversary {
            AdversaryKind::Vc => Box::new(vc_adversary(ctx.budget)),
            AdversaryKind::Dyadic => Box::new(dyadic_adversary(ctx.budget)),
            AdversaryKind::BfsTree => {
                let tree = args.tree.as_deref().map(load_tree).transpose()?;
                let thresholds = match args.thresholds {
                    ThresholdKind::Guaranteed => Thresholds::Guaranteed,
                    ThresholdKind::Scaled => Thresholds::Scaled,
                };
                Box::new(bfs_tree_adversary(tree, thresholds, ctx.budget))
            }
            AdversaryKind::Minimax => Box::new(minimax_adversary(ctx.budget)),
            AdversaryKind::Random => unreachable!("handled above"),
        };
        let tr = run_realizable(&class, adv.as_mut(), learner.as_mut(), args.n, ctx.seed)?;
        adversary_name = adv.name();
        tr
    };
    if let Some(p) = &args.transcript {
        write_transcript(p, &tr)?;
    }
    let mut text = format!(
        "learner {}\nadversary {}\nrounds {}\nmistakes {}\n",
        learner.name(),
        adversary_name,
        tr.sequence.len(),
        tr.mistakes()
    );
    text.push_str(&summary);
    ctx.emit(&text)
}

fn zoo_emit(ctx: &Ctx, family: &str, params: &[usize]) -> Outcome {
    let spec = ClassSpec::parse(&family.replace('-', "_"), params, ctx.seed)?;
    let class = spec.build()?;
    let class = if class.is_explicit() {
        class
    } else {
        class.materialize(ctx.budget.max_hypotheses).inspect_err(|_| {
            eprintln!("{spec} is implicit and too large to write out");
        })?
    };
    ctx.emit(&write_hyp(&class))
}

fn tree_verify(ctx: &Ctx, tree: &Path, class: &str, want_mtd: bool) -> Outcome {
    let tree = load_tree(tree)?;
    let class = load_class(class, ctx.seed)?;
    let Some(ids) = shatters(&class, &tree)? else {
        ctx.emit("shattered no\n")?;
        return Err(Failure::Assertion(format!(
            "the class does not shatter the depth-{} tree",
            tree.depth()
        )));
    };
    let mut text = format!("shattered yes\ndepth {}\n", tree.depth());
    for (u, h) in ids.iter().enumerate() {
        text.push_str(&format!("# branch {u:0w$b} hypothesis {h}\n", w = tree.depth() as usize + 1));
    }
    if want_mtd {
        let w = mtd_from_tree(&class, &tree)?;
        if !w.verify(&class) {
            return Err(Failure::Assertion("extracted chain failed re-verification".into()));
        }
        text.push_str(&format!("mtd_chain {}\n# {w}\n", w.len()));
    }
    ctx.emit(&text)
}

struct RamseyArgs<'a> {
    tree: Option<&'a Path>,
    class: Option<&'a str>,
    hypothesis: u64,
    colors: &'a [u32],
    k: Option<u32>,
    p: Option<u32>,
}

fn tree_ramsey(ctx: &Ctx, a: RamseyArgs<'_>) -> Outcome {
    let colors: Vec<u32> = match (a.tree, a.class) {
        (Some(t), Some(c)) => {
            let tree = load_tree(t)?;
            let class = load_class(c, ctx.seed)?;
            if a.hypothesis >= class.hypothesis_count() {
                return Err(Failure::Usage(format!(
                    "hypothesis {} out of range (class has {})",
                    a.hypothesis,
                    class.hypothesis_count()
                )));
            }
            tree.instances()
                .iter()
                .map(|&x| class.evaluate(a.hypothesis, x))
                .collect::<Result<_, _>>()?
        }
        _ if !a.colors.is_empty() => a.colors.to_vec(),
        _ => return Err(Failure::Usage("give --colors or --tree with --class".into())),
    };
    let k = a.k.unwrap_or_else(|| colors.iter().max().map_or(1, |c| c + 1));
    let coloring = TreeColoring::new(colors.clone(), k)?;
    let levels = coloring.levels();
    let col = |v: usize| colors[v];
    let (sub, need, sides) = match a.p {
        Some(p) => {
            if k > 2 {
                return Err(Failure::Usage("--p needs a two-color tree".into()));
            }
            if p == 0 || p > levels {
                return Err(Failure::Usage(format!("--p must lie in 1..={levels}")));
            }
            let q = levels + 1 - p;
            let sub = ramsey_two_color(&coloring, p, q)?;
            let need = if sub.color == 0 { p } else { q };
            (sub, need as f64, true)
        }
        None => {
            let sub = ramsey_multi_color(&coloring);
            let need = levels as f64 / (1u64 << ceil_log2(k as u64)) as f64;
            (sub, need, false)
        }
    };
    verify_subtree(levels, &col, &sub, sub.color, need, sides).map_err(Failure::Assertion)?;
    ctx.emit(&format!(
        "color {}\nlevels {}\nguaranteed {need}\nnodes {}\n",
        sub.color,
        sub.levels,
        sub.nodes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ))
}

fn range_text(r: &RangeInclusive<usize>) -> String {
    format!("{}..{}", r.start(), r.end())
}

fn sweep_trichotomy(
    ctx: &Ctx,
    family: &str,
    params: RangeInclusive<usize>,
    ns: RangeInclusive<usize>,
    timing: bool,
) -> Outcome {
    let header = ExperimentConfig::new("sweep trichotomy")
        .set("family", family)
        .set("param_range", range_text(&params))
        .set("n_range", range_text(&ns))
        .set("seed", ctx.seed)
        .set("budget_states", ctx.budget.max_states);
    let config = TrichotomyConfig {
        family: family.to_string(),
        params,
        ns,
        budget: ctx.budget,
        timing,
    };
    let sweep = trichotomy_sweep(&config)?;
    ctx.emit_with(|buf| Ok(write_trichotomy_csv(buf, &header, &sweep)?))?;
    report_violations(&sweep.violations)
}

fn sweep_agnostic(
    ctx: &Ctx,
    classes: &[String],
    n: usize,
    trials: usize,
    mode: ModeKind,
    eta: Option<f64>,
) -> Outcome {
    let specs = classes
        .iter()
        .map(|c| parse_zoo_spec(c, ctx.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let header = ExperimentConfig::new("sweep agnostic")
        .set("classes", classes.join(" "))
        .set("n", n)
        .set("trials", trials)
        .set("mode", format!("{mode:?}").to_lowercase())
        .set("eta", eta.map_or("default".to_string(), |e| e.to_string()))
        .set("seed", ctx.seed)
        .set("tolerance", ctx.tolerance);
    let config = AgnosticConfig {
        classes: specs,
        n,
        trials,
        seed: ctx.seed,
        mode: mode.into(),
        eta,
        budget: ctx.budget,
        sigmas: ctx.tolerance,
    };
    let sweep = agnostic_sweep(&config)?;
    ctx.emit_with(|buf| Ok(write_agnostic_csv(buf, &header, &sweep)?))?;
    report_violations(&sweep.violations)
}

fn report_violations(violations: &[String]) -> Outcome {
    for v in violations {
        eprintln!("violated: {v}");
    }
    match violations.len() {
        0 => Ok(()),
        n => Err(Failure::Assertion(format!("{n} inequality check(s) failed"))),
    }
}

fn khinchine(ctx: &Ctx, k_max: u32, samples: Option<usize>) -> Outcome {
    let mut text = String::new();
    let mut failed = Vec::new();
    match samples {
        None => {
            if k_max > KHINCHINE_MAX_K {
                khinchine_exact(k_max)?;
            }
            text.push_str("k,expected_abs_sum,bound,holds\n");
            for k in 0..=k_max {
                let r = khinchine_exact(k)?;
                text.push_str(&format!(
                    "{k},{:.6},{:.6},{}\n",
                    r.expected_abs_sum,
                    r.bound,
                    r.bound_holds()
                ));
                if !r.bound_holds() {
                    failed.push(format!("k={k}: {} < {}", r.expected_abs_sum, r.bound));
                }
            }
        }
        Some(s) => {
            text.push_str("k,mean_abs_sum,std_error,bound,holds\n");
            for k in 0..=k_max {
                let (mean, se) = khinchine_monte_carlo(k, s, ctx.seed);
                let bound = (k as f64 / 2.0).sqrt();
                let holds = mean + ctx.tolerance * se >= bound;
                text.push_str(&format!("{k},{mean:.6},{se:.6},{bound:.6},{holds}\n"));
                if !holds {
                    failed.push(format!("k={k}: {mean} + {}*{se} < {bound}", ctx.tolerance));
                }
            }
        }
    }
    ctx.emit(&text)?;
    report_violations(&failed)
}

fn run(cli: Cli) -> Outcome {
    let mut budget = match &cli.command {
        Command::Sweep { .. } => sweep_budget(),
        _ => Budget::default(),
    };
    if let Some(s) = cli.budget_states {
        budget.max_states = s;
    }
    if !(cli.tolerance.is_finite() && cli.tolerance >= 0.0) {
        return Err(Failure::Usage(format!("bad tolerance {}", cli.tolerance)));
    }
    let ctx = Ctx {
        seed: cli.seed,
        budget,
        out: cli.out,
        tolerance: cli.tolerance,
    };
    match cli.command {
        Command::Dims {
            class,
            dim,
            witness,
        } => dims(&ctx, &class, &dim, witness),
        Command::Value {
            class, n, bounds, ..
        } => value(&ctx, &class, n, bounds),
        Command::Play(args) => play(&ctx, &args),
        Command::Zoo {
            command: ZooCommand::Emit { family, param },
        } => zoo_emit(&ctx, &family, &param),
        Command::Tree { command } => match command {
            TreeCommand::Verify { tree, class, mtd } => tree_verify(&ctx, &tree, &class, mtd),
            TreeCommand::Ramsey {
                tree,
                class,
                hypothesis,
                colors,
                k,
                p,
            } => tree_ramsey(
                &ctx,
                RamseyArgs {
                    tree: tree.as_deref(),
                    class: class.as_deref(),
                    hypothesis,
                    colors: &colors,
                    k,
                    p,
                },
            ),
        },
        Command::Sweep { command } => match command {
            SweepCommand::Trichotomy {
                family,
                param_range,
                n_range,
                timing,
            } => sweep_trichotomy(&ctx, &family, param_range, n_range, timing),
            SweepCommand::Agnostic {
                class,
                n,
                trials,
                mode,
                eta,
            } => sweep_agnostic(&ctx, &class, n, trials, mode, eta),
        },
        Command::Khinchine {
            k_max,
            monte_carlo,
        } => khinchine(&ctx, k_max, monte_carlo),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is reserved for failed assertions
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
