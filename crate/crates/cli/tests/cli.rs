use std::fs;
use std::process::{Command, Output};

fn transduct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transduct"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn dims_prints_name_value_lines() {
    let o = transduct(&["dims", "--class", "cube:3", "--dim", "all"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in ["vc 3", "ld 3", "nd 3", "ds 3"] {
        assert!(text.lines().any(|l| l == line), "missing `{line}` in\n{text}");
    }
}

#[test]
fn dims_witness_lines_are_comments() {
    let o = transduct(&["dims", "--class", "thresholds:7", "--dim", "td", "--witness"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "td 7");
    assert!(lines[1..].iter().all(|l| l.starts_with('#')));
}

#[test]
fn dims_reads_hyp_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.hyp");
    // every labeling of two points
    fs::write(&path, "HYP 1 2 2 4\n0 0\n0 1\n1 0\n1 1\n").unwrap();
    let o = transduct(&["dims", "--class", path.to_str().unwrap(), "--dim", "vc"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "vc 2\n");
}

#[test]
fn value_exact_and_bounds() {
    let o = transduct(&["value", "--class", "cube:3", "--n", "5", "--exact"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("M 3"));

    let o = transduct(&["value", "--class", "thresholds:7", "--n", "7", "--bounds"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let f: Vec<&str> = text.split_whitespace().collect();
    assert_eq!((f[0], f[2]), ("lower", "upper"));
    let (lo, hi): (u32, u32) = (f[1].parse().unwrap(), f[3].parse().unwrap());
    // floor(log 7) <= M(thresholds(7), 7) <= LD = 3
    assert!(2 <= lo && lo <= hi && hi <= 3);
}

#[test]
fn value_over_budget_exits_3() {
    let o = transduct(&["value", "--class", "tree-cube:16", "--n", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn play_writes_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = transduct(&[
        "play",
        "--class",
        "cube:3",
        "--learner",
        "halving",
        "--adversary",
        "vc",
        "--n",
        "3",
        "--transcript",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("mistakes 3"));
    let csv = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x,prediction,label,mistake,version_space_size");
    assert_eq!(lines.len(), 4);
    // the version space halves on each flipped round
    let sizes: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(sizes, ["4", "2", "1"]);
}

#[test]
fn play_every_learner_against_bfs_tree() {
    for learner in ["halving", "soa", "mw", "best-response", "random"] {
        let o = transduct(&[
            "play", "--class", "tree-cube:4", "--learner", learner, "--adversary", "bfs-tree",
            "--n", "16",
        ]);
        assert!(o.status.success(), "{learner}: {}", String::from_utf8_lossy(&o.stderr));
        let mistakes: usize = stdout(&o)
            .lines()
            .find_map(|l| l.strip_prefix("mistakes "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(mistakes >= 1, "{learner}");
    }
}

#[test]
fn play_agnostic_reports_regret() {
    let o = transduct(&[
        "play", "--class", "cube:2", "--learner", "mw", "--adversary", "random", "--n", "100",
        "--seed", "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("best_hypothesis_mistakes"));
    assert!(text.contains("regret"));
}

#[test]
fn play_is_reproducible() {
    let args = [
        "play", "--class", "thresholds:7", "--learner", "random", "--adversary", "dyadic", "--n",
        "7", "--seed", "9",
    ];
    assert_eq!(stdout(&transduct(&args)), stdout(&transduct(&args)));
}

#[test]
fn zoo_emit_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.hyp");
    let o = transduct(&[
        "zoo", "emit", "--family", "thresholds", "--param", "3", "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "HYP 1 3 2 4\n0 0 0\n1 0 0\n1 1 0\n1 1 1\n"
    );
    let o = transduct(&["dims", "--class", path.to_str().unwrap(), "--dim", "ld"]);
    assert_eq!(stdout(&o), "ld 2\n");
}

#[test]
fn zoo_emit_refuses_large_implicit_classes() {
    let o = transduct(&["zoo", "emit", "--family", "tree-cube", "--param", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("implicit"));
}

const TREE: &str = "LTREE 1 1\n- 1 0 1\n0 0 0 1\n1 2 0 1\n";

#[test]
fn tree_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ltree");
    fs::write(&path, TREE).unwrap();
    let p = path.to_str().unwrap();
    let o = transduct(&["tree", "verify", "--tree", p, "--class", "thresholds:3", "--mtd"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("shattered yes\n"));
    let o = transduct(&["tree", "verify", "--tree", p, "--class", "singleton:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tree_ramsey_from_colors() {
    let o = transduct(&["tree", "ramsey", "--colors", "0,1,1,0,0,1,1", "--p", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    // 3 levels with p = 2, q = 2: the all-1 right subtree rooted at node 2
    assert!(text.contains("color 1\n"), "{text}");
    assert!(text.contains("nodes 2,5,6\n"), "{text}");
}

#[test]
fn trichotomy_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = transduct(&[
            "sweep",
            "trichotomy",
            "--family",
            "cube",
            "--param-range",
            "3..3",
            "--n-range",
            "1..6",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "family,param,n,vc,ld,td,M_exact_or_lower,M_upper,seconds");
    let m: Vec<&str> = body[1..].iter().map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(m, ["1", "2", "3", "3", "3", "3"]);
}

#[test]
fn agnostic_sweep_csv() {
    let o = transduct(&[
        "sweep", "agnostic", "--class", "singleton:2,cube:2", "--n", "50", "--trials", "200",
        "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body[0],
        "class,n,trials,mean_regret,lower_bound_value,upper_bound_value,ci_halfwidth"
    );
    assert!(body[1].starts_with("singleton(2),50,200,0.000000,"));
    assert_eq!(body.len(), 3);
}

#[test]
fn agnostic_sweep_rejects_few_trials() {
    let o = transduct(&["sweep", "agnostic", "--class", "cube:2", "--n", "50", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn khinchine_table_and_budget() {
    let o = transduct(&["khinchine", "--k-max", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\n2,1.000000,1.000000,true\n"));
    assert!(text.contains("\n8,2.187500,2.000000,true\n"));
    let o = transduct(&["khinchine", "--k-max", "30"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(transduct(&["bogus"]).status.code(), Some(1));
    assert_eq!(transduct(&["dims", "--class", "no-such-family:1"]).status.code(), Some(1));
}
