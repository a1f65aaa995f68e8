use std::path::Path;
use std::process::{Command, Output};

fn tdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdlab")).args(args).env_remove("TDLAB_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_mrp_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let flags = ["gen-mrp", "--k", "10", "--b", "3", "--sigma", "0.1", "--gamma", "0.99", "--seed", "1", "--out"];
    let oa = tdlab(&[&flags[..], &[p(&a)]].concat());
    let ob = tdlab(&[&flags[..], &[p(&b)]].concat());
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert_eq!(stdout(&oa), stdout(&ob));
    assert!(stdout(&oa).contains("sha256="));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mrp = tdlab_core::envs::Mrp::from_text(&text).unwrap();
    assert_eq!(mrp.num_states(), 10);
    for row in mrp.transitions() {
        assert_eq!(row.len(), 10);
        assert_eq!(row.iter().filter(|&&x| x > 0.0).count(), 3);
    }
}

#[test]
fn gen_mrp_rejects_wide_branching() {
    let o = tdlab(&["gen-mrp", "--k", "10", "--b", "11", "--sigma", "0.1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("branching factor exceeds states"));
}

#[test]
fn seed_env_overrides_flag() {
    let run = |env: Option<&str>, seed: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_tdlab"));
        c.args(["gen-mrp", "--k", "5", "--b", "2", "--sigma", "0", "--seed", seed]);
        match env {
            Some(v) => c.env("TDLAB_SEED", v),
            None => c.env_remove("TDLAB_SEED"),
        };
        c.output().unwrap()
    };
    assert_eq!(run(Some("9"), "1").stdout, run(None, "9").stdout);
    assert_ne!(run(None, "1").stdout, run(None, "9").stdout);
    assert_eq!(run(Some("nine"), "1").status.code(), Some(2));
}

#[test]
fn full_grid_sweep_shape_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let o = tdlab(&[
        "sweep", "--task", "mrp(10,3,0.1)", "--repr", "tabular", "--variants", "accumulate,replace,true-online",
        "--paper-grid", "--runs", "3", "--steps", "30", "--seed", "5", "--out", p(&first),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&first).unwrap();
    assert!(text.starts_with("# manifest: {"));
    assert_eq!(text.lines().nth(1).unwrap(), "variant,alpha,lambda,metric_mean,metric_se,runs,diverged");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3 * 30 * 20);

    // λ = 0 rows agree across variants
    let lam0: Vec<&Vec<String>> = rows.iter().filter(|r| r[2].parse::<f64>().unwrap() == 0.0).collect();
    assert_eq!(lam0.len(), 90);
    for i in 0..30 {
        let base: f64 = lam0[i][3].parse().unwrap();
        for v in 1..3 {
            let other: f64 = lam0[v * 30 + i][3].parse().unwrap();
            assert_eq!(lam0[i][1], lam0[v * 30 + i][1]);
            assert!((base - other).abs() <= 1e-12 * base.abs().max(1.0), "{base} vs {other}");
        }
    }

    let again = dir.path().join("again.csv");
    let o = tdlab(&["sweep", "--config", p(&first), "--out", p(&again)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn explicit_flags_override_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let o = tdlab(&[
        "sweep", "--task", "random-walk-10", "--alphas", "0.1,0.2", "--lambdas", "0,0.9", "--runs", "2", "--out", p(&first),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = tdlab(&["sweep", "--config", p(&first), "--lambdas", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3 * 2);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.5 && r[5] == "2"));
}

#[test]
fn sweep_usage_errors() {
    assert_eq!(tdlab(&["sweep", "--alphas", "0.1"]).status.code(), Some(2));
    let o = tdlab(&["sweep", "--task", "mrp(10,3,0.1)", "--repr", "random-normalized", "--variants", "replace"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("binary"));
    assert_eq!(tdlab(&["sweep", "--env", "/nonexistent/env.json"]).status.code(), Some(2));
}

#[test]
fn sweep_accepts_env_files() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.json");
    assert!(tdlab(&["gen-mrp", "--k", "6", "--b", "2", "--sigma", "0.1", "--seed", "3", "--out", p(&env)]).status.success());
    let o = tdlab(&["sweep", "--env", p(&env), "--alphas", "0.1", "--lambdas", "0.5", "--runs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).len(), 3);
}

#[test]
fn verify_suites_pass() {
    for suite in ["closed-forms", "theorem1", "propositions"] {
        let o = tdlab(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        assert!(stdout(&o).contains("\"passed\":true"));
    }
    let o = tdlab(&["verify", "--suite", "equivalence", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("100/100 pass"));
    assert_eq!(tdlab(&["verify", "--suite", "everything"]).status.code(), Some(2));
}

#[test]
fn figure_one_offline_is_piecewise_constant() {
    let o = tdlab(&["figures", "--figure", "1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let episodes: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(episodes.len(), 3);
    for w in rows.windows(3) {
        // inside an episode (not its last step) the offline error is frozen
        if w[1][1] == w[2][1] && w[0][1] == w[1][1] {
            assert_eq!(w[0][2], w[1][2]);
        }
    }
    let last = rows.last().unwrap();
    assert!(last[2].parse::<f64>().unwrap() < 1.0);
}

#[test]
fn figure_three_asymptotes() {
    let o = tdlab(&["figures", "--figure", "3"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let get = |v: &str| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r[0] == v).map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect()
    };
    let acc = get("accumulate");
    let rep = get("replace");
    assert_eq!(rep.len(), 20);
    assert!(rep.iter().all(|&(_, e)| e == rep[0].1));
    assert_eq!(rep[0].1, acc[0].1);
    let at_one = acc.iter().find(|&&(l, _)| l == 1.0).unwrap().1;
    assert!(at_one <= 1.02, "{at_one}");
    assert!(rows.iter().all(|r| r[4] == "true"));
}

#[test]
fn figure_replay_and_bad_id() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fig2.csv");
    assert!(tdlab(&["figures", "--figure", "2", "--runs", "5", "--seed", "3", "--out", p(&f)]).status.success());
    let o = tdlab(&["figures", "--config", p(&f)]);
    assert!(o.status.success());
    assert_eq!(o.stdout, std::fs::read(&f).unwrap());
    assert_eq!(tdlab(&["figures", "--figure", "7"]).status.code(), Some(2));
    assert_eq!(tdlab(&["figures"]).status.code(), Some(2));
}

#[test]
fn figure_four_has_all_curves() {
    let o = tdlab(&["figures", "--figure", "4", "--runs", "2", "--steps", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), (3 + 3 + 2) * 20);
}
