use std::path::Path;
use std::process::{Command, Output};

fn owa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_owa")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen_instance(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut args = vec!["gen", "instance", "--n", "10", "--k", "6", "--seed", "5", "-o", &path];
    args.extend_from_slice(extra);
    let out = owa(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_and_solve_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "a.inst", &["--weights", "alpha:1e-2"]);
    let exact = owa(&["solve", &inst, "--json"]);
    assert!(exact.status.success());
    let exact: serde_json::Value = serde_json::from_str(&stdout(&exact)).unwrap();
    assert_eq!(exact["status"], "optimal");
    assert_eq!(exact["certificate_exact"], "1");
    let opt = exact["value"].as_f64().unwrap();

    for method in ["blocks:2", "blocks:4", "kmeans:3", "baseline"] {
        let out = owa(&["solve", &inst, "--method", method, "--json"]);
        assert!(out.status.success(), "{method}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["method"], method);
        assert!(v["value"].as_f64().unwrap() >= opt - 1e-9);
        if let Some(c) = v["certificate"].as_f64() {
            assert!(v["value"].as_f64().unwrap() <= c * opt + 1e-9);
        }
    }
    for criterion in ["minmax", "hurwicz:0.3"] {
        let out = owa(&["solve", &inst, "--criterion", criterion]);
        assert!(out.status.success(), "{criterion}");
        assert!(stdout(&out).starts_with("status: optimal\nvalue: "));
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "b.inst", &[]);
    let bad_weights = dir.path().join("bad.inst");
    let text = std::fs::read_to_string(&inst).unwrap();
    let last = text.lines().last().unwrap();
    std::fs::write(&bad_weights, text.replace(last, "0.5 0.1 0.1 0.1 0.1 0.0")).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", bad_weights.to_str().unwrap()],
        vec!["solve", &inst, "--method", "blocks:0"],
        vec!["solve", &inst, "--method", "kmeans:9"],
        vec!["solve", &inst, "--method", "magic"],
        vec!["solve", &inst, "--method", "blocks:2", "--criterion", "minmax"],
        vec!["solve", &inst, "--criterion", "hurwicz:1.5"],
        vec!["gen", "weights", "--k", "4", "--weights", "alpha:2"],
        vec!["gen", "instance", "--n", "3", "--k", "2", "--costs", "nominal:2"],
    ];
    for args in cases {
        let out = owa(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(owa(&["solve", "/nonexistent/x.inst"]).status.code(), Some(1));
}

#[test]
fn timeout_without_incumbent_exits_3() {
    // Items of weight 2 against demand 3 and capacity 3: the greedy start
    // overshoots, so no incumbent exists before the search begins.
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("owa-knapsack-instance 1\nname tight\nitems 30\nobjectives 2\ndemand 3\ncapacity 3\nrows\n");
    for i in 0..30 {
        text.push_str(&format!("2 {} {}\n", i % 7, (i * 3) % 5));
    }
    text.push_str("weights\n0.6 0.4\n");
    let path = dir.path().join("tight.inst");
    std::fs::write(&path, text).unwrap();
    let out = owa(&["solve", path.to_str().unwrap(), "--time-limit", "0"]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    // given time, the solver proves infeasibility instead
    let out = owa(&["solve", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("status: infeasible"));
}

#[test]
fn bounds_table_output() {
    let out = owa(&["bounds-table", "--alpha", "1e-3", "--l", "10"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("4.99"));
    let csv = owa(&["bounds-table", "--csv"]);
    let text = stdout(&csv);
    assert!(text.starts_with("k,alpha,l,bound,bound_rounded\n"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn export_mip_writes_lp() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "c.inst", &[]);
    let lp = dir.path().join("c.lp");
    let out = owa(&["export-mip", &inst, "-o", lp.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(lp).unwrap();
    assert!(text.contains("Minimize") && text.contains("Binary") && text.ends_with("End\n"));
    assert_eq!(text.matches(" ord_").count(), 36);
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        r#"seed = 9
repetitions = 2
kbar_grid = [1, 3, 6]
time_limit_secs = 10

[[instances]]
name = "small"
n = 9
k = 6
costs = "nominal:2"
weights = "pcentra:0.5K"
"#,
    )
    .unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let means = dir.path().join(format!("means-{name}"));
        let out = owa(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "-o",
            csv.to_str().unwrap(),
            "--means",
            means.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(csv).unwrap(), std::fs::read_to_string(means).unwrap())
    };
    let (a, means) = run("a.csv");
    let (b, _) = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# owa-knapsack sweep v1 toolkit="));
    assert!(text.lines().next().unwrap().ends_with("seed=9"));
    assert_eq!(text.lines().count(), 2 + 2 * (2 + 2 * 3));
    assert!(means.lines().nth(1).unwrap().starts_with("instance,method,target_kbar,runs,"));

    let desk = owa(&["sweep", "--desk-scale", "--print-config"]);
    assert!(stdout(&desk).contains("kbar_grid = [1, 2, 5, 10, 25, 50]"));
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "seed = 1\nkbar_grid = [0]\n").unwrap();
    assert_eq!(owa(&["sweep", "--config", broken.to_str().unwrap()]).status.code(), Some(2));
}
