use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pugraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pugraph")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn last_stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("stderr line")).expect("stderr is JSON")
}

#[test]
fn unit_path_laplacian_csv() {
    let out = pugraph(&["graph", "--path", "5", "--forward", "1,1,1,1", "--reverse", "1,1,1,1", "--emit", "laplacian"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "1,2,3,4,5");
    assert_eq!(rows[1], "1,-1,0,0,0");
    assert_eq!(rows[3], "0,-1,2,-1,0");
    assert_eq!(rows[5], "0,0,0,-1,1");
}

#[test]
fn emitted_graph_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for src in ["triangle.json", "p3-asymmetric.json"] {
        let original = pugraph::io::read_graph(&configs().join(src)).unwrap();
        let out = pugraph(&["graph", "--graph", configs().join(src).to_str().unwrap(), "--emit", "json"]);
        assert!(out.status.success());
        let path = dir.path().join(src);
        std::fs::write(&path, &out.stdout).unwrap();
        assert_eq!(pugraph::io::read_graph(&path).unwrap(), original);

        // and again through the CLI, byte for byte
        let again = pugraph(&["graph", "--graph", path.to_str().unwrap(), "--emit", "json"]);
        assert_eq!(again.stdout, out.stdout);
    }
}

#[test]
fn outputs_are_deterministic() {
    let runs = [
        vec!["consensus", "--path", "4", "--forward", "1.5,0.3,2.2", "--reverse", "0.7,1.1,0.4", "--x0", "[3,-1,4,1.5]"],
        vec!["simulate", "--path", "3", "--forward", "1,3", "--reverse", "2,4", "--x0", "[0,0,3]", "--t-max", "50"],
        vec!["robustness", "--sweep", "3:12", "--class", "trailing:1"],
        vec!["graph", "--path", "4", "--emit", "incidence"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for dir in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", dir.path().to_str().unwrap()]);
            assert!(pugraph(&full).status.success(), "{args:?}");
        }
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.iter().any(|n| n == "manifest.json"));
        for name in names.iter().filter(|n| *n != "manifest.json") {
            let x = std::fs::read(a.path().join(name)).unwrap();
            let y = std::fs::read(b.path().join(name)).unwrap();
            assert_eq!(x, y, "{args:?} {name:?}");
        }
    }
}

#[test]
fn manifest_lists_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = pugraph(&["robustness", "--sweep", "4:8", "--class", "central", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "robustness");
    assert_eq!(manifest["parameters"]["class"], "central");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,margin,omega_pc"));
    assert_eq!(csv.lines().nth(1), Some("4,2,0"));
}

#[test]
fn robustness_on_p3() {
    let out = pugraph(&["robustness", "--path", "3", "--edge", "1,2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["num"], serde_json::json!([1.0, 2.0]));
    assert_eq!(v["den"], serde_json::json!([1.0, 4.0, 3.0]));
    assert!((v["effective_margin"].as_f64().unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn consensus_value_on_asymmetric_path() {
    let cfg = configs().join("p3-asymmetric.json");
    let out = pugraph(&["consensus", "--graph", cfg.to_str().unwrap(), "--x0", "[0,0,3]"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((v["sum_p"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert_eq!(v["feasibility"]["feasible"], true);
}

#[test]
fn exit_codes() {
    let bad = pugraph(&["graph", "--path", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(last_stderr_json(&bad)["kind"], "bad_input");

    assert_eq!(pugraph(&["nonsense"]).status.code(), Some(2));
    assert_eq!(pugraph(&["consensus", "--path", "3", "--x0", "[1,2]"]).status.code(), Some(2));
    assert_eq!(pugraph(&["robustness", "--sweep", "5:3", "--class", "central"]).status.code(), Some(2));

    let infeasible = pugraph(&["consensus", "--path", "3", "--forward", "-0.6,1"]);
    assert_eq!(infeasible.status.code(), Some(3));
    assert_eq!(last_stderr_json(&infeasible)["kind"], "infeasible");

    let diverged = pugraph(&["simulate", "--path", "3", "--forward", "-0.6,1", "--x0", "[0,1,2]", "--t-max", "1000"]);
    assert_eq!(diverged.status.code(), Some(3));
    assert_eq!(stdout_json(&diverged)["verdict"]["verdict"], "diverged");
}

#[test]
fn bundled_artifacts_reproduce() {
    for name in ["p2-tfs", "p3-tfs", "p4-tfs", "p5-tfs", "fig3-sweeps", "salvo-positive"] {
        let out = pugraph(&["reproduce", name]);
        let v = stdout_json(&out);
        assert!(out.status.success(), "{name}: {:?}", v["mismatches"]);
        assert_eq!(v["pass"], true);
    }
    let p5 = stdout_json(&pugraph(&["reproduce", "p5-tfs"]));
    assert_eq!(p5["actual"]["entries"].as_array().unwrap().len(), 8);
}

#[test]
fn negative_salvo_leaves_the_hull() {
    let out = pugraph(&["reproduce", "salvo-negative"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["actual"]["in_hull"], false);
    assert_eq!(v["actual"]["all_intercepted"], true);
}

#[test]
fn salvo_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("salvo-positive.json");
    let out = pugraph(&["salvo", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert!(summary["spread"].as_f64().unwrap() <= 0.05);
    assert_eq!(summary["in_hull"], true);
    let csv = std::fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    assert!(csv.starts_with("t,r_1,theta_deg_1,gamma_m_deg_1,a_m_1,t_go_1,r_2"));
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"][0], cfg.to_str().unwrap());
}

#[test]
fn thread_cap_is_validated() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pugraph"))
            .args(["robustness", "--sweep", "3:8", "--class", "leading:1"])
            .env("PUGRAPH_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}
