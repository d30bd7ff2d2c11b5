use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot-lw"))
        .args(args)
        .env_remove("CARNOT_LW_RNORM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lw_verify_on_gaussians_passes() {
    let o = run(&["lw-verify", "--group", r#"{"d":0,"n":1,"alpha":[1]}"#, "--preset", "gauss", "--res", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lw"));
}

#[test]
fn malformed_alpha_is_a_parse_error() {
    for alpha in ["[-1]", "[0]"] {
        let group = format!(r#"{{"d":0,"n":1,"alpha":{alpha}}}"#);
        let o = run(&["lw-verify", "--group", &group]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("alpha_1 <= ... <= alpha_n"), "{}", stderr(&o));
    }
    let o = run(&["set-lw", "--group", r#"{"d":0,"n":2,"alpha":[2,1]}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nondecreasing"), "{}", stderr(&o));
    let o = run(&["lw-verify", "--group", r#"{"d":0,"n":2,"alpha":[1]}"#]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn heisenberg_squared_product_constants() {
    let o = run(&["product-combine", "--left", "h1", "--right", "h1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("c = [2/7, 2/7, 2/7, 2/7]"), "{out}");
    assert!(out.contains("(6/7) ln R"), "{out}");
    let o = run(&["product-combine", "--left", "h1", "--right", "line"]);
    assert!(stdout(&o).contains("c = [1/4, 1/2, 1/2]"));
    let o = run(&["product-combine", "--left", "line", "--right", "line"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_rejected() {
    assert_eq!(run(&["suite", "everything"]).status.code(), Some(2));
}

#[test]
fn suites_pass() {
    for name in ["products", "entropy", "sobolev", "paper-core"] {
        let o = run(&["suite", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
        assert!(!stdout(&o).contains(" NO\n"));
    }
}

#[test]
fn reports_are_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run_id in ["a", "b"] {
        let prefix = dir.path().join(run_id);
        let o = run(&["set-lw", "--group", "h1", "--res", "32", "--seed", "3", "--out", prefix.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let jsonl = std::fs::read(prefix.with_extension("jsonl")).unwrap();
        let csv = std::fs::read(prefix.with_extension("csv")).unwrap();
        files.push((jsonl, csv));
    }
    assert_eq!(files[0], files[1]);
    let line: serde_json::Value = serde_json::from_slice(files[0].0.split(|b| *b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["metadata"]["seed"], 3);
    assert_eq!(line["pass"], true);
    let csv = String::from_utf8(files[0].1.clone()).unwrap();
    assert!(csv.starts_with("name,lhs,rhs,deficit,tolerance,pass\nset-lw,"), "{csv}");
}

#[test]
fn r_norm_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("r");
    let o = Command::new(env!("CARGO_BIN_EXE_carnot-lw"))
        .args(["lw-verify", "--group", "h1", "--res", "32", "--out", prefix.to_str().unwrap()])
        .env("CARNOT_LW_RNORM", "3.5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(prefix.with_extension("jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["metadata"]["r_norm"], 3.5);
    let o = Command::new(env!("CARGO_BIN_EXE_carnot-lw"))
        .args(["lw-verify", "--group", "h1"])
        .env("CARNOT_LW_RNORM", "-1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn a_norm_below_the_computed_bound_is_a_violation() {
    // the disk alone certifies ‖R‖ ≥ 6^{1/3} ≈ 1.817
    let o = run(&["radon-norm", "--family", "disks", "--res", "128", "--r-norm", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"lb\""));
    let o = run(&["radon-norm", "--family", "disks", "--res", "128"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unresolvable_inputs_are_numerical_failures() {
    // a ball that reaches the faces cannot be mollified inside the box
    let o = run(&["iso-check", "--group", "h1", "--radius", "0.95", "--res", "32"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn help_lists_every_subcommand() {
    let out = stdout(&run(&["--help"]));
    for cmd in [
        "bl-constant",
        "lw-verify",
        "nonlinear-lw",
        "set-lw",
        "entropy-check",
        "proof-chain",
        "radon-norm",
        "product-combine",
        "sobolev-check",
        "iso-check",
        "suite",
    ] {
        assert!(out.contains(cmd), "{cmd} missing from --help");
    }
}

#[test]
fn bl_constant_of_geometric_data() {
    for datum in ["lw:3", "pair:2", "corank:h1"] {
        let o = run(&["bl-constant", "--datum", datum]);
        assert_eq!(o.status.code(), Some(0), "{datum}");
        assert!(stdout(&o).contains("BL estimate 1.000000"), "{}", stdout(&o));
    }
    assert_eq!(run(&["bl-constant", "--datum", "lw:x"]).status.code(), Some(2));
}
