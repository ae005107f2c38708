use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jetlie_cli::dsl::{parse_document, print_document};

fn examples() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "jet"))
        .collect();
    v.sort();
    v
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn jetlie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetlie")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bundled_examples_round_trip() {
    let files = examples();
    assert!(files.len() >= 10);
    for f in files {
        let src = std::fs::read_to_string(&f).unwrap();
        let doc = parse_document(&src).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let printed = print_document(&doc);
        assert_eq!(parse_document(&printed).unwrap(), doc, "{}", f.display());
        assert_eq!(print_document(&parse_document(&printed).unwrap()), printed);
    }
}

#[test]
fn solve_third_order_has_seven_generators() {
    let o = jetlie(&["solve", &example("third_order.jet"), "--degree", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("dimension 7 at ansatz degree 3 (stabilized)"), "{s}");
    assert!(s.contains("dimension bound: 7"));
}

#[test]
fn fourth_order_scalar_closed_form_matches() {
    let o = jetlie(&["verify-closed-forms", "--kappa", "4", "--n", "1", "--m", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("R4 (n=1, m=1): match")));
}

#[test]
fn prose_reading_mismatch_exits_one() {
    let o = jetlie(&[
        "verify-closed-forms", "--kappa", "3", "--n", "2", "--m", "1", "--reading", "prose",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("32 mismatches"));
}

#[test]
fn degenerate_manifold_report() {
    let o = jetlie(&["manifold", "analyze", &example("degenerate_plane.jet")]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "solvable with respect to the parameters (l0 = 1)");
    assert!(lines[1].starts_with("not solvable with respect to the variables"));
    assert_eq!(lines[2], "degenerate: witness d/dx2");
    assert!(s.contains("  u1[x2] = 0"));
}

#[test]
fn line_gives_second_derivative_zero() {
    let o = jetlie(&["manifold", "analyze", &example("line.jet")]);
    let s = stdout(&o);
    assert!(s.contains("associated system of order 2:\n  u1[x1,x1] = 0\n"), "{s}");
    assert!(s.contains("nu1 = -chi1*x1 + u1"));
}

#[test]
fn json_is_deterministic() {
    for args in [
        vec!["--format", "json", "solve", &example("flat_second_order.jet"), "--degree", "2"],
        vec!["--format", "json", "manifold", "analyze", &example("pair.jet")],
        vec!["--format", "json", "closure", "--family", "eq58", "--n", "1", "--m", "1", "--kappa", "3"],
    ] {
        let a = stdout(&jetlie(&args));
        let b = stdout(&jetlie(&args));
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        for key in ["command", "input_digest", "results", "residuals", "dimensions", "generators", "ranks"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn json_solve_lists_coefficients() {
    let o = jetlie(&["--format", "json", "solve", &example("third_order.jet"), "--degree", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dimensions"]["dimension"], 7);
    assert_eq!(v["dimensions"]["theorem1_bound"], "7");
    assert_eq!(v["generators"].as_array().unwrap().len(), 7);
    assert_eq!(v["generators"][0], serde_json::json!(["1", "0"]));
}

#[test]
fn input_errors_exit_two() {
    let dir = std::env::temp_dir().join(format!("jetlie-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("decimal.jet");
    std::fs::write(&bad, "system { independent: x; dependent: u; order: 2;\n eq u[x,x] = 1.5; }\n").unwrap();
    let o = jetlie(&["determine", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2, column 14"), "{err}");
    assert_eq!(jetlie(&["solve", &example("line.jet"), "--degree", "1"]).status.code(), Some(2));
    assert_eq!(jetlie(&["verify-closed-forms", "--kappa", "9"]).status.code(), Some(2));
}

#[test]
fn incompatible_system_fails_determine() {
    let dir = std::env::temp_dir().join(format!("jetlie-cli-inc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("inc.jet");
    std::fs::write(&f, "system { independent: x, y; dependent: u; order: 1; eq u[x] = y; eq u[y] = 0; }").unwrap();
    let o = jetlie(&["determine", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("1 integrability residues do not vanish"));
}

#[test]
fn finite_flows_and_bounds() {
    let o = jetlie(&["finite-check", "--family", "eq55", "--n", "1", "--m", "1", "--kappa", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("24 of 24 flow checks passed"), "{}", stdout(&o));
    let o = jetlie(&["bound", "--n", "1", "--m", "1", "--p", "2", "--l0", "2", "--l0star", "1", "--mu0", "3"]);
    assert_eq!(stdout(&o), "kappa0 = 9\nbound = 770\n");
    let o = jetlie(&["bound", "--theorem1", "--n", "2", "--m", "2", "--kappa", "2"]);
    assert!(stdout(&o).ends_with(": 24\n"));
}
