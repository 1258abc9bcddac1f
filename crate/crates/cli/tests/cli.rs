use std::path::Path;
use std::process::{Command, Output};

fn cascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SQRT3: &str = r#"{"losses":[1,2,3],"technologies":[{"family":"sqrt"},{"family":"sqrt"},{"family":"sqrt"}]}"#;

/// Rows of a CSV body after the header, split into cells.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn efficient_single_agent_is_the_foc_root() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"losses":[2],"technologies":[{"family":"sqrt"}]}"#,
    );
    let out = dir.path().join("out");
    let o = cascade(&["--out", out.to_str().unwrap(), "solve", &p, "--mode", "efficient"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Oracle: s (1+s)^2 = 1 with s = sqrt(x).
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let s = 0.5 * (lo + hi);
        if s * (1.0 + s).powi(2) < 1.0 {
            lo = s;
        } else {
            hi = s;
        }
    }
    let solve = std::fs::read_to_string(out.join("solve.csv")).unwrap();
    assert!(solve.starts_with("agent,investment,residual\n"));
    let x: f64 = rows(&solve)[0][1].parse().unwrap();
    assert!((x - lo * lo).abs() < 1e-10);
    let costs = std::fs::read_to_string(out.join("costs.csv")).unwrap();
    assert!(costs.starts_with("agent,expected_cost,investment,p_disrupt\n"));
    assert!(costs.lines().last().unwrap().starts_with("none,,,"));
}

#[test]
fn phi_star_equilibrium_equals_efficient() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"losses":[5,1,8],"technologies":[{"family":"sqrt","scale":0.7},
            {"family":"powerexp","ceiling":0.9,"rate":2,"exponent":0.5},{"family":"sqrt"}]}"#,
    );
    let eff = cascade(&["solve", &p, "--mode", "efficient"]);
    let eq = cascade(&["solve", &p, "--mode", "equilibrium", "--solution", "phi-star"]);
    assert!(eff.status.success() && eq.status.success());
    let a = rows(&stdout(&eff));
    let b = rows(&stdout(&eq));
    for (ra, rb) in a.iter().zip(&b) {
        let (x, y): (f64, f64) = (ra[1].parse().unwrap(), rb[1].parse().unwrap());
        assert!((x - y).abs() <= 1e-6 * x.abs().max(y.abs()));
    }
}

#[test]
fn unbalanced_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", SQRT3);
    let m = write(dir.path(), "m.csv", "agent_1,agent_2,agent_3\n6,0,0\n0,4,0\n0,0,3\n");
    let spec = format!("matrix:{m}");
    let o = cascade(&["solve", &p, "--mode", "equilibrium", "--solution", &spec]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not balanced") && err.contains("row 2"), "{err}");
}

#[test]
fn equilibrium_needs_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", SQRT3);
    assert_eq!(cascade(&["solve", &p, "--mode", "equilibrium"]).status.code(), Some(1));
    assert_eq!(cascade(&["solve", &p, "--solution", "nope"]).status.code(), Some(1));
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"losses":[1,-2],"technologies":[{"family":"sqrt"},{"family":"sqrt"}]}"#,
    );
    assert_eq!(cascade(&["solve", &bad]).status.code(), Some(1));
    assert_eq!(cascade(&["solve", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn liability_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", SQRT3);
    let o = cascade(&["liability", &p, "--solution", "disruptor-pays"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!((r[0][0].as_str(), r[1][1].as_str(), r[2][2].as_str()), ("6", "5", "3"));

    let p = write(
        dir.path(),
        "q.json",
        r#"{"losses":[10,20,30],"technologies":[{"family":"sqrt"},{"family":"sqrt"},{"family":"sqrt"}]}"#,
    );
    let w = write(dir.path(), "w.json", "[0, 0.5, 0.9]");
    let out = dir.path().join("m.csv");
    let o = cascade(&[
        "--out",
        out.to_str().unwrap(),
        "liability",
        &p,
        "--solution",
        &format!("pi:{w}"),
    ]);
    assert!(o.status.success());
    let m = std::fs::read_to_string(&out).unwrap();
    assert!(m.starts_with("agent_1,agent_2,agent_3\n"));
    let expect = [[33.5, 23.5, 3.0], [0.0, 47.0, 3.0], [0.0, 0.0, 30.0]];
    for (row, want) in rows(&m).iter().zip(expect) {
        for (cell, w) in row.iter().zip(want) {
            assert!((cell.parse::<f64>().unwrap() - w).abs() < 1e-12, "{m}");
        }
    }

    let o = cascade(&["liability", &p, "--solution", "phi-star"]);
    let report = String::from_utf8_lossy(&o.stderr);
    assert_eq!(report.matches(": pass").count(), 4, "{report}");

    // The written matrix reads back as a solution.
    let o = cascade(&["liability", &p, "--solution", &format!("matrix:{}", out.display())]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), m);
}

#[test]
fn poa_outputs() {
    let o = cascade(&["poa", "--agents", "10", "--epsilon", "0.01"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certified"], true);
    assert!(v["ratio"].as_f64().unwrap() >= 5.0);
    assert_eq!(v.as_object().unwrap().len(), 7);
    assert_eq!(cascade(&["poa", "--epsilon", "1.5"]).status.code(), Some(1));
    assert_eq!(cascade(&["poa", "--agents", "0"]).status.code(), Some(1));
}

#[test]
fn poa_band_collapse_is_numerical() {
    assert_eq!(cascade(&["poa", "--epsilon", "1e-17"]).status.code(), Some(2));
}

#[test]
fn verify_passes_for_seed_seven() {
    let o = cascade(&["--seed", "7", "verify", "--sizes", "2,3,5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v.as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
        assert!(c["fingerprint"].as_str().unwrap().contains("seed=7"));
    }
}

#[test]
fn simulate_columns_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let svg = dir.path().join("fig.svg");
    let per = dir.path().join("inst.csv");
    let o = cascade(&[
        "--out",
        out.to_str().unwrap(),
        "simulate",
        "--reps",
        "100",
        "--svg",
        svg.to_str().unwrap(),
        "--per-instance",
        per.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("agent,direct_liability,indirect_liability,investment,p_direct,p_indirect,expected_cost")
    );
    assert_eq!(lines.count(), 8);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert_eq!(std::fs::read_to_string(&per).unwrap().lines().count(), 1 + 100 * 8);
}

#[test]
fn simulate_rejects_bad_flags() {
    assert_eq!(cascade(&["simulate", "--loss-min", "0"]).status.code(), Some(1));
    assert_eq!(cascade(&["simulate", "--tech", "cubic"]).status.code(), Some(1));
    assert_eq!(cascade(&["simulate", "--bogus"]).status.code(), Some(1));
}

#[test]
fn simulate_other_technologies() {
    let o = cascade(&[
        "simulate",
        "--reps",
        "5",
        "--agents",
        "3",
        "--tech",
        "powerexp:0.9,2,0.5",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
}
