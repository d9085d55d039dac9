use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gkb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkb"))
        .args(args)
        .env("GKB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value printed after `key ` on its own line.
fn value(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn kl_command() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"mean": [0], "cov": [[1]]}"#);
    let b = write(dir.path(), "b.json", r#"{"mean": [1], "cov": [[1]]}"#);
    let out = gkb(&["kl", &a, &b]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&out, "forward"), 0.5);
    assert_eq!(value(&out, "reverse"), 0.5);

    let same = gkb(&["kl", &a, &a]);
    assert_eq!(value(&same, "forward"), 0.0);

    let bad = write(dir.path(), "bad.json", "{\"mean\": [0], ");
    assert_eq!(gkb(&["kl", &a, &bad]).status.code(), Some(2));
    let ragged = write(dir.path(), "r.json", r#"{"mean": [0, 0], "cov": [[1, 0], [0]]}"#);
    let out = gkb(&["kl", &a, &ragged]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cov"));
    let two = write(dir.path(), "two.json", r#"{"mean": [0, 0], "cov": [[1, 0], [0, 1]]}"#);
    assert_eq!(gkb(&["kl", &a, &two]).status.code(), Some(3));
}

#[test]
fn bound_command() {
    let out = gkb(&["bound", "sup", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((value(&out, "bound") - 1.731_994_809_417_365_3).abs() < 1e-12);
    assert!((value(&out, "extremal_eigenvalue") - 0.158_594_339_563_039_36).abs() < 1e-14);
    assert_eq!(value(&gkb(&["bound", "sup", "--eps", "0"]), "bound"), 0.0);

    let series = gkb(&["bound", "triangle", "--eps1", "1e-4", "--eps2", "1e-4", "--series"]);
    assert!((value(&series, "series") - 8e-4).abs() < 1e-15);

    assert_eq!(gkb(&["bound", "inf", "--M", "0"]).status.code(), Some(2));
    assert_eq!(gkb(&["bound", "sup", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(gkb(&["bound", "triangle", "--eps1", "1"]).status.code(), Some(2));
    assert_eq!(gkb(&["bound", "sup", "--nope"]).status.code(), Some(2));
    assert_eq!(gkb(&["--help"]).status.code(), Some(0));
}

#[test]
fn printed_values_round_trip() {
    let out = gkb(&["bound", "inf", "--M", "1"]);
    let text = stdout(&out);
    let printed = text.lines().next().unwrap().strip_prefix("bound ").unwrap();
    let parsed: f64 = printed.parse().unwrap();
    assert_eq!(format!("{parsed:.16e}"), printed);
    let exact = gkb_core::inf_reverse_kl(1.0).unwrap().value;
    assert_eq!(parsed.to_bits(), exact.to_bits());
}

#[test]
fn extremal_command() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("pair.json");
    let p = path.to_str().unwrap();
    let out = gkb(&["extremal", "sup", "--eps", "0.5", "--dim", "1", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    assert!((value(&out, "forward") - 0.5).abs() < 1e-12);
    assert!((value(&out, "reverse") - 1.731_994_809_417_365_3).abs() < 1e-9);
    let (g1, g2) = gkb_core::parse_pair(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((gkb_core::kl(&g1, &g2).unwrap() - 0.5).abs() < 1e-12);

    let inf = gkb(&["extremal", "inf", "--M", "1", "--dim", "3", "--out", p]);
    assert!((value(&inf, "forward") - 1.0).abs() < 1e-12);
    assert!((value(&inf, "reverse") - gkb_core::inf_reverse_kl(1.0).unwrap().value).abs() < 1e-9);

    let framed = |name: &str| {
        let q = dir.path().join(name);
        let o = gkb(&["extremal", "sup", "--eps", "0.5", "--dim", "3", "--frame-seed", "7", "--out", q.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(q).unwrap()
    };
    assert_eq!(framed("x.json"), framed("y.json"));

    assert_eq!(gkb(&["extremal", "sup", "--eps", "0", "--dim", "1"]).status.code(), Some(2));
    let missing = dir.path().join("no/such/dir/pair.json");
    let out = gkb(&["extremal", "sup", "--eps", "0.5", "--out", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_command() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("s.csv");
    let out = gkb(&[
        "verify", "symmetry", "--eps", "0.5", "--dims", "1,5", "--trials", "100", "--seed", "1", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("violations=0"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 101);
    assert!(text.starts_with("master_seed,"));

    assert_eq!(gkb(&["verify", "scalar", "--seed", "1"]).status.code(), Some(0));
    assert_eq!(gkb(&["verify", "trace", "--dims", "3", "--trials", "100"]).status.code(), Some(0));
    assert_eq!(
        gkb(&["verify", "triangle", "--eps1", "0.1", "--eps2", "0.1", "--dims", "2", "--trials", "50"]).status.code(),
        Some(0)
    );
    assert_eq!(gkb(&["verify", "infimum", "--M", "1", "--dims", "5", "--trials", "50"]).status.code(), Some(0));

    let corrupt = dir.path().join("c.csv");
    let out = gkb(&[
        "verify", "symmetry", "--eps", "0.5", "--dims", "2", "--trials", "0", "--corrupt-bound", "--csv",
        corrupt.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(gkb(&["verify", "symmetry", "--trials", "x"]).status.code(), Some(2));
    assert_eq!(gkb(&["verify", "symmetry", "--eps", "-1", "--trials", "1"]).status.code(), Some(2));
}

#[test]
fn plot_data_command() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("plot.csv");
    let out = gkb(&["plot-data", "--eps-min", "1e-4", "--eps-max", "10", "--points", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));

    let small = gkb(&["plot-data", "--eps-min", "1e-6", "--eps-max", "1e-2", "--points", "3"]);
    let rows: Vec<Vec<f64>> = stdout(&small)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // The two-term expansion tracks the bound closely for small budgets and
    // drifts to a few percent by 1e-2.
    for r in &rows[..2] {
        assert!((r[2] - r[1]).abs() <= 0.01 * r[1], "{r:?}");
    }
    assert!((rows[2][2] - rows[2][1]).abs() <= 0.05 * rows[2][1]);

    assert_eq!(gkb(&["plot-data", "--eps-min", "0", "--eps-max", "1"]).status.code(), Some(2));
    assert_eq!(gkb(&["plot-data", "--eps-min", "1", "--eps-max", "0.5"]).status.code(), Some(2));
    assert_eq!(gkb(&["plot-data", "--points", "1"]).status.code(), Some(2));
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_gkb"))
        .args(["bound", "sup", "--eps", "1"])
        .env("GKB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
