use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DISK: &str = "family=superellipsoid; d=2; p=2";

fn stretchlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stretchlat")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = stretchlat(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn count_all_sets() {
    let out = stdout(&["count", "--body", DISK, "--t", "5"]);
    assert_eq!(column(&out, "set"), ["full", "positive", "nonnegative", "sections-union"]);
    assert_eq!(column(&out, "count"), ["81", "15", "26", "21"]);
}

#[test]
fn count_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = stdout(&["--csv", path.to_str().unwrap(), "count", "--body", DISK, "--t", "10", "--set", "full"]);
    assert!(out.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(column(&text, "count"), ["317"]);
}

#[test]
fn sections_of_the_disk() {
    let out = stdout(&["sections", "--body", DISK]);
    let v: f64 = column(&out, "volume")[0].parse().unwrap();
    assert!((v - std::f64::consts::PI).abs() < 1e-14);
    assert_eq!(column(&out, "section1")[0].parse::<f64>().unwrap(), 2.0);
    assert_eq!(column(&out, "balanced2")[0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn exponents_of_the_quartic() {
    let out = stdout(&["--quiet", "exponents", "--body", "family=superellipsoid; d=2; p=4", "--samples", "200"]);
    assert_eq!(column(&out, "nu")[0].parse::<f64>().unwrap(), 0.25);
    assert_eq!(column(&out, "mu")[0].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn optimize_small_disk() {
    let out = stdout(&["--quiet", "optimize", "--body", DISK, "--t", "5"]);
    assert!(column(&out, "value").iter().all(|v| v == "16"));
}

#[test]
fn one_point_remainder_has_undefined_slope() {
    let out = stretchlat(&["remainder", "--body", DISK, "--t", "20", "--samples", "100"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fitted slope undefined"));
    assert_eq!(column(&String::from_utf8(out.stdout).unwrap(), "count"), ["1257"]);
}

#[test]
fn bad_body_is_an_error() {
    let out = stretchlat(&["count", "--body", "family=superellipsoid; d=2; p=1", "--t", "3"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

fn run_config(cfg: &Path, out: &Path, threads: &str) -> Output {
    stretchlat(&["--quiet", "--threads", threads, "run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
}

#[test]
fn config_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(
        &cfg,
        format!(
            "[experiment]\nname = rate\nbody = {DISK}\nkind = rate-max\nt_range = 20, 60, 10\nsamples = 200\n\n\
             [experiment]\nname = rem\nbody = {DISK}\nkind = remainder-full\nt_logspace = 20, 400, 8\nmax_slope = 2.0\n"
        ),
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_config(&cfg, &a, "1").status.success());
    assert!(run_config(&cfg, &b, "3").status.success());
    for f in ["rate.csv", "rem.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let rate = fs::read_to_string(a.join("rate.csv")).unwrap();
    assert!(rate.starts_with("t,sup_deviation,value,a1,a2,"));
    assert_eq!(rate.lines().count(), 6);
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(2).unwrap().ends_with(",pass"));
}

#[test]
fn config_missing_body_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# no body\n[experiment]\nname = x\nkind = rate-max\nt = 10\n").unwrap();
    let out = run_config(&cfg, dir.path(), "1");
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("body") && err.contains("line 2"), "{err}");
}

#[test]
fn bundled_config_parses() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/balancing.cfg")).unwrap();
    let cfgs = stretchlat::harness::parse_config::<f64>(&text).unwrap();
    let names: Vec<&str> = cfgs.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["disk-rate", "disk-rate-min", "disk-remainder", "p4-rate", "p4-remainder"]);
}
