use std::path::Path;
use std::process::{Command, Output};

fn nuper(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nuper")).current_dir(dir).args(args).output().expect("spawn nuper")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PERIMETER: &str = "command = perimeter\n[set]\ntype = interval\na = 0\nb = 1\n[measure]\ntype = fractional\nalpha = 0.5\n";

const SWEEP: &str = "command = sweep
[set]
type = box
lo = 0, 0
hi = 1, 1
[measure]
type = stable
alpha = 0.5
[sweep]
family = alpha
normalization = alpha_up
regime = classical_uniform
";

#[test]
fn perimeter_of_unit_interval() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), PERIMETER).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&t.path().join("out/result.json"));
    // ∫_E∫_{E^c}|x-y|^{-3/2} = 2·1/(α(1-α)) at α = 1/2
    assert!((r["value"].as_f64().unwrap() - 8.0).abs() < 1e-6);
    let m = json(&t.path().join("out/manifest.json"));
    assert_eq!(m["inputs_hash"], r["inputs_hash"]);
    assert_eq!(m["seed"], 0);
    assert!(m["versions"]["nonlocal_perimeter"].is_string());
    assert!(m["timestamp"].is_string());
}

#[test]
fn constants_in_the_plane() {
    let t = tempfile::tempdir().unwrap();
    let o = nuper(t.path(), &["constants", "--set", "d=2", "--out", "c"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&t.path().join("c/result.json"));
    assert!((r["varpi"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-14);
    assert!((r["kappa"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
    assert!((r["K1d"].as_f64().unwrap() - 4.0).abs() < 1e-14);
}

#[test]
fn missing_section_is_a_validation_error() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), "command = perimeter\n[set]\ntype = interval\na = 0\nb = 1\n").unwrap();
    let o = nuper(t.path(), &["--config", "run.ini"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert_eq!(e.lines().count(), 1);
    assert!(e.contains("section=measure"), "{e}");
}

#[test]
fn unknown_key_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), PERIMETER.replace("alpha", "alfa")).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alfa"));
    std::fs::write(t.path().join("run.ini"), PERIMETER).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini", "--set", "measure.α=0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let t = tempfile::tempdir().unwrap();
    // a sweep whose direction contradicts the regime fails the λ gate
    let cfg = SWEEP.replace("alpha_up", "alpha_down").replace("regime = classical_uniform", "regime = classical_uniform\ngrid = 0.1, 0.05, 0.01");
    std::fs::write(t.path().join("run.ini"), cfg).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("nuper: error exit=3"));
}

#[test]
fn sweep_writes_series_and_plot() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), SWEEP).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.path().join("s/series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "param,C_eps,per_nu,normalized,target,residual,err_est,runtime_ms,regime");
    assert_eq!(lines.count(), 6);
    let r = json(&t.path().join("s/result.json"));
    assert_eq!(r["passed"], true);

    let o = nuper(t.path(), &["plot", "s/series.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gp = std::fs::read_to_string(t.path().join("s/series.gp")).unwrap();
    assert!(gp.contains("target0 = 1.27323954"), "{gp}");
    assert!(gp.contains("layout 1,1"));
}

#[test]
fn concatenated_sweeps_give_two_panels() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), SWEEP).unwrap();
    assert!(nuper(t.path(), &["--config", "run.ini", "--out", "a"]).status.success());
    let down = SWEEP.replace("alpha_up", "alpha_down").replace("classical_uniform", "lebesgue");
    std::fs::write(t.path().join("down.ini"), down).unwrap();
    let o = nuper(t.path(), &["--config", "down.ini", "--out", "b"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = std::fs::read_to_string(t.path().join("a/series.csv")).unwrap();
    let b = std::fs::read_to_string(t.path().join("b/series.csv")).unwrap();
    let both = a + b.split_once('\n').unwrap().1;
    std::fs::write(t.path().join("both.csv"), both).unwrap();
    let o = nuper(t.path(), &["plot", "both.csv", "--out", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gp = std::fs::read_to_string(t.path().join("p/series.gp")).unwrap();
    assert!(gp.contains("layout 2,1"));
    assert!(gp.contains("'classical_uniform'") && gp.contains("'lebesgue'"));
}

#[test]
fn empty_or_malformed_csv_exits_2() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("empty.csv"), "").unwrap();
    assert_eq!(nuper(t.path(), &["plot", "empty.csv"]).status.code(), Some(2));
    std::fs::write(t.path().join("hdr.csv"), "param,C_eps,per_nu,normalized,target,residual,err_est,runtime_ms,regime\n").unwrap();
    assert_eq!(nuper(t.path(), &["plot", "hdr.csv"]).status.code(), Some(2));
    std::fs::write(t.path().join("bad.csv"), "param,C_eps,per_nu,normalized,target,residual,err_est,runtime_ms,regime\n0.9,x,1,1,1,0,0,1,lebesgue\n0.9,1,1,oops,1,0,0,1,lebesgue\n").unwrap();
    assert_eq!(nuper(t.path(), &["plot", "bad.csv"]).status.code(), Some(2));
    assert_eq!(nuper(t.path(), &["plot", "nope.csv"]).status.code(), Some(2));
}

#[test]
fn same_seed_same_result() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "command = oracle\n[set]\ntype = ball\ncenter = 0, 0\nradius = 1\n[measure]\ntype = fractional\nalpha = 0.5\n[quadrature]\nsamples = 100000\n";
    std::fs::write(t.path().join("run.ini"), cfg).unwrap();
    assert!(nuper(t.path(), &["--config", "run.ini", "--seed", "11", "--out", "a"]).status.success());
    assert!(nuper(t.path(), &["--config", "run.ini", "--seed", "11", "--threads", "1", "--out", "b"]).status.success());
    let a = std::fs::read(t.path().join("a/result.json")).unwrap();
    let b = std::fs::read(t.path().join("b/result.json")).unwrap();
    assert_eq!(a, b);
    assert!(nuper(t.path(), &["--config", "run.ini", "--seed", "12", "--out", "c"]).status.success());
    assert_ne!(a, std::fs::read(t.path().join("c/result.json")).unwrap());
    let r = json(&t.path().join("a/result.json"));
    assert_eq!(r["agree_3_sigma"], true);
}

#[test]
fn sweep_result_is_reproducible() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("run.ini"), SWEEP).unwrap();
    assert!(nuper(t.path(), &["--config", "run.ini", "--out", "a"]).status.success());
    assert!(nuper(t.path(), &["--config", "run.ini", "--out", "b", "--threads", "2"]).status.success());
    assert_eq!(std::fs::read(t.path().join("a/result.json")).unwrap(), std::fs::read(t.path().join("b/result.json")).unwrap());
}

#[test]
fn coarea_on_a_grid_function() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "command = coarea\n[set]\ntype = grid\ndims = 3, 2\nh = 0.5\nvalues = 1, 2, -1, 0, 0.5, 2\n[measure]\ntype = kernel\nkernel = gaussian\n";
    std::fs::write(t.path().join("run.ini"), cfg).unwrap();
    let o = nuper(t.path(), &["--config", "run.ini"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&t.path().join("out/result.json"));
    assert!(r["rel_gap"].as_f64().unwrap() < 1e-8);
}
