use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opweigh::{weight_scale, Instrument, Problem};

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn problem(name: &str) -> String {
    problems().join(name).to_string_lossy().into_owned()
}

fn opweigh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opweigh")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn verify_passes_on_shipped_corpus() {
    let files = ["one_d.json", "worked_2d.json", "random_3d.json", "general_4d.json"].map(problem);
    let mut args = vec!["verify"];
    args.extend(files.iter().map(String::as_str));
    let o = opweigh(&args);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{out}\n{}", stderr(&o));
    assert!(out.contains(" 0 failed"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn verify_reports_failures_with_exit_1() {
    let o = opweigh(&["verify", &problem("errors/no_sign_change.json")]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    let row = out.lines().find(|l| l.starts_with("FAIL  no_sign_change: series")).expect("failure row");
    assert!(row.ends_with("no sign change in bracket"), "{row}");
}

#[test]
fn no_sign_change_is_a_numerical_error() {
    let o = opweigh(&["solve", &problem("errors/no_sign_change.json")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no sign change in bracket"));
}

#[test]
fn bracket_flag_overrides_file() {
    let o = opweigh(&["solve", &problem("errors/no_sign_change.json"), "--bracket", "-3,-0.75"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("z_bal              -1.5"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(opweigh(&["solve", "/nonexistent/problem.json"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "L": [[1, 2, 3]], "Q": [[1, 0]], "Qdag": [[1, 0]], "bracket": [0, 1]}"#).unwrap();
    let o = opweigh(&["series", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid problem"));
    assert_eq!(opweigh(&["weigh", &problem("worked_2d.json"), "--eps-grid", "0:1:0"]).status.code(), Some(2));
    assert_eq!(opweigh(&["weigh", &problem("worked_2d.json"), "--quad-tol", "0"]).status.code(), Some(2));
}

#[test]
fn series_csv_on_worked_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = opweigh(&["series", &problem("worked_2d.json"), "--order", "6", "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("series.csv"));
    assert_eq!(header, ["n", "z_n", "flux_0", "flux_1", "adjoint_0", "adjoint_1"]);
    assert_eq!(rows.len(), 7);
    let z = column(&rows, 1);
    assert!((z[0] + 2.0).abs() < 1e-12);
    assert!((z[1] - 1.0).abs() < 1e-12);
    assert!(z[2..].iter().all(|c| c.abs() < 1e-12));
}

fn weigh(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["weigh", "--eps-grid", "0:1:11", "-o", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    opweigh(&args)
}

/// At order 12 the residual on the worked instance is exactly the
/// truncation error of `ln(1 − ε/2)`, which exceeds `1e-7` for `ε ≥ 0.8`;
/// order 24 brings the whole grid below `1e-7`.
#[test]
fn weigh_worked_instance_balance_residuals() {
    let worked = problem("worked_2d.json");
    let dir = tempfile::tempdir().unwrap();
    let o = weigh(dir.path(), &[&worked, "--order", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("weighing_report.csv"));
    assert_eq!(header, ["eps", "z_bal", "Z1_series", "Z2_integral", "balance_residual"]);
    let (eps, residual) = (column(&rows, 0), column(&rows, 4));
    assert_eq!(eps.len(), 11);
    let ws = weight_scale(&Instrument::from(&Problem::load(&worked).unwrap()).series(12).unwrap(), 12).unwrap();
    for (&e, &r) in eps.iter().zip(&residual) {
        let truncation = ((1.0 - e / 2.0).ln() - ws.eval(e)).abs();
        assert!((r - truncation).abs() <= 1e-9, "eps {e}: residual {r:e}, truncation {truncation:e}");
        assert!(r <= ws.tail_bound(e) + 1e-10, "eps {e}: residual {r:e} above tail bound");
        if e <= 0.7 + 1e-12 {
            assert!(r <= 1e-7, "eps {e}: residual {r:e}");
        }
    }

    let o = weigh(dir.path(), &[&worked, "--order", "24"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("weighing_report.csv"));
    for (e, r) in column(&rows, 0).into_iter().zip(column(&rows, 4)) {
        assert!(r <= 1e-7, "eps {e}: residual {r:e}");
    }
}

#[test]
fn coefficients_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = weigh(dir.path(), &[&problem("worked_2d.json"), "--order", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("coefficients.csv"));
    assert_eq!(header, ["n", "series_value", "recovered_value", "abs_error"]);
    assert_eq!(rows.len(), 5);
    let series = column(&rows, 1);
    for (n, c) in series.iter().enumerate() {
        assert!((c + 0.5f64.powi(n as i32 + 1)).abs() < 1e-12);
    }
    let errors = column(&rows, 3);
    assert!(errors[0] < 1e-2, "{errors:?}");
}

#[test]
fn identical_runs_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [problem("random_3d.json"), "--noise".into(), "1e-6".into(), "--seed".into(), "42".into()];
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(weigh(a.path(), &args).status.success());
    assert!(weigh(b.path(), &args).status.success());
    for name in ["weighing_report.csv", "coefficients.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    let mut other = args.clone();
    other[4] = "43";
    assert!(weigh(c.path(), &other).status.success());
    assert_ne!(std::fs::read(a.path().join("coefficients.csv")).unwrap(), std::fs::read(c.path().join("coefficients.csv")).unwrap());
}

#[test]
fn solve_without_real_fundamental_still_reports_balance() {
    let o = opweigh(&["solve", &problem("worked_2d.json"), "--eps", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("z_bal              -1.5"), "{out}");
    assert!(out.contains("spectral report    unavailable: complex fundamental"), "{out}");
}
