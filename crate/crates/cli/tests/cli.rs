use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn hfx(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfx"))
        .args(args)
        .current_dir(dir)
        .env("HF_WORKERS", "2")
        .output()
        .expect("hfx runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn minimal() -> Value {
    json!({
        "schema_version": 1,
        "name": "minimal",
        "wall_time": false,
        "cases": [{
            "label": "ho",
            "problem": {
                "domain": [-10.0, 10.0],
                "points": 128,
                "mass": 1.0,
                "trap": {"family": "constant", "omega_sq": 1.0},
                "quartic": 0.0,
                "sigma": 1.0,
                "initial": {"family": "gaussian", "center": 1.0}
            },
            "study": {
                "kind": "convergence",
                "t_final": 1.0,
                "methods": [{"split": "hf", "scheme": "strang_bab", "magnus": "exact"}],
                "sweep": {"steps": [20]},
                "reference": {"steps": 64, "tolerance": 1e-10}
            }
        }]
    })
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn column(path: &Path, name: &str) -> usize {
    let headers = csv::Reader::from_path(path).unwrap().headers().unwrap().clone();
    headers.iter().position(|h| h == name).unwrap()
}

#[test]
fn minimal_config_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &minimal());
    let o = hfx(&["run", "--config", &cfg, "--out", "out.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out.csv");
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 1);
    let err: f64 = rows[0][column(&out, "l2_error")].parse().unwrap();
    assert!(err > 0.0 && err < 1e-2);
    // 17 significant digits
    let mantissa = rows[0][column(&out, "l2_error")].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn unknown_scheme_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let mut v = minimal();
    v["cases"][0]["study"]["methods"][0]["scheme"] = json!("yoshida99");
    let cfg = write_config(dir.path(), "c.json", &v);
    let o = hfx(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("cases[0].study.methods[0].scheme"), "{msg}");
    assert!(msg.contains("yoshida99"), "{msg}");
}

#[test]
fn invalid_values_and_unknown_presets_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let o = hfx(&["run", "--preset", "fig3_sigma1", "--override", "problem.points=0"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = hfx(&["run", "--preset", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = hfx(&["schemes", "validate", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn horizon_violation_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let mut v = minimal();
    v["cases"][0]["study"]["t_final"] = json!(40.0);
    v["cases"][0]["study"]["sweep"] = json!({"steps": [10]});
    let cfg = write_config(dir.path(), "c.json", &v);
    let o = hfx(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut v = minimal();
    v["cases"][0]["study"]["sweep"] = json!({"steps": [10, 20, 40]});
    v["cases"][0]["study"]["methods"] = json!([
        {"split": "f", "scheme": "ni5_84", "magnus": "exact"},
        {"split": "hf", "scheme": "ni5_84", "magnus": "exact"}
    ]);
    let cfg = write_config(dir.path(), "c.json", &v);
    for out in ["a.csv", "b.csv"] {
        assert!(hfx(&["run", "--config", &cfg, "--out", out], dir.path()).status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn preset_and_explicit_config_agree_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let shown = hfx(&["presets", "show", "fig3_sigma1"], dir.path());
    assert!(shown.status.success());
    let mut v: Value = serde_json::from_str(&stdout(&shown)).unwrap();
    v["wall_time"] = json!(false);
    let cfg = write_config(dir.path(), "fig3.json", &v);
    let a = hfx(&["run", "--config", &cfg, "--out", "config.csv"], dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    let b = hfx(
        &["run", "--preset", "fig3_sigma1", "--override", "wall_time=false", "--out", "preset.csv"],
        dir.path(),
    );
    assert!(b.status.success(), "{}", stderr(&b));
    let a = std::fs::read(dir.path().join("config.csv")).unwrap();
    let b = std::fs::read(dir.path().join("preset.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn weak_perturbation_curves_are_monotone_and_hf_wins() {
    let dir = TempDir::new().unwrap();
    let o = hfx(
        &[
            "run",
            "--preset",
            "fig3_sigma0.01",
            "--override",
            r#"study.sweep={"steps":[25,50,100,200,400]}"#,
            "--out",
            "weak.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("weak.csv");
    let (m, e) = (column(&out, "method"), column(&out, "l2_error"));
    let rows = read_rows(&out);
    let curve = |name: &str| -> Vec<f64> {
        rows.iter().filter(|r| &r[m] == name).map(|r| r[e].parse().unwrap()).collect()
    };
    let (f, hf) = (curve("strang_bab/F"), curve("strang_bab/HF/exact"));
    assert_eq!(f.len(), 5);
    for c in [&f, &hf] {
        assert!(c.windows(2).all(|w| w[1] < w[0]), "{c:?}");
    }
    assert!(f.iter().zip(&hf).all(|(a, b)| b <= a));
}

#[test]
fn errors_do_not_depend_on_the_reference_resolution() {
    let dir = TempDir::new().unwrap();
    let base = [
        "run",
        "--preset",
        "fig3_sigma1",
        "--override",
        r#"study.sweep={"steps":[50,100,200]}"#,
        "--override",
        "wall_time=false",
    ];
    let mut coarse = base.to_vec();
    coarse.extend(["--out", "coarse.csv"]);
    let mut fine = base.to_vec();
    fine.extend(["--override", "study.reference.steps=512", "--out", "fine.csv"]);
    assert!(hfx(&coarse, dir.path()).status.success());
    let o = hfx(&fine, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = read_rows(&dir.path().join("coarse.csv"));
    let b = read_rows(&dir.path().join("fine.csv"));
    let e = column(&dir.path().join("fine.csv"), "l2_error");
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        let (x, y): (f64, f64) = (x[e].parse().unwrap(), y[e].parse().unwrap());
        if x > 1e-10 {
            assert!((x - y).abs() / x < 0.01, "{x:e} vs {y:e}");
        }
    }
}

#[test]
fn plot_scripts_for_each_kind() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &minimal());
    let o = hfx(&["run", "--config", &cfg, "--out", "conv.csv", "--plot", "error-vs-cost"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(dir.path().join("conv.gp")).unwrap().contains("set logscale xy"));

    let o = hfx(
        &["run", "--preset", "fig1_single_step", "--out", "single.csv", "--plot", "error-vs-t"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("single.gp").exists());

    let o = hfx(
        &[
            "order-check", "--scheme", "strang_bab", "--problem", "fig3_sigma1", "--steps", "40", "--points", "4",
            "--out", "order.csv", "--plot", "order-fit",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("order.gp").exists());
    assert!(stdout(&o).contains("slope 2.0"), "{}", stdout(&o));

    // a single-step table has no exponential counts
    let o = hfx(
        &["run", "--preset", "fig1_single_step", "--out", "again.csv", "--plot", "error-vs-cost"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_exponentials"), "{}", stderr(&o));
}

#[test]
fn scheme_catalog() {
    let dir = TempDir::new().unwrap();
    let o = hfx(&["schemes", "list"], dir.path());
    assert!(o.status.success());
    let list = stdout(&o);
    for name in ["strang_bab", "ni4_82", "srkn6_4", "ni5_84"] {
        assert!(list.contains(name), "{list}");
    }
    let o = hfx(&["schemes", "validate", "srkn6_4"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).trim_end().ends_with("ok"));
}
