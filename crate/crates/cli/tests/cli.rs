use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cryptospec")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cryptospec")).args(args).env(key, val).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn energies(doc: &Value) -> Vec<f64> {
    doc["result"]["levels"].as_array().unwrap().iter().map(|l| l["energy"].as_f64().unwrap()).collect()
}

#[test]
fn cubic_levels() {
    let out = run(&["levels", "--n", "1", "--alpha", "0", "--emax", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let e = energies(&doc);
    for (got, want) in e.iter().zip([0.763, 2.711, 4.989, 7.465]) {
        assert!((got - want).abs() < 5e-3, "{e:?}");
    }
    assert_eq!(e.len(), 4);
    assert_eq!(doc["config"]["command"], "levels");
    assert!(doc["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn exceptional_point() {
    let out =
        run(&["ep", "--n", "2", "--alpha", "-0.67319843", "--pair", "0", "1", "--g-hi", "0.06", "--g-lo", "0.02"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!((doc["result"]["g_star"].as_f64().unwrap() - 0.03717).abs() < 5e-4);
    assert!((doc["result"]["e_star"].as_f64().unwrap() - 0.484).abs() < 5e-3);
}

#[test]
fn dirac_oscillator_level() {
    let out = run(&["oscillator", "--mode", "dirac", "--k", "-3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["energy"].as_f64(), Some(-3.0));
    let out = run(&["oscillator", "--mode", "real", "--k", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_coefficients_are_exact() {
    let out = run(&["oscillator", "--kernel", "0", "--j-max", "6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let exact: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(exact, ["1", "0", "-1/2", "0", "3/8", "0", "-5/16"]);
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 4] = [
        (&["orbits", "--energy", "1", "--format", "csv"], "t,x,y,p,q,H,G"),
        (
            &["flow", "--n", "2", "--g-from", "0.05", "--g-to", "0.04", "--n-levels", "2", "--format", "csv"],
            "g,level,E",
        ),
        (&["levels", "--emax", "3", "--format", "csv"], "k,E,method"),
        (&["levels", "--method", "semiclassical", "--format", "csv"], "k,E,method"),
    ];
    for (args, header) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header));
        let row = lines.next().expect("at least one row");
        assert_eq!(row.split(',').count(), header.split(',').count());
    }
}

#[test]
fn csv_numbers_have_twelve_digits() {
    let out = run(&["levels", "--emax", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let e = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert!(e.starts_with("7.62851774"), "{e}");
    let mantissa = e.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["levels", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["orbits", "--tol", "1"]).status.code(), Some(2));
    assert_eq!(run(&["levels", "--alpha", "1/0pi"]).status.code(), Some(2));
    assert_eq!(run(&["levels", "--alpha", "-1.5707963267948966"]).status.code(), Some(2));
    assert_eq!(run(&["levels", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(run_env(&["oscillator"], "CRYPTOSPEC_THREADS", "zero").status.code(), Some(2));
}

#[test]
fn boundary_ray_exits_3_with_cause() {
    // First Stokes asymptote of the cubic potential.
    let out = run(&["sectors", "--n", "1", "--alpha", "-3/10pi"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    let diag = doc["diagnostics"].as_array().unwrap();
    assert!(diag.iter().any(|d| d.as_str().unwrap().contains("boundary-indeterminate")));
}

#[test]
fn sector_grid() {
    let out = run(&["sectors", "--n", "1", "--points", "8", "--numeric"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let rays = doc["result"]["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 8);
    let at = |alpha: f64| rays.iter().find(|r| (r["alpha"].as_f64().unwrap() - alpha).abs() < 1e-12).unwrap();
    assert_eq!(at(0.0)["analytic"], "discrete(0)");
    assert_eq!(at(0.0)["numeric"], "discrete(0)");
    assert_eq!(at(std::f64::consts::FRAC_PI_2)["analytic"], "empty");
    assert_eq!(doc["result"]["asymptotes"].as_array().unwrap().len(), 5);
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &std::path::Path| {
        vec![
            "flow".to_string(),
            "--n".into(),
            "2".into(),
            "--alpha".into(),
            "-3/14pi".into(),
            "--g-from".into(),
            "0.06".into(),
            "--g-to".into(),
            "0.03".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let sa: Vec<String> = args(&a);
    let sb: Vec<String> = args(&b);
    let out = run(&sa.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(0));
    let out = run_env(&sb.iter().map(String::as_str).collect::<Vec<_>>(), "CRYPTOSPEC_THREADS", "1");
    assert_eq!(out.status.code(), Some(0));
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    // Only the output path differs.
    assert_eq!(ta.replace(&a.display().to_string(), "OUT"), tb.replace(&b.display().to_string(), "OUT"));
    let doc: Value = serde_json::from_str(&ta).unwrap();
    assert!(doc["result"]["candidates"].as_array().unwrap().len() == 1);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 2, "alpha": "-3/14pi", "emax": 11.0}"#).unwrap();
    let path = cfg.display().to_string();
    let out = run(&["levels", "--config", &path]);
    assert_eq!(out.status.code(), Some(0));
    let e = energies(&json(&out));
    assert!((e[0] - 1.163).abs() < 5e-3 && (e[1] - 5.234).abs() < 5e-3 && e.len() == 3, "{e:?}");
    let out = run(&["levels", "--config", &path, "--n", "1", "--alpha", "0", "--emax", "3"]);
    let e = energies(&json(&out));
    assert!((e[0] - 0.763).abs() < 5e-3 && e.len() == 2, "{e:?}");
}

#[test]
fn emitted_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["actions", "--n", "2", "--energy", "64"]);
    assert_eq!(first.status.code(), Some(0));
    let doc = json(&first);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, serde_json::to_string(&doc["config"]).unwrap()).unwrap();
    let again = run(&["actions", "--config", &cfg.display().to_string()]);
    assert_eq!(first.stdout, again.stdout);
    assert_eq!(doc["result"].as_array().unwrap().len(), 4);
}

#[test]
fn runaway_and_reduced_orbits() {
    let out = run(&["orbits", "--start", "0", "4", "0", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["classification"]["kind"], "runaway");
    let out = run(&["orbits", "--reduced", "1", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["classification"]["kind"], "runaway");
}
