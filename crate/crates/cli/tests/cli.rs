use std::process::{Command, Output};

fn scn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scn"))
        .args(args)
        .env_remove("SCN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV table as field vectors, keyed by the header.
fn rows(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(o);
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn field(header: &[String], row: &[String], name: &str) -> String {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].clone()
}

#[test]
fn cdf_single_row() {
    let o = scn(&["cdf", "--m", "2", "--n", "2", "--p", "2", "--t", "5"]);
    assert!(o.status.success());
    let (h, r) = rows(&o);
    assert_eq!(h.join(","), "m,n,p,gamma,t,value,err_estimate,method,seed,draws");
    assert_eq!(r.len(), 1);
    assert_eq!(field(&h, &r[0], "method"), "Corollary2");
    let v: f64 = field(&h, &r[0], "value").parse().unwrap();
    assert!((v - 0.096_807_560_203_566_71).abs() < 1e-9);
}

#[test]
fn cdf_degenerate_and_invalid() {
    let o = scn(&["cdf", "--m", "1", "--n", "1", "--p", "1", "--t", "2"]);
    let (h, r) = rows(&o);
    assert_eq!(field(&h, &r[0], "value").parse::<f64>().unwrap(), 1.0);

    let o = scn(&["cdf", "--m", "2", "--n", "2", "--p", "2", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("> 1"));
    // Bad values anywhere in the grid are rejected before any work.
    let o = scn(&["cdf", "--m", "2", "--n", "2", "--p", "2", "--t", "3,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = scn(&["cdf", "--m", "3", "--n", "2", "--p", "2", "--t", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cdf_records_fallback() {
    let o = scn(&[
        "cdf", "--m", "2", "--n", "3", "--p", "4", "--t", "1.8", "--gamma", "1", "--draws", "5000",
    ]);
    assert!(o.status.success());
    let (h, r) = rows(&o);
    assert_eq!(field(&h, &r[0], "method"), "MonteCarlo");
    assert_eq!(field(&h, &r[0], "draws"), "5000");
}

#[test]
fn cdf_json() {
    let o = scn(&[
        "cdf", "--m", "2", "--n", "3", "--p", "3", "--t", "1.5,10", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let a = v.as_array().unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(a[0]["method"], "Theorem1");
    assert!(a[0]["value"].as_f64().unwrap() < a[1]["value"].as_f64().unwrap());
}

#[test]
fn threshold_inverse() {
    let o = scn(&["threshold", "--m", "2", "--n", "2", "--p", "2", "--alpha", "0.5"]);
    let (h, r) = rows(&o);
    let pf: f64 = field(&h, &r[0], "p_f").parse().unwrap();
    assert!((pf - 0.5).abs() < 1e-6);
    let mu: f64 = field(&h, &r[0], "mu_th").parse().unwrap();
    let o = scn(&["cdf", "--m", "2", "--n", "2", "--p", "2", "--t", &mu.to_string()]);
    let (h2, r2) = rows(&o);
    let f: f64 = field(&h2, &r2[0], "value").parse().unwrap();
    assert!((1.0 - f - 0.5).abs() < 1e-6);

    assert_eq!(scn(&["threshold", "--m", "2", "--n", "2", "--p", "2", "--alpha", "1.5"]).status.code(), Some(2));
    let o = scn(&["threshold", "--alpha", "0.1", "--m", "3", "--n", "4", "--p", "5"]);
    let (h, r) = rows(&o);
    assert_eq!(field(&h, &r[0], "method"), "Theorem1");
}

#[test]
fn roc_tables() {
    let o = scn(&["roc", "--m", "2", "--n", "2", "--p", "2", "--gamma", "0", "--alphas", "0.05,0.2,0.5"]);
    let (h, r) = rows(&o);
    for row in &r {
        let pf: f64 = field(&h, row, "p_f").parse().unwrap();
        let pd: f64 = field(&h, row, "p_d").parse().unwrap();
        assert!((pf - pd).abs() < 1e-9);
    }
    let o = scn(&["roc", "--m", "2", "--n", "2", "--p", "2", "--gamma", "3", "--alphas", "0.05,0.2,0.5"]);
    let (h, r) = rows(&o);
    let mut prev = 0.0;
    for row in &r {
        let pf: f64 = field(&h, row, "p_f").parse().unwrap();
        let pd: f64 = field(&h, row, "p_d").parse().unwrap();
        assert!(pd >= pf && pd >= prev);
        prev = pd;
    }
    let o = scn(&["roc", "--m", "2", "--n", "2", "--p", "2", "--gamma", "1", "--alphas", "0.5,0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--m", "2", "--n", "2", "--p", "2", "--t", "5", "--draws", "100000", "--seed", "9"];
    let a = scn(&args);
    let b = scn(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    assert_eq!(scn(&threaded).stdout, a.stdout);

    let (h, r) = rows(&a);
    let f: f64 = field(&h, &r[0], "cdf").parse().unwrap();
    let exact = 0.096_807_560_203_566_71;
    let se = (exact * (1.0 - exact) / 1e5f64).sqrt();
    assert!((f - exact).abs() < 3.0 * se);
}

#[test]
fn simulate_robustness_and_cfar() {
    let o = scn(&[
        "simulate", "--mode", "robustness", "--m", "3", "--n", "3", "--p", "5", "--draws", "2000", "--epsilons", "0,0.3",
    ]);
    assert!(o.status.success());
    let (h, r) = rows(&o);
    assert_eq!(r.len(), 4);
    let scn_pf: Vec<String> = r
        .iter()
        .filter(|row| field(&h, row, "statistic") == "scn")
        .map(|row| field(&h, row, "p_f"))
        .collect();
    assert_eq!(scn_pf[0], scn_pf[1]);

    let o = scn(&["simulate", "--mode", "cfar", "--m", "2", "--n", "3", "--p", "3", "--draws", "2000"]);
    let (h, r) = rows(&o);
    assert_eq!(r.len(), 3);
    assert_eq!(field(&h, &r[0], "exact_method"), "Theorem1");
}

#[test]
fn plot_script_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cdf.csv");
    let o = scn(&[
        "cdf", "--m", "2", "--n", "2", "--p", "2", "--t", "1.5,3,10", "--output", csv.to_str().unwrap(), "--plot",
    ]);
    assert!(o.status.success());
    let gp = std::fs::read_to_string(csv.with_extension("gp")).unwrap();
    assert!(gp.contains("using 5:6"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("m,n,p,"));
}

#[test]
fn validate_quick_and_corrupted() {
    let o = scn(&["validate", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS")));
    let o = scn(&["validate", "--quick", "--tolerance-scale", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}
