//! End-to-end checks of the command-line surface: exit codes, JSON
//! shapes, and the documented examples.

use std::process::Command;

fn holodyn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_holodyn"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn classify_repelling_germ() {
    let (code, stdout, _) = holodyn(&["classify", "--f", "2x+x^2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["branch"], "Thm1-i-repelling");
    assert_eq!(v["corollary"], "n/a");
}

#[test]
fn normal_form_parabolic_example() {
    let (code, stdout, _) = holodyn(&["normal-form", "--f", "x-x^2+x^3-x^4", "--N", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["obstruction"]["order"], 1);
    let re = v["obstruction"]["value"][0].as_str().unwrap();
    assert!(re.starts_with("-1"), "obstruction value {re}");
}

#[test]
fn malformed_germ_exits_one() {
    let (code, _, stderr) = holodyn(&["classify", "--f", "x/(1+x)"]);
    assert_eq!(code, 1, "stderr: {stderr}");
    let (code2, _, _) = holodyn(&["classify", "--f", "1+x"]);
    assert_eq!(code2, 1);
}

#[test]
fn precondition_refusal_exits_two() {
    // Degree cap: 2^13 > 4096.
    let (code, _, stderr) = holodyn(&["cycles", "--f", "x^2", "--m-max", "13"]);
    assert_eq!(code, 2, "stderr: {stderr}");
}

#[test]
fn green_grid_csv_with_probe() {
    let (code, stdout, _) = holodyn(&[
        "green-grid",
        "--f",
        "x^2-1",
        "--window",
        "-2,2,-1.5,1.5",
        "--res",
        "8",
        "--probe",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,re,im,g,escaped_iter,certified_error,indeterminate"
    );
    let probe_line = stdout
        .lines()
        .find(|l| l.starts_with("probe,3"))
        .expect("probe row present");
    let g: f64 = probe_line.split(',').nth(3).unwrap().parse().unwrap();
    // Oracle: brute-force 2^-n ln|f^n(3)| for z^2 - 1.
    let mut z = 3.0f64;
    let mut n = 0;
    while z.abs() < 1e150 {
        z = z * z - 1.0;
        n += 1;
    }
    let brute = z.abs().ln() / 2f64.powi(n);
    assert!((g - brute).abs() < 1e-9, "probe {g} vs oracle {brute}");
    // Points inside the filled Julia set carry the indeterminate flag.
    assert!(stdout.lines().any(|l| l.ends_with(",true")));
}

#[test]
fn cycles_squaring_map() {
    let (code, stdout, _) = holodyn(&["cycles", "--f", "x^2", "--m-max", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3); // {0}, {1}, one 2-cycle
}

#[test]
fn backward_orbit_squaring() {
    let (code, stdout, _) = holodyn(&[
        "backward-orbit",
        "--f",
        "x^2",
        "--xi0",
        "1.2",
        "--steps",
        "10",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["max_step_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["points"].as_array().unwrap().len(), 11);
}

#[test]
fn surface_check_reports_gluing() {
    let (code, stdout, _) = holodyn(&[
        "surface-check",
        "--f",
        "2x",
        "--mode",
        "phi",
        "--samples",
        "100",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["gluing_ok"].as_bool().unwrap());
    assert!(v["exponent_identities"].as_f64().unwrap() < 1e-12);
}

#[test]
fn diophantine_rational_is_resonant() {
    let (code, stdout, _) = holodyn(&["diophantine", "--tau", "3/7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["resonant"]["order"], 7);
    assert!(v.get("condition_i").is_none() || v["condition_i"].is_null());
}

#[test]
fn diophantine_golden_report() {
    let (code, stdout, _) = holodyn(&[
        "diophantine",
        "--tau",
        "golden",
        "--n-max",
        "512",
        "--ell-max",
        "20",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["resonant"].is_null());
    assert_eq!(v["condition_ii"]["verdict"], "bounded-below");
    assert!(v["condition_i"]["stable"].as_bool().unwrap());
}

#[test]
fn classify_family_by_tau() {
    let (code, stdout, _) = holodyn(&["classify", "--tau", "1/3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["branch"], "Thm1-ii-parabolic");
}

#[test]
fn sweep_csv_small() {
    let (code, stdout, _) = holodyn(&[
        "sweep",
        "--off-circle",
        "4",
        "--rational-qmax",
        "3",
        "--golden",
        "2",
        "--cremer-depth",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "label,tau,branch,corollary,obstruction_order");
    assert!(lines.iter().any(|l| l.contains("Thm1-ii-parabolic")));
}

#[test]
fn precision_exhaustion_exits_three() {
    // A 64-bit real angle cannot resolve |1 - tau^l| for the liminf
    // condition scan.
    let (code, _, stderr) = holodyn(&[
        "diophantine",
        "--tau",
        "0.7548776662466927@64",
        "--ell-max",
        "30",
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("precision"));
}

#[test]
fn output_file_flag() {
    let dir = std::env::temp_dir().join("holodyn-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("verdict.json");
    let (code, stdout, _) = holodyn(&[
        "classify",
        "--f",
        "0.5x+x^3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["branch"], "Thm1-i-attracting");
}
