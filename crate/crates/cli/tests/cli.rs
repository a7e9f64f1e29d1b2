use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-eft"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn field(header: &str, row: &str, name: &str) -> String {
    let i = header.split(',').position(|h| h == name).unwrap();
    row.split(',').nth(i).unwrap().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_output_is_identical_across_worker_counts() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "sweep",
        "--model",
        "full_polaron,effective,analytic",
        "--N",
        "6,9",
        "--nph",
        "8",
        "--lambda-grid",
        "0:2:5",
        "--outputs",
        "f,photon_number,sx2_over_n2",
    ];
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--workers", "1", "--out", path_str(&a)]);
    assert!(run(&args).status.success());
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--workers", "4", "--out", path_str(&b)]);
    assert!(run(&args).status.success());
    let left = std::fs::read(&a).unwrap();
    assert_eq!(left, std::fs::read(&b).unwrap());
    let text = String::from_utf8(left).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 5);
    let header = text.lines().next().unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|r| field(header, r, "error").is_empty()));
    assert!(text
        .lines()
        .skip(1)
        .filter(|r| r.starts_with("full_polaron"))
        .all(|r| field(header, r, "hepp_lieb_ok") == "true"));
}

#[test]
fn decoupled_point_gives_free_spin_value_for_every_model() {
    let out = run(&[
        "sweep",
        "--model",
        "full_polaron,full,effective,sw,analytic",
        "--N",
        "5",
        "--nph",
        "30",
        "--beta",
        "1",
        "--omega-z",
        "2",
        "--lambda-grid",
        "0:0:1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    let spin_f = -(2.0 * 1f64.cosh()).ln();
    let photon_f = (1.0 - (-1f64).exp()).ln() / 5.0;
    for row in text.lines().skip(1) {
        let f: f64 = field(header, row, "f_per_site").parse().unwrap();
        let expected = if row.starts_with("analytic") {
            spin_f
        } else {
            spin_f + photon_f
        };
        assert!((f - expected).abs() < 1e-10, "{row}");
    }
}

#[test]
fn jsonl_has_one_object_per_point() {
    let out = run(&[
        "analytic",
        "--N",
        "10",
        "--lambda-grid",
        "0:2:7",
        "--format",
        "jsonl",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r["model"] == "analytic"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(
        &cfg,
        r#"{"models": ["effective"], "lambda_over_lambda_c": [0.5, 1.5], "n": [6],
            "beta": [2.0], "omega_z_over_omega_c": [0.5], "n_ph": 4}"#,
    )
    .unwrap();
    let out = run(&["sweep", "--config", path_str(&cfg), "--N", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|r| field(header, r, "N") == "4"));
}

#[test]
fn exit_codes_distinguish_config_errors_and_point_failures() {
    assert_eq!(run(&["sweep", "--N", "0"]).status.code(), Some(1));
    assert_eq!(
        run(&["sweep", "--config", "/nonexistent/spec.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["ed", "--model", "analytic"]).status.code(), Some(1));
    let out = run(&[
        "sweep",
        "--model",
        "sw,effective",
        "--N",
        "4",
        "--omega-z",
        "1",
        "--lambda-grid",
        "0:1:2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    let errors: Vec<String> = text
        .lines()
        .skip(1)
        .map(|r| field(header, r, "error"))
        .collect();
    assert!(errors[..2].iter().all(|e| e.contains("resonance")));
    assert!(errors[2..].iter().all(String::is_empty));
}

#[test]
fn bogoliubov_from_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("form.json");
    std::fs::write(
        &cfg,
        r#"{"h1": [[[1.5, 0], [0.2, 0.1]], [[0.2, -0.1], [2.0, 0]]],
            "h2": [[[0.3, 0], [0.1, 0]], [[0.1, 0], [-0.2, 0]]]}"#,
    )
    .unwrap();
    let out = run(&["bogoliubov", "--config", path_str(&cfg)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["omega_tilde"].as_array().unwrap().len(), 2);
    assert!(v["pseudo_unitarity_residual"].as_f64().unwrap() < 1e-10);

    let unstable = dir.path().join("bad.json");
    std::fs::write(&unstable, r#"{"h1": [[[1, 0]]], "h2": [[[2, 0]]]}"#).unwrap();
    assert_eq!(
        run(&["bogoliubov", "--config", path_str(&unstable)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn single_mode_bogoliubov_matches_closed_form() {
    let out = run(&["bogoliubov", "--delta", "0.5", "--omega", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let w = v["omega_tilde"][0].as_f64().unwrap();
    assert!((w - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn spin_couplings_from_modes_and_samples() {
    let dir = tempdir().unwrap();
    let modes = dir.path().join("modes.json");
    std::fs::write(
        &modes,
        r#"{"modes": [{"omega": 2.0, "c_m": 0.5, "polarization": [0, 0, 1]}]}"#,
    )
    .unwrap();
    let samples = dir.path().join("samples.csv");
    std::fs::write(
        &samples,
        "mode,site,x,y,z,ux_re,ux_im,uy_re,uy_im,uz_re,uz_im\n\
         0,0,0,0,0,1,0,0,0,0,0\n\
         0,1,1,0,0,1,0,0,0,0,0\n",
    )
    .unwrap();
    let out_path = dir.path().join("j.json");
    let out = run(&[
        "spin-couplings",
        "--config",
        path_str(&modes),
        "--samples",
        path_str(&samples),
        "--out",
        path_str(&out_path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    let x = v["blocks"][0][0][0].as_f64().unwrap();
    assert!((x - 0.25 / 2.0).abs() < 1e-14, "{v}");

    let extra = dir.path().join("extra.csv");
    std::fs::write(
        &extra,
        "mode,site,x,y,z,ux_re,ux_im,uy_re,uy_im,uz_re,uz_im\n\
         0,0,0,0,0,1,0,0,0,0,0\n\
         1,0,0,0,0,1,0,0,0,0,0\n",
    )
    .unwrap();
    let mismatch = run(&[
        "spin-couplings",
        "--config",
        path_str(&modes),
        "--samples",
        path_str(&extra),
    ]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn condensation_reports() {
    let out = run(&[
        "condensation",
        "--delta",
        "1",
        "--omega",
        "1",
        "--N",
        "4",
        "--c-e",
        "0.5",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["with_a2"]["factor"].as_f64().unwrap() - 0.8).abs() < 1e-15);
    assert_eq!(v["without_a2"]["factor"].as_f64().unwrap(), 1.0);
    assert_eq!(v["without_a2"]["transition_possible"], true);
    assert_eq!(
        run(&["condensation", "--omega", "1"]).status.code(),
        Some(1)
    );
}

#[test]
fn kernel_csv_columns() {
    let out = run(&[
        "kernel",
        "--omega-tilde",
        "1",
        "--beta",
        "2",
        "--points",
        "8",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "tau,even,odd,even_closed_form,double_bar_regular"
    );
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        5
    );
}
