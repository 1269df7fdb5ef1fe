use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renormlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn malformed_dimension_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", "dim = 4\n");
    for cmd in [&["eig"][..], &["shift", "--level", "0"], &["ledger"], &["rr-scan"]] {
        let mut args = vec!["--config", "bad.cfg"];
        args.extend_from_slice(cmd);
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{cmd:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("dim"));
    }
    assert_eq!(entries(dir.path()), vec!["bad.cfg"]);
}

#[test]
fn config_typos_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "typo.cfg", "dim = 2\nomgea0 = 1\n");
    assert_eq!(run(dir.path(), &["--config", "typo.cfg", "eig"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["--config", "missing.cfg", "eig"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["ledger", "--alpha-min", "10", "--alpha-max", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["shift", "--level", "99"]).status.code(), Some(2));
    assert_eq!(entries(dir.path()), vec!["typo.cfg"]);
}

#[test]
fn ground_level_shift_has_no_width() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "h.cfg", "potential = harmonic\nomega0 = 0.1\nmass = 1\ncharge = 0.3\n");
    let out = run(dir.path(), &["--config", "h.cfg", "shift", "--dim", "2", "--level", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("shift.json")).unwrap()).unwrap();
    assert_eq!(v["dim"], 2);
    let im = v["im"].as_f64().unwrap();
    assert!(im.abs() < 1e-10, "{im}");
    assert_eq!(v["gamma"].as_f64().unwrap(), -2.0 * im);
    assert!(v["re"].as_f64().unwrap().is_finite());
    assert!(v["pieces"].is_object());
}

#[test]
fn excited_level_decays() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--dim", "3", "shift", "--level", "1", "--alpha-scan", "1e4:1e6:3", "--out", "s.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    let scan = v["scan"].as_array().unwrap();
    assert_eq!(scan.len(), 3);
    for r in scan {
        assert!(r["gamma"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn rr_scan_reproduces_the_sqrt_alpha_prefactor() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["rr-scan", "--dim", "3", "--out", "scan.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(text.starts_with("alpha,force_local_coeff,fit_residual\n"));
    // Default charge q = 0.3: the coefficient of −ẍ√α is (4/3)q²/√(2π).
    let want = 4.0 / 3.0 * 0.09 / (2.0 * PI).sqrt();
    let coeffs = csv_column(&text, "force_local_coeff");
    assert_eq!(coeffs.len(), 7);
    for c in coeffs {
        assert!((c / want - 1.0).abs() < 1e-2, "{c} vs {want}");
    }
    let alphas = csv_column(&text, "alpha");
    assert!((alphas[0] - 1e3).abs() < 1e-9 && (alphas[6] - 1e6).abs() < 1e-6);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            write(dir.path(), "h.cfg", "dim = 2\nomega0 = 0.1\n");
            for args in [
                &["--config", "h.cfg", "shift", "--level", "1"][..],
                &["--config", "h.cfg", "eig"],
                &["--config", "h.cfg", "ledger", "--out", "ledger.json"],
                &["--config", "h.cfg", "ledger"],
            ] {
                assert!(run(dir.path(), args).status.success());
            }
            dir
        })
        .collect();
    for name in ["shift.json", "eig.json", "ledger.json", "ledger.csv"] {
        let a = fs::read(runs[0].path().join(name)).unwrap();
        let b = fs::read(runs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
        let strip = |bytes: Vec<u8>| {
            let mut v: Value = serde_json::from_slice(&bytes).unwrap();
            v.as_object_mut().unwrap().remove("wall_time_s");
            v
        };
        let manifest = format!("{name}.manifest.json");
        assert_eq!(
            strip(fs::read(runs[0].path().join(&manifest)).unwrap()),
            strip(fs::read(runs[1].path().join(&manifest)).unwrap())
        );
    }
}

#[test]
fn manifest_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--dim", "3", "--seed", "7", "eig", "--out", "e.json"]).status.success());
    let m: Value = serde_json::from_slice(&fs::read(dir.path().join("e.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "eig");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["code_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs[0]["path"], "e.json");
    // Independent SHA-256 of the written file through the system tool when present.
    if let Ok(o) = Command::new("sha256sum").arg(dir.path().join("e.json")).output() {
        let hex = String::from_utf8(o.stdout).unwrap();
        assert_eq!(outputs[0]["sha256"].as_str().unwrap(), hex.split_whitespace().next().unwrap());
    }
    let default_seed = tempfile::tempdir().unwrap();
    assert!(run(default_seed.path(), &["--dim", "3", "eig"]).status.success());
    let m: Value = serde_json::from_slice(&fs::read(default_seed.path().join("eig.json.manifest.json")).unwrap()).unwrap();
    assert!(m["seed"].as_u64().unwrap() > 0);
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--dim", "2", "ledger", "--alpha-steps", "3"]).status.success());
    let text = fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "alpha,m_bare,counterterm_O(q^2),discarded_constant");
    for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let (mantissa, exp) = cell.split_once('e').unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{cell}");
        exp.parse::<i32>().unwrap();
    }
}

#[test]
fn eig_exports_energies_and_matrix_elements() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "h.cfg", "dim = 2\nomega0 = 1\nmass = 2\n");
    assert!(run(dir.path(), &["--config", "h.cfg", "eig", "--jmax", "2"]).status.success());
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("eig.json")).unwrap()).unwrap();
    let e: Vec<f64> = v["energies"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(e, vec![1.0, 2.0, 2.0]);
    let p = v["p_elems"].as_array().unwrap();
    assert_eq!(p.len(), 9);
    // Σ_{j′}|⟨j′|p|0⟩|² = ⟨0|p²|0⟩ = d·mω/2 = 2, saturated by the first shell.
    let norm2: f64 = p
        .iter()
        .filter(|r| r["j"] == 0 && r["jp"] != 0)
        .flat_map(|r| {
            let re = r["re"].as_array().unwrap().clone();
            let im = r["im"].as_array().unwrap().clone();
            re.into_iter().chain(im).map(|x| x.as_f64().unwrap().powi(2))
        })
        .sum();
    assert!((norm2 - 2.0).abs() < 1e-14, "{norm2}");
}

#[test]
fn kernel_check_reports_and_names_the_failing_condition() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(dir.path(), &["--dim", "2", "kernel-check"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("kernel_check.json")).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    let flat = vec!["1.0"; 4001].join("\n");
    write(dir.path(), "flat.txt", &flat);
    let bad = run(dir.path(), &["kernel-check", "--samples", "flat.txt", "--out", "flat.json"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Fourier transformability"));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("flat.json")).unwrap()).unwrap();
    assert_eq!(v["first_failure"], "Fourier transformability");
}

#[test]
fn propagate_writes_trajectory_modes_and_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.cfg", "dim = 2\nomega0 = 1\ngrid_n = 32\ngrid_L = 12\n");
    write(dir.path(), "pulse.txt", "center = 5\nwidth = 2\ncarrier = 1\namplitude = 1e-3\npolarization = 1, 0\n");
    let out = run(
        dir.path(),
        &["--config", "p.cfg", "propagate", "--pulse", "pulse.txt", "--T", "12", "--dt", "0.02", "--record-every", "10", "--out-prefix", "run"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = fs::read_to_string(dir.path().join("run_trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,v_x,v_y,x_x,x_y,norm\n"));
    assert_eq!(traj.lines().count(), 1 + 61);
    let norms = csv_column(&traj, "norm");
    assert!(norms.iter().all(|n| (n - norms[0]).abs() < 1e-10));
    let modes: Value = serde_json::from_slice(&fs::read(dir.path().join("run_modes.json")).unwrap()).unwrap();
    assert!(modes["beta"].as_array().unwrap().len() == 24);
    let demo = fs::read_to_string(dir.path().join("run_breakdown.csv")).unwrap();
    assert_eq!(csv_column(&demo, "alpha").len(), 4);
    assert!(dir.path().join("run_trajectory.csv.manifest.json").exists());
}

#[test]
fn propagation_failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.cfg", "dim = 2\nomega0 = 1\ngrid_n = 32\ngrid_L = 12\n");
    write(dir.path(), "kick.txt", "center = 3\nwidth = 1\ncarrier = 1\namplitude = 50\n");
    let runaway = run(dir.path(), &["--config", "p.cfg", "propagate", "--pulse", "kick.txt", "--T", "10", "--dt", "0.02"]);
    assert_eq!(runaway.status.code(), Some(3), "{}", String::from_utf8_lossy(&runaway.stderr));
    let coarse = run(dir.path(), &["--config", "p.cfg", "propagate", "--T", "10", "--dt", "0.5"]);
    assert_eq!(coarse.status.code(), Some(2));
    assert_eq!(entries(dir.path()), vec!["kick.txt", "p.cfg"]);
}

#[test]
fn demo_naive_shows_growth_and_renormalized_mass() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--dim", "3", "demo-naive"]).status.success());
    let text = fs::read_to_string(dir.path().join("demo_naive.csv")).unwrap();
    let naive = csv_column(&text, "naive_coefficient");
    let renorm = csv_column(&text, "renormalized_coefficient");
    assert!(naive.windows(2).all(|w| w[1] > w[0]));
    assert!(renorm.iter().all(|c| (c - 1.0).abs() < 1e-2));
}
