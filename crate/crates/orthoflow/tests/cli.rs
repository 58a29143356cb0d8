//! Command-line contract: exit codes, analyze output, the epsilon sweep.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_orthoflow")
}

#[test]
fn invalid_config_exits_1_with_itemized_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        r#"
scenario = "abc"
grid_n = 12
viscosity = -1.0
t_end = 0.1
dt_max = 0.01
output_dir = "out"
"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid_n") && stderr.contains("viscosity"), "{stderr}");
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("unknown.toml");
    std::fs::write(
        &cfg,
        r#"
scenario = "taylor_green"
grid_n = 16
viscosity = 0.0
t_end = 0.02
dt_max = 0.01
output_dir = "out"
mystery_knob = 3
"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_files_exit_3() {
    let out = Command::new(bin())
        .args(["analyze", "/nonexistent/state.ofl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(bin())
        .args(["resume", "/nonexistent/state.ofl", "--t-end", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analyze_reports_snapshot_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"
scenario = "abc"
grid_n = 16
viscosity = 0.0
t_end = 0.02
dt_max = 0.01
output_dir = "{}"
"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["run", cfg.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());

    let analyze_dir = dir.path().join("analyzed");
    let out = Command::new(bin())
        .args([
            "analyze",
            out_dir.join("checkpoint_final.ofl").to_str().unwrap(),
            "--theta",
            "--output-dir",
            analyze_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max_speed"), "{stdout}");
    assert!(stdout.contains("theta_transport"), "{stdout}");

    let csv = std::fs::read_to_string(analyze_dir.join("analyze.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), orthoflow::experiment::CSV_HEADER);
    let row = lines.next().unwrap();
    // Snapshot analysis carries no time integrals: the BKM cells are empty.
    assert!(row.ends_with(",,"), "bkm cells should be absent: {row}");
}

#[test]
fn sweep_epsilon_writes_one_file_per_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"
scenario = "taylor_green"
grid_n = 16
viscosity = 0.0
t_end = 0.04
dt_max = 0.02
diag_every_steps = 1
output_dir = "{}"
"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["sweep-epsilon", cfg.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    for eps in ["1e-3", "1e-6", "1e-9"] {
        let path = out_dir.join(format!("records_eps_{eps}.csv"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("{path:?} missing"));
        assert!(text.lines().count() >= 3, "expected rows in {path:?}");
    }
    let sweep = std::fs::read_to_string(out_dir.join("epsilon_sweep.txt")).unwrap();
    assert!(sweep.contains("epsilon,final_fraction,max_drift"), "{sweep}");
    // Larger epsilon admits at least as many cells: fractions non-decreasing.
    let fractions: Vec<f64> = sweep
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(fractions.len(), 3);
    assert!(fractions[0] >= fractions[1] && fractions[1] >= fractions[2]);
}

#[test]
fn zero_amplitude_random_run_is_all_zero_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.toml");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"
scenario = "random"
grid_n = 16
viscosity = 0.0
t_end = 0.05
dt_max = 0.05
output_dir = "{}"

[random]
spectrum_slope = -2.0
k_peak = 2.0
amplitude = 0.0
"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["run", cfg.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let records = orthoflow::experiment::read_records_csv(
        &std::fs::read_to_string(out_dir.join("records.csv")).unwrap(),
    )
    .unwrap();
    for r in &records {
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.max_speed, 0.0);
        assert_eq!(r.max_vorticity, 0.0);
        assert_eq!(r.bkm_omega_integral, Some(0.0));
    }
}
