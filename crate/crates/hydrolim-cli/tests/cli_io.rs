//! Harness-level IO tests: configuration validation, checkpoint errors,
//! experiment output round trips, and the CLI binary's exit behavior.

use hydrolim_cli::config::{ExperimentConfig, GridConfig, IcConfig, IcKind, SchemeConfig};
use hydrolim_cli::{
    checkpoint_read, checkpoint_write, load_summary, run_experiment, verify_summary_against_csv,
    HarnessError, RunOptions,
};
use hydrolim_core::testing::random_cf_state;
use hydrolim_core::Grid;
use std::path::Path;
use std::process::Command;

fn tiny_config(eps_list: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        version: 1,
        grid: GridConfig {
            nx: 8,
            ny: 8,
            nz: 8,
        },
        dt: 1e-3,
        t_final: 0.02,
        eps_list,
        ic: IcConfig {
            kind: IcKind::WellPrepared,
            amplitude: 1.0,
        },
        scheme: SchemeConfig::Cnab2,
        record_every: 4,
        out_dir: None,
    }
}

fn run_into(dir: &Path, config: &ExperimentConfig) -> hydrolim_cli::RunSummary {
    run_experiment(
        config,
        &RunOptions {
            out_dir: dir.to_path_buf(),
            threads: 1,
            quiet: true,
        },
    )
    .unwrap()
}

#[test]
fn summary_round_trips_and_verifies_against_csv() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_into(dir.path(), &tiny_config(vec![0.2, 0.1, 0.05]));
    assert!(summary.rates.is_some());
    assert_eq!(summary.runs.len(), 3);
    assert!(summary.runs.iter().all(|r| r.completed));

    let loaded = load_summary(dir.path()).unwrap();
    assert_eq!(loaded.runs.len(), 3);

    let verified = verify_summary_against_csv(dir.path()).unwrap();
    assert!(verified.rates.is_some());

    // corrupting a CSV value must be caught by the recomputation
    let csv_path = dir.path().join(hydrolim_cli::csv_name(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.len() - 1;
    let mut fields: Vec<String> = lines[last].split(',').map(String::from).collect();
    fields[1] = "999.0".into();
    lines[last] = fields.join(",");
    std::fs::write(&csv_path, lines.join("\n") + "\n").unwrap();
    assert!(matches!(
        verify_summary_against_csv(dir.path()),
        Err(HarnessError::SummaryMismatch { .. })
    ));
}

#[test]
fn rates_are_withheld_below_three_eps() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_into(dir.path(), &tiny_config(vec![0.2, 0.1]));
    assert!(summary.rates.is_none());
    assert_eq!(summary.runs.len(), 2);
}

#[test]
fn zero_horizon_zero_amplitude_has_no_rates_and_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny_config(vec![0.2, 0.1, 0.05]);
    config.t_final = 0.0;
    config.ic.amplitude = 0.0;
    let summary = run_into(dir.path(), &config);
    assert!(summary.rates.is_none());
    for run in &summary.runs {
        assert!(run.aggregates.sup_delta_sigma_l2 < 1e-13);
        assert!(run.aggregates.sup_delta_w_l2 < 1e-13);
        assert_eq!(run.aggregates.l2t_delta_w_l2, 0.0);
    }
}

#[test]
fn checkpoint_reports_truncation_offset() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::cube(8).unwrap();
    let state = random_cf_state(grid, 2, 0.5, 0.1, 11);
    let path = dir.path().join("state.hlim");
    checkpoint_write(&state, &path).unwrap();

    let bytes = std::fs::read(&path).unwrap();
    let cut = dir.path().join("cut.hlim");
    std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    let err = checkpoint_read(&cut).unwrap_err();
    match err {
        HarnessError::Checkpoint { offset, reason } => {
            assert!(offset > 0 && reason.contains("truncated"), "{offset} {reason}");
        }
        other => panic!("unexpected error {other}"),
    }

    // wrong version
    let mut versioned = bytes.clone();
    versioned[4..8].copy_from_slice(&7u32.to_le_bytes());
    let vpath = dir.path().join("version.hlim");
    std::fs::write(&vpath, &versioned).unwrap();
    let err = checkpoint_read(&vpath).unwrap_err().to_string();
    assert!(err.contains("byte 4") && err.contains("version"), "{err}");
}

#[test]
fn divergence_is_flagged_and_the_sweep_continues() {
    // a coarse grid with an enormous time step blows the explicit advection
    // up without taking the whole sweep down
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny_config(vec![0.9, 0.2, 0.1, 0.05]);
    config.dt = 0.2;
    config.t_final = 40.0;
    config.record_every = 50;
    config.ic.amplitude = 40.0;
    let summary = run_into(dir.path(), &config);
    let diverged = summary.runs.iter().filter(|r| !r.completed).count();
    assert!(diverged > 0, "expected at least one diverging run");
    for run in summary.runs.iter().filter(|r| !r.completed) {
        assert!(run.diverged_at.is_some());
    }
    // the summary is still written and loadable
    assert!(load_summary(dir.path()).is_ok());
}

// ---------------------------------------------------------------------------
// binary-level behavior
// ---------------------------------------------------------------------------

fn hydrolim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hydrolim"))
}

#[test]
fn run_with_missing_config_fails_with_message() {
    let out = hydrolim().args(["run", "definitely_missing.json"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("definitely_missing.json"), "{stderr}");
}

#[test]
fn oracle_and_check_subcommands_pass() {
    let out = hydrolim().arg("oracle").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("eigenvalues") && stdout.contains("0.05"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");

    let out = hydrolim().arg("check").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let out = hydrolim().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
}

#[test]
fn run_subcommand_writes_outputs_and_rates_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(vec![0.2, 0.1, 0.05]);
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let out_dir = dir.path().join("out");

    let out = hydrolim()
        .args([
            "--quiet",
            "--out",
            out_dir.to_str().unwrap(),
            "run",
            config_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("summary.json").exists());

    let out = hydrolim()
        .args(["rates", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("delta_w_l2l2") && stdout.contains("agree"), "{stdout}");
}

#[test]
fn hydrolim_out_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(vec![0.2, 0.1]);
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let flag_dir = dir.path().join("from_flag");
    let env_dir = dir.path().join("from_env");

    let out = hydrolim()
        .env("HYDROLIM_OUT", &env_dir)
        .args([
            "--quiet",
            "--out",
            flag_dir.to_str().unwrap(),
            "run",
            config_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_dir.join("summary.json").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn config_errors_are_rejected_before_any_run() {
    let dir = tempfile::tempdir().unwrap();
    // eps_list not strictly decreasing
    let text = r#"{
        "version": 1,
        "grid": {"nx": 8, "ny": 8, "nz": 8},
        "dt": 0.001, "t_final": 0.01,
        "eps_list": [0.1, 0.2],
        "ic": {"kind": "well-prepared", "amplitude": 1.0},
        "scheme": "cnab2",
        "record_every": 1
    }"#;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let out_dir = dir.path().join("should_not_exist");
    let out = hydrolim()
        .args([
            "--quiet",
            "--out",
            out_dir.to_str().unwrap(),
            "run",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out_dir.exists(), "rejected config must not create outputs");
}
