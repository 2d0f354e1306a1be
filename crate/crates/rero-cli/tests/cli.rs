//! End-to-end checks of the `rero` binary: exit codes, output values, the
//! run log, and determinism across thread counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rero"))
}

fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn run_log_payloads(path: &Path) -> Vec<(String, String, String)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            (
                v["config_hash"].as_str().unwrap().to_string(),
                v["mode"].as_str().unwrap().to_string(),
                v["payload"].to_string(),
            )
        })
        .collect()
}

#[test]
fn baseline_prints_the_known_values() {
    let out = bin()
        .args(["baseline", "--config"])
        .arg(workspace_config("game_constant_avg.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("kappa      = 0.062500000000"), "{text}");
    assert!(text.contains("kappa_bar  = 0.176025390625"), "{text}");
    assert!(text.contains("0000"), "{text}");

    let json_out = bin()
        .args(["baseline", "--json", "--config"])
        .arg(workspace_config("game_constant_avg.json"))
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    assert_eq!(v["kappa"].as_f64().unwrap(), 0.0625);
    assert_eq!(v["kappa_bar"].as_f64().unwrap(), 0.176025390625);
}

#[test]
fn baseline_on_a_point_mass_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("point.json");
    std::fs::write(
        &cfg,
        r#"{"game": {
            "variant": "avg_dist_rero",
            "universe": {"kind": "categorical", "labels": ["a", "b"]},
            "distribution": {"kind": "point_mass", "record": "b"},
            "n": 2,
            "mechanism": {"kind": "constant"},
            "adversary": {"kind": "exact_bayes"},
            "loss": {"kind": "exact_match", "eta": 0.0}
        }}"#,
    )
    .unwrap();
    let out = bin()
        .args(["baseline", "--json", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kappa"].as_f64().unwrap(), 1.0);
    assert_eq!(v["kappa_bar"].as_f64().unwrap(), 1.0);
}

#[test]
fn missing_config_exits_two() {
    let out = bin()
        .args(["baseline", "--config", "/no/such/file.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["exact", "--config", "/no/such/file.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\"game\": {\"variant\": \"nope\"}}").unwrap();
    let out = bin()
        .args(["exact", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_matches_the_closed_forms_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");

    let out = bin()
        .args(["exact", "--config"])
        .arg(workspace_config("game_rr_avg.json"))
        .arg("--out")
        .arg(&log)
        .arg("--json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 0.75).abs() < 1e-9);

    let out = bin()
        .args(["exact", "--config"])
        .arg(workspace_config("game_constant_avg.json"))
        .arg("--out")
        .arg(&log)
        .arg("--json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["gamma"].as_f64().unwrap(), 0.0625);

    let records = run_log_payloads(&log);
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|(_, mode, _)| mode == "exact"));
    assert_ne!(
        records[0].0, records[1].0,
        "different configs, different hashes"
    );
}

#[test]
fn estimate_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    for threads in ["1", "8", "1"] {
        let out = bin()
            .args(["estimate", "--config"])
            .arg(workspace_config("game_rr_avg.json"))
            .args([
                "--trials",
                "20000",
                "--seed",
                "7",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&log)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let records = run_log_payloads(&log);
    assert_eq!(records.len(), 3);
    assert_eq!(
        records[0].2, records[1].2,
        "threads 1 vs 8 changed the payload"
    );
    assert_eq!(records[0].2, records[2].2, "repeat run changed the payload");
    assert_eq!(records[0].0, records[1].0, "config hash changed");
}

#[test]
fn config_hash_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let original = std::fs::read_to_string(workspace_config("game_rr_avg.json")).unwrap();
    let reformatted = original.replace('\n', "").replace("  ", " ");
    let alt = dir.path().join("alt.json");
    std::fs::write(&alt, reformatted).unwrap();

    for cfg in [workspace_config("game_rr_avg.json"), alt] {
        let out = bin()
            .args(["exact", "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(&log)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let records = run_log_payloads(&log);
    assert_eq!(
        records[0].0, records[1].0,
        "formatting changed the config hash"
    );
    assert_eq!(records[0].2, records[1].2);
}

#[test]
fn audit_small_grid_passes_and_reports_non_dp_rows() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let out = bin()
        .args(["audit", "--config"])
        .arg(workspace_config("grid_small.json"))
        .args(["--threads", "2", "--out"])
        .arg(&log)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("n/a (not DP)"), "{text}");
    assert!(text.contains("0 failed"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn audit_empty_grid_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(
        &cfg,
        r#"{"grid": {"epsilons": [], "universe_sizes": [2], "ns": [1], "mechanisms": []}}"#,
    )
    .unwrap();
    let log = dir.path().join("runs.jsonl");
    let out = bin()
        .args(["audit", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&log)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 cells audited"));
}

#[test]
fn separation_command_reports_both_prongs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let out = bin()
        .args(["separation", "--k", "4", "--n", "3", "--out"])
        .arg(&log)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gamma = 1.000000000000"), "{text}");
    assert!(text.contains("fixture = 0.066162109375"), "{text}");
    assert!(
        text.contains("bound 2^-k + 2^-(n-1)k = 0.066406250000"),
        "{text}"
    );
    assert!(text.contains("fixture within bound: true"), "{text}");

    // The smallest instance runs too.
    let out = bin()
        .args(["separation", "--k", "1", "--n", "2", "--out"])
        .arg(&log)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("informed game"), "{text}");
    assert!(
        text.contains("bound 2^-k + 2^-(n-1)k = 1.000000000000"),
        "{text}"
    );
}

#[test]
fn measure_epsilon_command() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let out = bin()
        .args(["measure-epsilon", "--config"])
        .arg(workspace_config("game_rr_avg.json"))
        .arg("--out")
        .arg(&log)
        .arg("--json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["measured_epsilon"].as_f64().unwrap() - 3.0f64.ln()).abs() < 1e-9);

    let out = bin()
        .args(["measure-epsilon", "--config"])
        .arg(workspace_config("game_rero_separation.json"))
        .arg("--out")
        .arg(&log)
        .arg("--json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["measured_epsilon"].is_null());
    assert_eq!(v["infinite"].as_bool(), Some(true));
}

#[test]
fn taxonomy_validate_builtin_has_no_errors() {
    let out = bin().args(["taxonomy", "validate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 errors"), "{}", stdout(&out));
}

#[test]
fn taxonomy_validate_flags_missing_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("incomplete.json");
    std::fs::write(
        &file,
        r#"{"name": "incomplete", "dataset_generation": "drawn"}"#,
    )
    .unwrap();
    let out = bin()
        .args(["taxonomy", "validate", "--file"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("attack_goal"));
}

#[test]
fn taxonomy_validate_accepts_the_example_spec() {
    let out = bin()
        .args(["taxonomy", "validate", "--file"])
        .arg(workspace_config("attack_spec_example.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn taxonomy_render_produces_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("fig.svg");
    let out = bin()
        .args([
            "taxonomy", "render", "--select", "rero", "--select", "distrero", "--out",
        ])
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.starts_with("<?xml"));
}

#[test]
fn taxonomy_render_unknown_name_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("fig.svg");
    let out = bin()
        .args(["taxonomy", "render", "--select", "not-an-attack", "--out"])
        .arg(&svg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!svg_path.exists());
}

#[test]
fn taxonomy_render_with_extra_config_specs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tax.json");
    let extra = std::fs::read_to_string(workspace_config("attack_spec_example.json")).unwrap();
    std::fs::write(
        &cfg,
        format!(
            r#"{{"taxonomy": {{"select": ["rero", "census-style-reconstruction"], "specs": [{extra}]}}}}"#
        ),
    )
    .unwrap();
    let svg_path = dir.path().join("fig.svg");
    let out = bin()
        .args(["taxonomy", "render", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("census-style-reconstruction"));
}
