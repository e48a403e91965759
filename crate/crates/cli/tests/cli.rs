//! End-to-end checks of the binary surface: flags, outputs, exit codes.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simplicial-spectra"))
}

#[test]
fn words_subcommand_verifies_counts_and_dumps() {
    let dir = std::env::temp_dir().join(format!("ss-cli-words-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let out = bin()
        .args(["words", "--kmax", "4", "--d", "2", "--dump"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("2"), "{text}");
    assert!(text.contains("8"), "{text}");
    assert!(!text.contains("NO"), "{text}");
    // maximal-support dump for k = 2: two canonical words, one per line
    let dump = fs::read_to_string(dir.join("words_d2_k2_s3.txt")).unwrap();
    let lines: Vec<&str> = dump.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.contains(&"1,2|1,3|1,2"), "{dump}");
    assert!(lines.contains(&"1,2|2,3|1,2"), "{dump}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn generate_writes_cells_and_matrix() {
    let dir = std::env::temp_dir().join(format!("ss-cli-gen-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "generate",
            "--n",
            "8",
            "--d",
            "2",
            "--p",
            "0.8,0.6",
            "--seed",
            "0x2a",
            "--out-dir",
        ])
        .arg(&dir)
        .args(["--export-matrix", "signed"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for j in 0..=2 {
        let path = dir.join(format!("cells_dim{j}.txt"));
        assert!(path.exists(), "{path:?}");
    }
    let coord = fs::read_to_string(dir.join("signed.mtx")).unwrap();
    let header: Vec<usize> = coord
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(coord.lines().count(), header[1] + 1);
    let rows = fs::read_to_string(dir.join("signed.rows")).unwrap();
    assert_eq!(rows.lines().count(), header[0]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn spectrum_flags_override_config_file() {
    let dir = std::env::temp_dir().join(format!("ss-cli-spec-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    fs::write(
        &config,
        r#"{"n": 10, "d": 2, "p": [0.8, 0.6], "matrix": "unsigned", "realizations": 1, "seed": 3}"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&config)
        .args(["--matrix", "centered", "--realizations", "2", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("centered x2"), "flags must override: {text}");
    for name in [
        "eigenvalues.csv",
        "summary.json",
        "histogram.csv",
        "histogram.svg",
    ] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(doc["matrix"], "centered");
    assert_eq!(doc["realizations"], 2);
    assert!(doc["moment_predictions"].as_array().map(|a| a.len()) == Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn stats_reports_expectations() {
    let dir = std::env::temp_dir().join(format!("ss-cli-stats-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "stats",
            "--n",
            "30",
            "--d",
            "2",
            "--p",
            "0.8,0.5",
            "--realizations",
            "5",
            "--out-dir",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("stats.json")).unwrap()).unwrap();
    assert_eq!(doc["per_realization"].as_array().unwrap().len(), 5);
    assert!((doc["dom_c"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = bin()
        .args([
            "spectrum",
            "--n",
            "10",
            "--p",
            "0.8,0.6",
            "--normalize",
            "sideways",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("normalize"), "{err}");

    let out = bin().args(["words", "--kmax", "12"]).output().unwrap();
    assert!(!out.status.success());
}
