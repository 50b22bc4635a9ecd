use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use fracsl_cli::{RunManifest, MANIFEST_NAME};

fn fracsl(command: &str, config: &str, out: &Path, extra: &[&str]) -> i32 {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_fracsl"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env("FRACSL_THREADS", "2")
        .status()
        .unwrap();
    status.code().unwrap()
}

fn manifest(out: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(out.join(MANIFEST_NAME)).unwrap()).unwrap()
}

fn listed_equals_present(out: &Path) {
    let m = manifest(out);
    let listed: BTreeSet<String> = m.files.iter().map(|f| f.path.clone()).collect();
    let present: BTreeSet<String> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != MANIFEST_NAME)
        .collect();
    assert_eq!(listed, present);
    for f in &m.files {
        let bytes = std::fs::read(out.join(&f.path)).unwrap();
        assert_eq!(fracsl_cli::manifest::sha256_hex(&bytes), f.sha256, "{}", f.path);
    }
}

#[test]
fn region_map_writes_grid_and_heatmap() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("run");
    let code = fracsl("region-map", r#"{"command": "region-map", "parameters": {"resolution": 50}}"#, &out, &[]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("region_map.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2501);
    let svg = std::fs::read_to_string(out.join("region_map.svg")).unwrap();
    let legend = svg.matches("width=\"10\" height=\"10\"").count();
    assert_eq!(svg.matches("<rect").count() - 1 - legend, 2500);
    listed_equals_present(&out);
}

#[test]
fn identical_runs_have_identical_digests() {
    let root = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "eigensolve", "seed": 3, "parameters": {"potential": {"kind": "bump", "amplitude": 1.0, "d": 0.4}, "h": 0.5, "n_max": 25, "x0": 0.5}}"#;
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    assert_eq!(fracsl("eigensolve", cfg, &a, &[]), 0);
    assert_eq!(fracsl("eigensolve", cfg, &b, &[]), 0);
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma.files, mb.files);
    assert_eq!(ma.config_hash, mb.config_hash);
    listed_equals_present(&a);
}

#[test]
fn exit_codes_follow_the_contract() {
    let root = tempfile::tempdir().unwrap();
    // Configuration error: missing alpha.
    assert_eq!(fracsl("forward", r#"{"command": "forward", "parameters": {}}"#, &root.path().join("c"), &[]), 2);
    assert!(!root.path().join("c").exists());
    // Command on the line disagrees with the config.
    assert_eq!(fracsl("kernel", r#"{"command": "region-map", "parameters": {}}"#, &root.path().join("d"), &[]), 2);
    // Non-empty output directory.
    let busy = root.path().join("busy");
    std::fs::create_dir(&busy).unwrap();
    std::fs::write(busy.join("keep.txt"), "x").unwrap();
    assert_eq!(fracsl("region-map", r#"{"command": "region-map", "parameters": {}}"#, &busy, &[]), 2);
    assert_eq!(std::fs::read_to_string(busy.join("keep.txt")).unwrap(), "x");
    // Check failure: the free m-function grows like lambda^(1/2), not lambda^0.
    let out = root.path().join("weyl");
    let code = fracsl(
        "weyl-scan",
        r#"{"command": "weyl-scan", "parameters": {"expected_exponent": 0.0, "count": 6}}"#,
        &out,
        &[],
    );
    assert_eq!(code, 1);
    assert!(!manifest(&out).checks[0].pass);
    listed_equals_present(&out);
    // Numerical failure: the ray leaves the overflow-safe window.
    let out = root.path().join("num");
    let code = fracsl("weyl-scan", r#"{"command": "weyl-scan", "parameters": {"magnitude_max": 5000}}"#, &out, &[]);
    assert_eq!(code, 3);
    let m = manifest(&out);
    assert!(m.error.as_deref().unwrap_or("").starts_with("weyl_toolkit:"), "{:?}", m.error);
}

#[test]
fn seed_flag_overrides_config_seed() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("s");
    assert_eq!(fracsl("region-map", r#"{"command": "region-map", "seed": 1, "parameters": {"resolution": 10}}"#, &out, &["--seed", "42"]), 0);
    assert_eq!(manifest(&out).seed, 42);
}

#[test]
fn kernel_and_forward_commands_pass_their_checks() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("k");
    let cfg = r#"{"command": "kernel", "parameters": {"alpha": 0.6, "potential": {"kind": "constant", "value": -1.0}, "h": 0.3, "t_steps": 128, "drive": {"kind": "sine", "omega": 3.0}}}"#;
    assert_eq!(fracsl("kernel", cfg, &out, &[]), 0);
    assert!(manifest(&out).check("duhamel_relative").unwrap().pass);
    let out = root.path().join("f");
    let cfg = r#"{"command": "forward", "parameters": {"alpha": 0.7, "potential": {"kind": "polynomial", "coeffs": [-1.0, 0.0, -1.0]}, "big_h": 1.0, "fd": {"nx": 128, "nt": 256}, "t_steps": 16}}"#;
    assert_eq!(fracsl("forward", cfg, &out, &[]), 0);
    listed_equals_present(&out);
}

#[test]
fn counting_command_checks_bound_and_inclusion() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("n");
    let cfg = r#"{"command": "counting", "parameters": {"x0": 0.5, "n_max": 60}}"#;
    assert_eq!(fracsl("counting", cfg, &out, &[]), 0);
    let m = manifest(&out);
    assert!(m.check("counting_bound").unwrap().pass);
    assert!(m.check("complement_inclusion").unwrap().detail.starts_with("30 "), "{:?}", m.check("complement_inclusion"));
}
