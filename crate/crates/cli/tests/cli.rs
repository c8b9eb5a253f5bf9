use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rftrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rftrack"))
        .args(args)
        .output()
        .expect("spawn rftrack")
}

fn write_example(dir: &Path) -> String {
    let out = rftrack(&["example"]);
    assert!(out.status.success());
    let path = dir.join("scenario.json");
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn example_validates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example(dir.path());
    let out = rftrack(&["validate", "--config", &cfg]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("valid: 4 objects, 400 steps, 112 frames x 256 bins"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example(dir.path());
    let text = fs::read_to_string(&cfg).unwrap().replacen("\"duration\": 400.0", "\"duration\": 100.0", 1);
    fs::write(&cfg, text).unwrap();
    let out = rftrack(&["validate", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(!rftrack(&["validate", "--config", "/nonexistent.json"]).status.success());
}

#[test]
fn run_writes_logs_and_repeats_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example(dir.path());
    let metrics = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = rftrack(&[
            "run",
            "--config",
            &cfg,
            "--duration",
            "12",
            "--seed",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for f in ["trajectory.csv", "decisions.csv", "summary.json", "belief/12.json"] {
            assert!(out_dir.join(f).exists(), "missing {f}");
        }
        fs::read(out_dir.join("metrics.csv")).unwrap()
    };
    let a = metrics("a");
    assert_eq!(a, metrics("b"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("step,time,ospa"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn sweep_writes_one_row_per_variant_and_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example(dir.path());
    let csv = dir.path().join("sweep.csv");
    let out = rftrack(&[
        "sweep",
        "--config",
        &cfg,
        "--duration",
        "5",
        "--runs",
        "2",
        "--noise-grid",
        "0.02:0.03:0.01",
        "--variants",
        "straight,renyi",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[0].starts_with("variant,noise_std"));
    assert!(lines[1].starts_with("renyi") || lines[1].starts_with("straight"));
}

#[test]
fn bad_noise_grid_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_example(dir.path());
    let out = rftrack(&["sweep", "--config", &cfg, "--noise-grid", "0.1:x", "--duration", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise grid"));
}
