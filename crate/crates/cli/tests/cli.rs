//! End-to-end tests of the `echocycle` binary: file outputs, reproducibility,
//! and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_echocycle"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut entries: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (PathBuf::from(p.file_name().unwrap()), bytes)
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn scheme_hpc32_emits_128_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_ok(&["scheme", "--kind", "hpc", "--m", "32", "--out", tmp.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rows: 128"), "{stdout}");
    let scheme = read_json(&tmp.path().join("scheme.json"));
    assert_eq!(scheme["rows"].as_array().unwrap().len(), 128);
    assert_eq!(scheme["kind"], "hpc");
    assert_eq!(scheme["m"], 32);
    let manifest = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["tool"], "echocycle");
    assert_eq!(manifest["command"], "scheme");
}

#[test]
fn scheme_tpc_and_cpc_row_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_ok(&["scheme", "--kind", "tpc", "--m", "8", "--out", tmp.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rows: 2"));
    let tmp2 = tempfile::tempdir().unwrap();
    let out2 =
        run_ok(&["scheme", "--kind", "cpc", "--m", "16", "--out", tmp2.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out2.stdout).contains("rows: 65536"));
}

#[test]
fn verify_reports_hpc_ratio_and_flags_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&["scheme", "--kind", "hpc", "--m", "32", "--out", tmp.path().to_str().unwrap()]);
    let scheme_path = tmp.path().join("scheme.json");
    let vdir = tmp.path().join("verify");
    run_ok(&["verify", "--scheme", scheme_path.to_str().unwrap(), "--out", vdir.to_str().unwrap()]);
    let report = read_json(&vdir.join("verify.json"));
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((ratio - 0.9844).abs() < 1e-4, "ratio {ratio}");
    assert_eq!(report["desired_preserved"], true);

    // flip one sign: coverage must drop below 1 with survivors listed
    let mut scheme = read_json(&scheme_path);
    let flipped = -scheme["rows"][5][3].as_i64().unwrap();
    scheme["rows"][5][3] = flipped.into();
    let edited = tmp.path().join("edited.json");
    std::fs::write(&edited, serde_json::to_string(&scheme).unwrap()).unwrap();
    let vdir2 = tmp.path().join("verify2");
    run_ok(&["verify", "--scheme", edited.to_str().unwrap(), "--out", vdir2.to_str().unwrap()]);
    let report2 = read_json(&vdir2.join("verify.json"));
    assert!(report2["ratio"].as_f64().unwrap() < ratio);
    assert!(!report2["surviving_classes"].as_array().unwrap().is_empty());
}

#[test]
fn cpc_verify_is_complete() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&["scheme", "--kind", "cpc", "--m", "8", "--out", tmp.path().to_str().unwrap()]);
    let vdir = tmp.path().join("v");
    run_ok(&[
        "verify",
        "--scheme",
        tmp.path().join("scheme.json").to_str().unwrap(),
        "--out",
        vdir.to_str().unwrap(),
    ]);
    let report = read_json(&vdir.join("verify.json"));
    assert_eq!(report["ratio"].as_f64().unwrap(), 1.0);
    assert_eq!(report["surviving_classes"].as_array().unwrap().len(), 0);
}

#[test]
fn simulate_is_reproducible_from_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "task": "trace",
        "sequence": { "kind": "cpmg", "m": 4, "tau": 1e-6 },
        "noise": { "t1": 2e-3, "t2": 1e-5, "detuning_sigma": 2e6, "flip_error": 0.08 },
        "scheme": { "kind": "hpc" },
        "ensemble": 16,
        "seed": 42
    });
    let cfg_path = tmp.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    let run1 = tmp.path().join("run1");
    let run2 = tmp.path().join("run2");
    run_ok(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", run1.to_str().unwrap()]);
    run_ok(&[
        "simulate",
        "--config",
        run1.join("manifest.json").to_str().unwrap(),
        "--out",
        run2.to_str().unwrap(),
    ]);
    assert_eq!(dir_contents(&run1), dir_contents(&run2), "round trip must be byte-identical");
    // combined trace exists with the CSV header and per-row files
    let combined = std::fs::read_to_string(run1.join("combined.csv")).unwrap();
    assert!(combined.starts_with("time_s,sx,sy,sz\n"));
    assert!(run1.join("row_0015.csv").exists());
}

#[test]
fn simulate_sweep_m_shows_stronger_tpc_echoes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "task": "sweep_m",
        "sequence": { "kind": "cpmg", "m": 2, "tau": 2e-7 },
        "noise": { "t1": 2e-3, "t2": 1e-5, "detuning_sigma": 4e6, "flip_error": 0.1 },
        "scheme": { "kind": "hpc" },
        "ensemble": 100,
        "seed": 11,
        "sweep_m": [2, 4, 8, 16],
        "compare_schemes": ["tpc", "hpc"]
    });
    let cfg_path = tmp.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    run_ok(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    let csv = std::fs::read_to_string(tmp.path().join("sweep_m.csv")).unwrap();
    let mut tpc = std::collections::BTreeMap::new();
    let mut hpc = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let m: usize = f[0].parse().unwrap();
        let amp: f64 = f[3].parse().unwrap();
        match f[2] {
            "tpc" => tpc.insert(m, amp),
            _ => hpc.insert(m, amp),
        };
    }
    for (m, t_amp) in &tpc {
        let h_amp = hpc[m];
        assert!(
            *t_amp >= h_amp - 1e-12,
            "m={m}: TPC {t_amp} should not be weaker than HPC {h_amp}"
        );
    }
}

#[test]
fn simulate_split_separates_channels() {
    let tmp = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "task": "split",
        "sequence": { "kind": "cpmg", "m": 2, "tau": 1e-6 },
        "noise": { "t1": 6e-3, "t2": 1e-5, "detuning_sigma": 6e6, "flip_error": 0.1 },
        "scheme": { "kind": "cpc" },
        "ensemble": 150,
        "seed": 13,
        "storage_times": [4e-6, 9e-6, 14e-6, 19e-6, 25e-6, 30e-6, 35e-6, 40e-6]
    });
    let cfg_path = tmp.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    run_ok(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    let fits = read_json(&tmp.path().join("split_fits.json"));
    assert!(fits["separation"].as_f64().unwrap() > 50.0);
}

#[test]
fn fit_scaling_matches_reference_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let data = format!("{}/../../data/t2_vs_m_sample_a.csv", env!("CARGO_MANIFEST_DIR"));
    run_ok(&[
        "fit", "--data", &data, "--model", "scaling", "--cycling", "hpc", "--sequence", "cpmg",
        "--m-min", "8", "--m-max", "128", "--out", tmp.path().to_str().unwrap(),
    ]);
    let fit = read_json(&tmp.path().join("fit.json"));
    let alpha = fit["alpha"].as_f64().unwrap();
    assert!((alpha - 0.17).abs() < 0.03, "alpha {alpha}");
}

#[test]
fn fit_mono_recovers_synthetic_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("time_s,amplitude\n");
    for k in 1..=20 {
        let t = k as f64 * 1e-6;
        csv.push_str(&format!("{},{}\n", t, (0.7f64) * (-t / 5e-6).exp()));
    }
    let data = tmp.path().join("decay.csv");
    std::fs::write(&data, csv).unwrap();
    run_ok(&[
        "fit", "--data", data.to_str().unwrap(), "--model", "mono", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let fit = read_json(&tmp.path().join("fit.json"));
    let tc = fit["time_constant_s"].as_f64().unwrap();
    assert!((tc - 5e-6).abs() / 5e-6 < 1e-3, "tc {tc}");
}

#[test]
fn fidelity_ideal_run_is_unity() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&[
        "fidelity", "--family", "cp", "--m-list", "2,4,8", "--scheme", "hpc", "--tau", "1e-6",
        "--out", tmp.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(tmp.path().join("fidelity.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn pathways_csv_lists_cpmg2_echoes() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&[
        "pathways", "--kind", "cpmg", "--m", "2", "--tau", "1e-6", "--noise",
        r#"{"flip_error": 0.1}"#, "--out", tmp.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(tmp.path().join("pathways.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5, "header plus four echo pathways:\n{csv}");
    assert!(csv.contains("0;-1;1;-1,,"));
    assert!(csv.contains("0;1;0;-1,1;2,"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // budget exceeded -> 3
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scheme", "--kind", "cpc", "--m", "40", "--out", tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // validation error -> 2, with every problem listed
    let bad = serde_json::json!({
        "task": "decay",
        "sequence": { "kind": "cpmg", "m": 0 },
        "scheme": {},
        "ensemble": 0
    });
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, serde_json::to_string(&bad).unwrap()).unwrap();
    let out = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    for needle in ["ensemble", "sequence.m", "tau or total_time", "scheme", "sweep_taus"] {
        assert!(stderr.contains(needle), "missing '{needle}' in: {stderr}");
    }

    // non-convergence -> 4
    let flat = tmp.path().join("flat.csv");
    std::fs::write(&flat, "time_s,amplitude\n0,1\n1,1\n2,1\n3,1\n").unwrap();
    let out = bin()
        .args(["fit", "--data", flat.to_str().unwrap(), "--model", "mono", "--out",
               tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // malformed scheme JSON names the location -> 2
    let mangled = tmp.path().join("mangled.json");
    std::fs::write(&mangled, "{\"m\": 2, \"kind\": \"hpc\", \"sign\": [1,").unwrap();
    let out = bin()
        .args(["verify", "--scheme", mangled.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}
