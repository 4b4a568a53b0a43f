use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nvps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvps")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_ODMR: &str = r#"
[spin]
b_nv = "4.4 mT"

[odmr]
start = "2.70 GHz"
stop = "2.80 GHz"
points = 21
"#;

#[test]
fn odmr_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "odmr.toml", SMALL_ODMR);
    let out = dir.path().join("out");
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&out.join("odmr.csv"));
    assert_eq!(rows.len(), 21);
    assert!(rows[0].starts_with("2.700000000,"));

    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "odmr");
    assert_eq!(m["model"]["dim"], 32);
    assert_eq!(m["model"]["channel_count"], 62);
    assert_eq!(m["model"]["channels"].as_array().unwrap().len(), 62);
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|r| r["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["odmr.csv", "odmr_fom.json"]);
    assert!(m["tables"].as_array().unwrap().iter().any(|t| t["role"] == "vibronic"));
}

#[test]
fn replay_is_identical_and_detects_edits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "odmr.toml", SMALL_ODMR);
    let out = dir.path().join("out");
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = out.join("manifest.json");

    let again = dir.path().join("again");
    let o = nvps(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(out.join("odmr.csv")).unwrap(),
        std::fs::read(again.join("odmr.csv")).unwrap()
    );

    // change one rate inside the recorded configuration
    let mut m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    let text = m["config"].as_str().unwrap().to_string();
    let line = text.lines().find(|l| l.starts_with("to_singlet_pm")).unwrap().to_string();
    m["config"] = text.replace(&line, "to_singlet_pm = \"5e7 1/s\"").into();
    let edited = write(dir.path(), "edited.json", &serde_json::to_string(&m).unwrap());
    let o = nvps(&["replay", edited.to_str().unwrap(), "--out", dir.path().join("third").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("MISMATCH"), "{stdout}");
}

#[test]
fn unitless_rate_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[isc]\n\nto_singlet_pm = \"92\"\n");
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains(":3:") && err.contains("to_singlet_pm"), "{err}");
    assert!(!dir.path().join("o").join("manifest.json").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[spin]\nb_field = \"1 mT\"\n");
    let o = nvps(&["trace", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b_field"), "{}", stderr(&o));
}

#[test]
fn degenerate_model_exits_with_solver_code() {
    // no pump, no microwave and no spin relaxation: three stationary states
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flat.toml",
        "[spin]\nrelax_ground = \"0 1/s\"\nrelax_excited = \"0 1/s\"\nb_mw = \"0 T\"\n\n[drive]\nintensity = \"0 W/m^2\"\n\n[odmr]\nstart = \"2.8 GHz\"\nstop = \"2.9 GHz\"\npoints = 5\n",
    );
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn trace_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "trace.toml",
        "[drive]\nintensity = \"30 mW/um^2\"\n\n[trace]\nduration = \"3 us\"\npoints = 301\n",
    );
    let out = dir.path().join("out");
    let o = nvps(&["trace", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["trace_zero.csv", "trace_pm.csv", "trace_delta.csv"] {
        assert_eq!(data_rows(&out.join(name)).len(), 301, "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("trace_summary.json")).unwrap()).unwrap();
    assert!(summary["sample"]["contrast_area"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_dir(&out)
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().starts_with("plot_")));
}

#[test]
fn fom_reads_existing_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "odmr.toml", SMALL_ODMR);
    let out = dir.path().join("out");
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let curve = out.join("odmr.csv");
    let fom_out = dir.path().join("fom");
    let o = nvps(&[
        "fom",
        "--curve",
        curve.to_str().unwrap(),
        "--reference",
        curve.to_str().unwrap(),
        "--out",
        fom_out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f: serde_json::Value = serde_json::from_slice(&std::fs::read(fom_out.join("fom.json")).unwrap()).unwrap();
    let text = f.to_string();
    assert!(text.contains("contrast"), "{text}");
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(fom_out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "odmr.toml", SMALL_ODMR);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(a.join("odmr.csv")).unwrap(), std::fs::read(b.join("odmr.csv")).unwrap());
}

#[test]
fn matrices_can_be_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "odmr.toml", SMALL_ODMR);
    let out = dir.path().join("out");
    let o = nvps(&["odmr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dump-matrices"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("channels.csv")).len(), 62);
    assert!(out.join("hamiltonian.csv").exists());
    assert!(out.join("liouvillian.csv").exists());
}
