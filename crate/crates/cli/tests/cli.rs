use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmshare-sim"))
        .args(args)
        .env_remove("MMSHARE_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("sim.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_csv_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "drops = 50\nseed = 7\n");
    let out_dir = dir.path().join("out");
    let out = sim(&[
        "run", "--config", &cfg, "--scenario", "s3", "--model", "m2", "--out", out_dir.to_str().unwrap(), "--plot",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let drops = fs::read_to_string(out_dir.join("drops.csv")).unwrap();
    assert_eq!(drops.lines().count(), 51);
    assert!(out_dir.join("coverage_Spectrum_Model2_sinr.csv").exists());
    assert!(out_dir.join("coverage_Spectrum_Model2_rate.csv").exists());
    let svg = fs::read_to_string(out_dir.join("sinr_coverage.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains("Spectrum/Model2"));
}

#[test]
fn json_output_embeds_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = sim(&["run", "--drops", "20", "--seed", "99", "--format", "json", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(text.contains("\"seed\": 99"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let d = dir.path().join(name);
        assert_eq!(code(&sim(&["run", "--drops", "60", "--seed", "3", "--out", d.to_str().unwrap()])), 0);
        fs::read(d.join("drops.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn grid_flags_change_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g");
    let out = sim(&[
        "run", "--drops", "20", "--sinr-min", "-5", "--sinr-max", "5", "--sinr-step", "5", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(out_dir.join("coverage_NoSharing_Model3_sinr.csv")).unwrap();
    let thresholds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(thresholds, ["-5", "0", "5"]);
}

#[test]
fn sweep_plots_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = sim(&["sweep", "--drops", "10", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for metric in ["sinr", "rate"] {
        let svg = fs::read_to_string(out_dir.join(format!("{metric}_coverage.svg"))).unwrap();
        assert_eq!(svg.matches(r#"class="legend-entry""#).count(), 16);
    }
    assert!(out_dir.join("s4_m3").join("drops.csv").exists());
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "n_tx = 32\n");
    let out = sim(&["run", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("array dims product"));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(code(&sim(&["run", "--config", missing.to_str().unwrap()])), 1);
    assert_eq!(code(&sim(&["run", "--scenario", "s9"])), 1);
    assert_eq!(code(&sim(&["run", "--drops", "0"])), 1);
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = sim(&["run", "--drops", "5", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}
