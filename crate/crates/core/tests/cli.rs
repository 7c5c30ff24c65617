use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dualprecode::cli::{preset_text, CSV_HEADER, PRESETS};

const SMALL: &str = "\
antennas = 40
groups = 2
users_per_group = 4
spread = pi/10
snr_db = 0, 10
chi = 0.1
n_trials = 6
schemes = BD, BDS, ASYM_BD
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dualprecode"))
}

fn run_config(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("scenario.cfg");
    fs::write(&cfg, text).unwrap();
    bin().arg("run").arg("--config").arg(&cfg).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), SMALL, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("scenario,BD,0,0.1,0,,"));
    // asymptotic rows carry no stderr and zero trials
    let asym: Vec<&str> = rows[2].split(',').collect();
    assert_eq!((asym[1], asym[7], asym[8]), ("ASYM_BD", "", "0"));
}

#[test]
fn output_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_config(dir.path(), SMALL, &["--seed", "9"]);
    let cfg = dir.path().join("scenario.cfg");
    let b = bin()
        .env("DUALPRECODE_THREADS", "1")
        .args(["run", "--seed", "9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let c = run_config(dir.path(), SMALL, &["--seed", "10"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn out_file_is_appended_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let out_s = out.to_str().unwrap();
    for _ in 0..2 {
        let o = run_config(dir.path(), SMALL, &["--out", out_s, "--trials", "2"]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let text = fs::read_to_string(&out).unwrap();
    let header = CSV_HEADER.join(",");
    assert_eq!(text.lines().filter(|l| *l == header).count(), 1);
    assert_eq!(text.lines().count(), 1 + 2 * 6);

    let foreign = dir.path().join("other.csv");
    fs::write(&foreign, "a,b,c\n1,2,3\n").unwrap();
    let o = run_config(dir.path(), SMALL, &["--out", foreign.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&foreign).unwrap(), "a,b,c\n1,2,3\n");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "colour = blue\n",
        "antennas = 40\nantennas = 60\n",
        "chi = 1.5\n",
        "snr_db = 0, 10\nchi = 0, 0.1\n",
        "layouts = single@0.5\nschemes = BDS\n",
        "csit = bits\n",
        "antennas = 41\n",
    ];
    for text in cases {
        let o = run_config(dir.path(), text, &[]);
        assert_eq!(o.status.code(), Some(2), "config {text:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.starts_with("dualprecode: "), "{err}");
        assert!(o.stdout.is_empty() || stdout(&o).lines().count() == 1);
    }
    let missing = bin().args(["run", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let bad_threads = bin().env("DUALPRECODE_THREADS", "zero").arg("list-presets").output().unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
    let unknown = bin().args(["preset", "fig7"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn empty_scheme_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "schemes =\n", &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim_end(), CSV_HEADER.join(","));
}

#[test]
fn presets_are_listed_and_printable() {
    let o = bin().arg("list-presets").output().unwrap();
    assert!(o.status.success());
    let listed = stdout(&o);
    assert_eq!(listed.lines().count(), PRESETS.len());
    for (name, _, _) in PRESETS {
        assert!(listed.lines().any(|l| l.starts_with(name)));
        let p = bin().args(["preset", name, "--print-config"]).output().unwrap();
        assert_eq!(stdout(&p), preset_text(name).unwrap());
    }
}

#[test]
fn printed_preset_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = preset_text("fig5").unwrap().replace("antennas = 120", "antennas = 40").replace("groups = 4", "groups = 2");
    let o = run_config(dir.path(), &text, &["--trials", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 7 SNR points × 4 schemes
    assert_eq!(stdout(&o).lines().count(), 1 + 28);
}
