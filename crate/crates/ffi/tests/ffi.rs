use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dualprecode_ffi::*;

const SMALL: &str = "antennas = 40\ngroups = 2\nusers_per_group = 4\nspread = pi/10\nsnr_db = 0, 10\nn_trials = 4\nschemes = BD, BDS, ASYM_BD\n";

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { dp_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn experiment(text: &str) -> *mut DpExperiment {
    let text = CString::new(text).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { dp_experiment_from_config(text.as_ptr(), &mut exp) }, DpStatus::Ok);
    assert!(!exp.is_null());
    exp
}

#[test]
fn run_and_read_rows() {
    let exp = experiment(SMALL);
    unsafe {
        assert_eq!(dp_experiment_set_seed(exp, 3), DpStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(dp_experiment_run(exp, &mut res), DpStatus::Ok);
        assert_eq!(dp_results_len(res), 6);
        let mut row = std::mem::zeroed::<DpRow>();
        assert_eq!(dp_results_get(res, 1, &mut row), DpStatus::Ok);
        assert_eq!(row.scheme, DpScheme::Bds);
        assert_eq!((row.snr_db, row.n_trials, row.seed, row.n_bits), (0.0, 4, 3, -1));
        assert!(row.sum_rate > 0.0 && row.std_error > 0.0);
        assert_eq!(dp_results_get(res, 2, &mut row), DpStatus::Ok);
        assert_eq!(row.scheme, DpScheme::AsymBd);
        assert!(row.std_error.is_nan());
        assert_eq!(dp_results_get(res, 6, &mut row), DpStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        let mut id = [0 as c_char; 64];
        assert_eq!(dp_results_scenario_id(res, 0, id.as_mut_ptr(), id.len()), "scenario".len() + 1);
        assert_eq!(CStr::from_ptr(id.as_ptr()).to_str().unwrap(), "scenario");
        dp_results_free(res);
        dp_experiment_free(exp);
    }
}

#[test]
fn config_errors_are_reported() {
    let text = CString::new("colour = blue\n").unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { dp_experiment_from_config(text.as_ptr(), &mut exp) }, DpStatus::Config);
    assert!(exp.is_null());
    assert!(last_error().contains("colour"));
    // the message length is reported even when the buffer is too small
    let mut tiny = [0 as c_char; 4];
    let need = unsafe { dp_last_error_message(tiny.as_mut_ptr(), tiny.len()) };
    assert!(need > 4);
    assert_eq!(unsafe { CStr::from_ptr(tiny.as_ptr()) }.to_bytes().len(), 3);

    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { dp_experiment_from_preset(name.as_ptr(), &mut exp) }, DpStatus::Config);
    assert_eq!(unsafe { dp_experiment_from_config(ptr::null(), &mut exp) }, DpStatus::NullPointer);
    assert_eq!(unsafe { dp_experiment_set_trials(ptr::null_mut(), 3) }, DpStatus::NullPointer);
    unsafe {
        dp_experiment_free(ptr::null_mut());
        dp_results_free(ptr::null_mut());
    }
    assert_eq!(unsafe { dp_results_len(ptr::null()) }, 0);
}

#[test]
fn presets_load() {
    let name = CString::new("fig9").unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(dp_experiment_from_preset(name.as_ptr(), &mut exp), DpStatus::Ok);
        assert_eq!(dp_experiment_set_trials(exp, 0), DpStatus::InvalidArgument);
        assert_eq!(dp_experiment_set_trials(exp, 2), DpStatus::Ok);
        dp_experiment_free(exp);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn csv_output_appends() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("out.csv").to_str().unwrap()).unwrap();
    let exp = experiment(SMALL);
    unsafe {
        assert_eq!(dp_experiment_run_csv(exp, path.as_ptr()), DpStatus::Ok);
        assert_eq!(dp_experiment_run_csv(exp, path.as_ptr()), DpStatus::Ok);
        dp_experiment_free(exp);
    }
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
}

#[test]
fn scalar_helpers() {
    let mut t = 0.0;
    unsafe {
        assert_eq!(dp_tau_from_bits(50, 14, DpScheme::Bd, &mut t), DpStatus::Ok);
        assert!((t - 0.27703653396375477).abs() < 1e-14);
        assert_eq!(dp_tau_from_bits(50, 14, DpScheme::Switch, &mut t), DpStatus::InvalidArgument);
        let (mut c, mut x) = (0.0, 0.0);
        assert_eq!(dp_mismatch_stats(0.0, std::f64::consts::FRAC_PI_4, &mut c, &mut x), DpStatus::Ok);
        assert!((c - 0.8183098861837907).abs() < 1e-12 && (x - 0.22203094070331453).abs() < 1e-12);
        assert_eq!(dp_mismatch_stats(2.0, 0.1, &mut c, &mut x), DpStatus::InvalidArgument);
        let (mut bd, mut bds) = (0.0, 0.0);
        let spread = std::f64::consts::PI / 10.0;
        assert_eq!(dp_asymptotic_sum_rate(40, 2, 4, spread, 10.0, 0.0, 0.0, DpScheme::Bd, &mut bd), DpStatus::Ok);
        assert_eq!(dp_asymptotic_sum_rate(40, 2, 4, spread, 10.0, 0.0, 0.0, DpScheme::AsymBds, &mut bds), DpStatus::Ok);
        assert!(bd > 0.0 && (bd - bds).abs() < 1e-6 * bd);
        assert_eq!(dp_asymptotic_sum_rate(41, 2, 4, spread, 10.0, 0.0, 0.0, DpScheme::Bd, &mut bd), DpStatus::InvalidArgument);
        assert!(!CStr::from_ptr(dp_version()).to_str().unwrap().is_empty());
    }
}

fn target_dir() -> Option<PathBuf> {
    // .../target/<profile>/deps/ffi-<hash>
    std::env::current_exe().ok()?.parent()?.parent().map(Path::to_path_buf)
}

/// Compiles a small C program against the generated header and the static
/// library. Skipped when no C compiler or archive is available.
#[test]
fn c_program_links_and_runs() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("dualprecode.h").exists(), "header was not generated");
    let Some(lib_dir) = target_dir().filter(|d| d.join("libdualprecode_ffi.a").exists()) else {
        eprintln!("skipping: static library not found");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "dualprecode.h"
int main(void) {
    DpExperiment *exp = NULL;
    if (dp_experiment_from_config("antennas = 40\ngroups = 2\nusers_per_group = 4\nspread = pi/10\nn_trials = 2\nschemes = BD\n", &exp) != DP_STATUS_OK) return 1;
    DpResults *res = NULL;
    if (dp_experiment_run(exp, &res) != DP_STATUS_OK) return 2;
    DpRow row;
    if (dp_results_get(res, 0, &row) != DP_STATUS_OK || row.sum_rate <= 0.0) return 3;
    char msg[128];
    if (dp_experiment_from_preset("missing", &exp) != DP_STATUS_CONFIG) return 4;
    dp_last_error_message(msg, sizeof msg);
    printf("%s|%.3f|%s\n", dp_version(), row.sum_rate, msg);
    dp_results_free(res);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let compiled = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(lib_dir.join("libdualprecode_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output();
    let Ok(out) = compiled else {
        eprintln!("skipping: no C compiler");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("unknown name 'missing'"), "{text}");
}
