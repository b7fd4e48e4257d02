//! End-to-end checks of the installed binary: exit codes, reproducible CSV,
//! and the documented flag surface.

use std::process::{Command, Output};

fn pasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pasim"))
        .args(args)
        .env("PASIM_CACHE_DIR", std::env::temp_dir().join("pasim-smoke-cache"))
        .output()
        .expect("binary runs")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(pasim(&["--help"]).status.code(), Some(0));
    assert_eq!(pasim(&["--version"]).status.code(), Some(0));
    assert_eq!(pasim(&["awgn-sweep", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(pasim(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        pasim(&["trellis-demo", "--blocklength", "4"]).status.code(),
        Some(1),
        "missing required --emax"
    );
    // semantic configuration error: empty codebook
    assert_eq!(
        pasim(&["trellis-demo", "--blocklength", "4", "--emax", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn trellis_demo_prints_sphere_total() {
    let out = pasim(&["trellis-demo", "--m", "3", "--blocklength", "4", "--emax", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("T_0^0 = 82"), "{text}");
}

#[test]
fn roundtrip_command_passes_and_reports() {
    let out = pasim(&[
        "roundtrip",
        "--scheme",
        "ess",
        "--blocklength",
        "40",
        "--shaping-rate",
        "1.5",
        "--trials",
        "200",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS"), "{text}");
    assert!(text.contains("clean_roundtrips=200"));
}

#[test]
fn corrupted_roundtrips_report_decode_failures() {
    let out = pasim(&[
        "roundtrip",
        "--scheme",
        "ccdm",
        "--blocklength",
        "30",
        "--shaping-rate",
        "1.5",
        "--trials",
        "100",
        "--seed",
        "5",
        "--corrupt",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    // a single corrupted amplitude always breaks the composition
    assert!(text.contains("decode_failures=100"), "{text}");
}

#[test]
fn awgn_sweep_csv_is_bit_identical_across_runs() {
    let args = [
        "awgn-sweep",
        "--scheme",
        "ess",
        "--blocklength",
        "200",
        "--shaping-rate",
        "1.85",
        "--gamma",
        "0.4",
        "--snr-grid",
        "12:12:1",
        "--symbols",
        "5000",
        "--seed",
        "9",
    ];
    let a = pasim(&args);
    let b = pasim(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert!(text.contains("ess-200,200,12.000000,"));
}

#[test]
fn fiber_blocklength_sweep_reports_n_as_x_value() {
    let out = pasim(&[
        "fiber-sweep",
        "--scheme",
        "ess",
        "--shaping-rate",
        "1.5",
        "--gamma",
        "0.5",
        "--power-grid",
        "0",
        "--blocklength-grid",
        "20,40",
        "--spans",
        "1",
        "--symbols",
        "600",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# x_value=blocklength"), "{text}");
    assert!(text.contains("ess-20,20,20.000000,"), "{text}");
    assert!(text.contains("ess-40,40,40.000000,"), "{text}");
    // a multi-point power grid cannot anchor a blocklength sweep
    let bad = pasim(&[
        "fiber-sweep",
        "--scheme",
        "ess",
        "--blocklength-grid",
        "20,40",
        "--power-grid",
        "0:2:2",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn fiber_power_sweep_runs_end_to_end() {
    let out = pasim(&[
        "fiber-sweep",
        "--scheme",
        "uniform",
        "--power-grid",
        "0",
        "--spans",
        "1",
        "--symbols",
        "600",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# x_value=launch_power_dbm"));
    assert!(text.contains("uniform,0,0.000000,"), "{text}");
}

#[test]
fn rate_loss_sweep_writes_csv_file() {
    let dir = std::env::temp_dir().join("pasim-smoke-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rate-loss.csv");
    let out = pasim(&[
        "rate-loss-sweep",
        "--blocklengths",
        "100,200",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines().skip(1); // hash comment
    assert_eq!(lines.next().unwrap(), "blocklength,rate_loss_ess,rate_loss_ccdm");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 3);
        let ess: f64 = cols[1].parse().unwrap();
        let ccdm: f64 = cols[2].parse().unwrap();
        assert!(ess < ccdm);
    }
}
