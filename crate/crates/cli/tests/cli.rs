use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use rbcom::system::{Analysis, Case, SystemConfig};
use rbcom_sim::{config_hash, load_config, parse_config, run_analysis, write_config, CliError};

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn write_text(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rbcom-sim"))
}

#[test]
fn empty_file_is_parse_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_text(dir.path(), "empty.json", "");
    match load_config(&p) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("expected parse error, got {other:?}"),
    }
    let p = write_text(
        dir.path(),
        "bad.json",
        "{\n  \"pv\": {\n    \"r_shunt\": ,\n  }\n}",
    );
    match load_config(&p) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn zero_shunt_names_the_field() {
    let err = parse_config(r#"{"pv": {"r_shunt": 0.0}}"#, Path::new("x")).unwrap_err();
    assert_eq!(err.kind(), "validation");
    assert!(err.to_string().contains("pv.r_shunt"), "{err}");
}

#[test]
fn unknown_keys_rejected() {
    let err = parse_config(r#"{"pv": {"r_shunt": 10.0, "rsh": 1}}"#, Path::new("x")).unwrap_err();
    assert!(matches!(err, CliError::Parse { .. }));
    assert!(err.to_string().contains("rsh"));
    assert!(parse_config(r#"{"extra": {}}"#, Path::new("x")).is_err());
}

#[test]
fn empty_object_is_the_default_table() {
    let cfg = parse_config("{}", Path::new("x")).unwrap();
    assert_eq!(cfg, SystemConfig::default());
}

#[test]
fn presets_match_builtin_cases() {
    let l120 = load_config(&presets().join("tableI-L120.json")).unwrap();
    let l10 = load_config(&presets().join("tableI-L10.json")).unwrap();
    assert_eq!(l120, SystemConfig::preset(Case::L120));
    assert_eq!(l10, SystemConfig::preset(Case::L10));
}

#[test]
fn default_gamma_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_analysis(&SystemConfig::default(), dir.path()).unwrap();
    assert!(((res.summary.gamma - 0.0557) / 0.0557).abs() <= 0.005);
}

/// Load-line solution by bisection, independent of the library solver.
fn oracle_current(i_ph: f64, r_load: f64) -> f64 {
    let nvt = 1.318 * 1.380649e-23 * 298.15 / 1.602176634e-19;
    let g = |i: f64| {
        let v = i * (r_load + 1.3);
        i_ph - 9.381e-9 * ((v / nvt).exp() - 1.0) - v / 5000.0 - i
    };
    let (mut lo, mut hi) = (0.0, i_ph);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn operating_point_summary_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_analysis(&SystemConfig::default(), dir.path()).unwrap();
    let op = res.summary.operating_point;
    let i = oracle_current(0.1492, 0.6);
    assert!((op.i_out - i).abs() < 1e-10);
    assert!((res.summary.charging_power_w - i * i * 0.6).abs() < 1e-10);
    assert!((op.i_out - 0.1491).abs() < 5e-5);
    assert!((res.summary.charging_power_w - 0.0133).abs() < 5e-5);
}

#[test]
fn reference_cases_report_their_deviations() {
    for case in [Case::L120, Case::L10] {
        let mut cfg = SystemConfig::preset(case);
        cfg.run.analysis = Analysis::SnrCapacity;
        let dir = tempfile::tempdir().unwrap();
        let res = run_analysis(&cfg, dir.path()).unwrap();
        let quantities: Vec<&str> = res.deviations.iter().map(|d| d.quantity.as_str()).collect();
        assert_eq!(quantities, ["bandwidth_hz", "total_capacity_bps"]);
        let cap = &res.deviations[1];
        assert_eq!(cap.value, res.summary.total_capacity_bps);
    }
}

fn small(analysis: Analysis) -> SystemConfig {
    let mut cfg = SystemConfig::preset(Case::L120);
    cfg.run.analysis = analysis;
    cfg.run.power_grid.points = 6;
    cfg.run.frequency_grid.points = 300;
    cfg.run.photocurrent_grid.points = 41;
    cfg.run.monte_carlo.samples = 1 << 18;
    cfg.ofdm.subchannels = 30;
    cfg
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| {
                    let x: f64 = v.parse().unwrap();
                    // full precision: re-rendering gives the same text
                    assert_eq!(format!("{x:e}"), v);
                    x
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    for r in &rows {
        assert_eq!(r.len(), header.len(), "{}", path.display());
    }
    (header, rows)
}

#[test]
fn csv_schemas() {
    let expected: [(Analysis, &str, &str); 9] = [
        (Analysis::IvCurve, "iv_curve_0.csv", "V_pv_o,I_pv_o"),
        (Analysis::OperatingPoint, "output_vs_photocurrent.csv", "I_ph,I_pv_o"),
        (Analysis::SmallSignal, "small_signal.csv", "V_pv_o,r_ohm,C_farad"),
        (
            Analysis::FreqResponse,
            "freq_response.csv",
            "f_Hz,H2_signal_dB,H2_RC_dB,H2_Rsh_dB,H2_RL_dB,H2_r_dB,H2_Rs_dB",
        ),
        (
            Analysis::Noise,
            "noise.csv",
            "f_Hz,shot_V2Hz,thermal_total_V2Hz,thermal_RC_V2Hz,thermal_Rsh_V2Hz,thermal_RL_V2Hz,thermal_r_V2Hz,thermal_Rs_V2Hz",
        ),
        (Analysis::SnrCapacity, "snr_capacity.csv", "f_MHz,SNR_dB,capacity_Mbps"),
        (Analysis::PowerSweep, "power_sweep.csv", "P_laser_W,P_chg_W,capacity_Gbps"),
        (Analysis::DistanceSweep, "distance_sweep.csv", "d_m,f_d,P_laser_W"),
        (Analysis::MonteCarlo, "monte_carlo.csv", "f_MHz,SNR_analytic_dB,SNR_empirical_dB"),
    ];
    for (analysis, file, header) in expected {
        let dir = tempfile::tempdir().unwrap();
        let res = run_analysis(&small(analysis), dir.path()).unwrap();
        assert!(res.files.iter().any(|f| f == file), "{analysis:?}");
        let (h, rows) = parse_csv(&dir.path().join(file));
        assert_eq!(h.join(","), header);
        assert!(!rows.is_empty());
    }
}

#[test]
fn iv_curve_writes_one_file_per_photocurrent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(Analysis::IvCurve);
    let res = run_analysis(&cfg, dir.path()).unwrap();
    assert_eq!(res.files.len(), cfg.run.iv_photocurrents.len());
    for (f, &i_ph) in res.files.iter().zip(&cfg.run.iv_photocurrents) {
        let (_, rows) = parse_csv(&dir.path().join(f));
        // short-circuit current just below I_ph, zero current at V_oc
        assert!(rows[0][1] <= i_ph && rows[0][1] > 0.99 * i_ph);
        assert!(rows.last().unwrap()[1].abs() < 1e-9);
    }
}

#[test]
fn snr_csv_matches_summary_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_analysis(&small(Analysis::SnrCapacity), dir.path()).unwrap();
    let (_, rows) = parse_csv(&dir.path().join("snr_capacity.csv"));
    let total: f64 = rows.iter().map(|r| r[2] * 1e6).sum();
    assert!(((total - res.summary.total_capacity_bps) / total).abs() < 1e-12);
    for r in &rows {
        let snr = 10f64.powf(r[1] / 10.0);
        assert!((r[2] - (1.0 + snr).log2()).abs() < 1e-9);
    }
}

#[test]
fn reruns_are_byte_identical() {
    for analysis in Analysis::ALL {
        let cfg = small(analysis);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let files = run_analysis(&cfg, a.path()).unwrap().files;
        run_analysis(&cfg, b.path()).unwrap();
        for f in files.iter().map(String::as_str).chain(["summary.json"]) {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{analysis:?} {f}"
            );
        }
    }
}

#[test]
fn config_hash_is_stable_across_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SystemConfig::preset(Case::L10);
    let p = dir.path().join("c.json");
    write_config(&cfg, &p).unwrap();
    assert_eq!(config_hash(&load_config(&p).unwrap()), config_hash(&cfg));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        r_shunt in 1.0..1e6f64,
        doping in 1e18..1e23f64,
        l in 1e-10..1e-6f64,
        n in 1usize..400,
        seed in any::<u64>(),
        override_gain in proptest::option::of(0.0..1.0f64),
        calib in proptest::option::of(1e-9..1e-7f64),
    ) {
        let mut cfg = SystemConfig::default();
        cfg.pv.r_shunt = r_shunt;
        cfg.ac_cell.doping = doping;
        cfg.ac_cell.calibration_c = calib;
        cfg.network.wire_inductance = l;
        cfg.ofdm.subchannels = n;
        cfg.run.seed = seed;
        cfg.cavity.distance_gain_override = override_gain;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        write_config(&cfg, &p).unwrap();
        prop_assert_eq!(load_config(&p).unwrap(), cfg);
    }
}

#[test]
fn binary_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["snr-capacity", "--config"])
        .arg(presets().join("tableI-L120.json"))
        .arg("--out")
        .arg(&out)
        .args(["--case", "L10", "--seed", "7"])
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["analysis"], "snr-capacity");
    let (_, rows) = parse_csv(&out.join("snr_capacity.csv"));
    assert_eq!(rows.len(), 200);
}

#[test]
fn binary_thread_cap_gives_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    write_config(&small(Analysis::PowerSweep), &cfg_path).unwrap();
    let run = |threads: Option<&str>, out: &str| {
        let mut cmd = bin();
        cmd.args(["power-sweep", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(dir.path().join(out));
        match threads {
            Some(t) => cmd.env("RBCOM_THREADS", t),
            None => cmd.env_remove("RBCOM_THREADS"),
        };
        cmd.output().unwrap().status
    };
    assert!(run(None, "a").success());
    assert!(run(Some("1"), "b").success());
    let read = |d: &str| fs::read(dir.path().join(d).join("power_sweep.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert!(!run(Some("zero"), "c").success());
}

#[test]
fn binary_reports_errors_as_json_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_text(dir.path(), "bad.json", r#"{"pv": {"r_shunt": 0.0}}"#);
    let out = bin()
        .args(["noise", "--config"])
        .arg(&p)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("pv.r_shunt"));
    assert!(!dir.path().join("o").exists());

    let out = bin()
        .args(["noise", "--config", "/nonexistent.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bin().args(["bogus", "--config"]).arg(&p).output().unwrap();
    assert!(!out.status.success());
}
