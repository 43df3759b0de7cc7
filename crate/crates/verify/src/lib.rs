//! Acceptance criteria for the link simulator, each with its own oracle.
//! Tolerances are pinned below.

use std::f64::consts::TAU;
use std::fs;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbcom::cavity::{distance_gain, CavityParams};
use rbcom::link::{monte_carlo_snr, power_capacity_sweep};
use rbcom::network::{log_frequencies, mna_transfer, signal_response, SmallSignalModel, Source};
use rbcom::noise::{shot_psd_output, thermal_psd_output, ThermalConvention};
use rbcom::pv_ac::{diffusion_capacitance, dynamic_resistance, AcCellParams};
use rbcom::pv_dc::{photocurrent, solve_operating_point, PvParams};
use rbcom::system::{Analysis, Case, SystemConfig};
use rbcom_sim::run_analysis;

const GAMMA_REF: f64 = 0.0557;
const GAMMA_TOL: f64 = 0.005;
const I_PH_REF: f64 = 0.1492;
const I_PH_ABS_TOL: f64 = 1e-15;
const SIGMA_PH_REF: f64 = 3.1e-5;
const SIGMA_PH_TOL: f64 = 0.01;
const R_DYN_REF: f64 = 839.5;
const R_DYN_TOL: f64 = 0.02;
const SOLVER_INSTANCES: usize = 100;
const SOLVER_ABS_TOL: f64 = 1e-10;
const NETWORK_POINTS: usize = 2000;
const NETWORK_REL_TOL: f64 = 1e-9;
const BANDWIDTH_REF: [(Case, f64); 2] = [(Case::L120, 120e6), (Case::L10, 200e6)];
const BANDWIDTH_TOL: f64 = 0.25;
const CAPACITY_REF: [(Case, f64); 2] = [(Case::L120, 1.19e9), (Case::L10, 1.76e9)];
const CAPACITY_TOL: f64 = 0.15;
const TRADEOFF_P_CHG: f64 = 0.040;
const TRADEOFF_CAPACITY: f64 = 1.6e9;
const MC_SAMPLES: usize = 1 << 20;
const MC_SEED: u64 = 2020;
const MC_DB_TOL: f64 = 1.0;
const MC_FRACTION: f64 = 0.95;
const PROPERTY_CASES: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Documented,
    Fail,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b) / b
}

// independent constants for the oracles
const Q: f64 = 1.602176634e-19;
const K_B: f64 = 1.380649e-23;
const HC_OVER_Q: f64 = 1.23984198e-6;

fn gamma() -> Outcome {
    let cfg = SystemConfig::default();
    let g = cfg.gain().unwrap().gamma;
    let oracle = 0.746 * 0.054 * 0.9 * HC_OVER_Q / 808e-9;
    let ok = rel(g, GAMMA_REF).abs() <= GAMMA_TOL && rel(g, oracle).abs() < 1e-6;
    outcome(
        ok,
        format!("gamma = {g:.6} (ref {GAMMA_REF}, oracle {oracle:.6})"),
    )
}

fn photocurrent_anchor() -> Outcome {
    let cfg = SystemConfig::default();
    let i_ph = photocurrent(0.2, &cfg.pv).unwrap();
    let g = cfg.gain().unwrap().gamma;
    let sigma = g * g * cfg.ofdm.signal_variance;
    let ok = (i_ph - I_PH_REF).abs() <= I_PH_ABS_TOL && rel(sigma, SIGMA_PH_REF).abs() <= SIGMA_PH_TOL;
    outcome(
        ok,
        format!(
            "I_ph = {i_ph:.7} A, sigma_ph^2 = {sigma:.4e} A^2 ({:+.2}%)",
            100.0 * rel(sigma, SIGMA_PH_REF)
        ),
    )
}

fn dynamic_resistance_check() -> Outcome {
    let pv = PvParams::default();
    let op = solve_operating_point(I_PH_REF, 0.6, &pv).unwrap();
    let r = dynamic_resistance(op.v_diode, &pv);
    outcome(
        rel(r, R_DYN_REF).abs() <= R_DYN_TOL,
        format!(
            "V_d = {:.6} V, r = {r:.2} ohm ({:+.2}%)",
            op.v_diode,
            100.0 * rel(r, R_DYN_REF)
        ),
    )
}

/// Plain bisection on the load-line residual.
fn bisect(i_ph: f64, r_load: f64) -> f64 {
    let (i0, n, t, rs, rsh) = (9.381e-9, 1.318, 298.15, 1.3, 5000.0);
    let nvt = n * K_B * t / Q;
    let g = |i: f64| {
        let v = i * (r_load + rs);
        i_ph - i0 * ((v / nvt).exp() - 1.0) - v / rsh - i
    };
    let (mut lo, mut hi) = (0.0, i_ph);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solver_oracle() -> Outcome {
    let pv = PvParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..SOLVER_INSTANCES {
        let i_ph = rng.random_range(0.0..=0.5);
        let r_load = rng.random_range(0.1..=100.0);
        let newton = solve_operating_point(i_ph, r_load, &pv).unwrap().i_out;
        worst = worst.max((newton - bisect(i_ph, r_load)).abs());
    }
    outcome(
        worst <= SOLVER_ABS_TOL,
        format!("{SOLVER_INSTANCES} instances, max |dI| = {worst:.2e} A"),
    )
}

fn network_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for case in [Case::L120, Case::L10] {
        let cfg = SystemConfig::preset(case);
        let m = cfg.evaluate(0.2).unwrap().model;
        let g = cfg.run.frequency_grid;
        for f in log_frequencies(g.start, g.stop, NETWORK_POINTS) {
            let a = signal_response(TAU * f, &m);
            let b = mna_transfer(TAU * f, &m, Source::Photocurrent).unwrap();
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    outcome(
        worst <= NETWORK_REL_TOL,
        format!("{NETWORK_POINTS} points x 2 presets, max relative error {worst:.2e}"),
    )
}

fn summary_for(case: Case, analysis: Analysis) -> serde_json::Value {
    let mut cfg = SystemConfig::preset(case);
    cfg.run.analysis = analysis;
    let dir = tempfile::tempdir().unwrap();
    run_analysis(&cfg, dir.path()).unwrap();
    serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap()
}

/// Applies the documented-deviation clause to one quantity with a reference value.
fn against_reference(
    quantity: &str,
    refs: [(Case, f64); 2],
    tol: f64,
    gate: bool,
    unit: f64,
    label: &str,
) -> Outcome {
    let mut all_within = true;
    let mut all_documented = true;
    let mut parts = Vec::new();
    for (case, reference) in refs {
        let summary = summary_for(case, Analysis::SnrCapacity);
        let value = summary["summary"][quantity].as_f64().unwrap();
        let within = rel(value, reference).abs() <= tol;
        let documented = summary["deviations"].as_array().unwrap().iter().any(|d| {
            d["quantity"] == quantity && d["within_tolerance"] == within && d["reference"] == reference
        });
        all_within &= within;
        all_documented &= documented;
        parts.push(format!(
            "{case:?}: {:.4} {label} ({:+.1}%)",
            value / unit,
            100.0 * rel(value, reference)
        ));
    }
    let status = if all_within {
        Status::Pass
    } else if all_documented && gate {
        Status::Documented
    } else {
        Status::Fail
    };
    Outcome {
        status,
        detail: parts.join(", "),
    }
}

fn tradeoff() -> Outcome {
    let cfg = SystemConfig::preset(Case::L10);
    let grid: Vec<f64> = (0..56).map(|k| 0.05 + 0.01 * k as f64).collect();
    let pts = power_capacity_sweep(&grid, &cfg).unwrap();
    let chg_up = pts.windows(2).all(|w| w[1].charging_power > w[0].charging_power);
    let cap_down = pts.windows(2).all(|w| w[1].capacity < w[0].capacity);
    let joint = pts
        .iter()
        .any(|p| p.charging_power > TRADEOFF_P_CHG && p.capacity > TRADEOFF_CAPACITY);
    let best = pts
        .iter()
        .filter(|p| p.charging_power > TRADEOFF_P_CHG)
        .map(|p| p.capacity)
        .fold(f64::NAN, f64::max);
    let peak = pts.iter().map(|p| p.capacity).fold(f64::NAN, f64::max);
    outcome(
        chg_up && cap_down && joint,
        format!(
            "P_chg increasing: {chg_up}, capacity decreasing: {cap_down}, joint point: {joint} \
             (best capacity with P_chg > 40 mW: {:.4} Gb/s, peak capacity {:.4} Gb/s)",
            best / 1e9,
            peak / 1e9
        ),
    )
}

fn monte_carlo() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for case in [Case::L120, Case::L10] {
        let mut cfg = SystemConfig::preset(case);
        cfg.run.monte_carlo.samples = MC_SAMPLES;
        let ev = cfg.evaluate(0.2).unwrap();
        let mc = monte_carlo_snr(&cfg, &ev, MC_SEED).unwrap();
        let frac = mc.fraction_within_db(MC_DB_TOL);
        let worst = mc
            .subchannels
            .iter()
            .map(|s| s.error_db().abs())
            .fold(0.0, f64::max);
        ok &= frac >= MC_FRACTION;
        parts.push(format!(
            "{case:?}: {:.1}% within 1 dB, worst {worst:.2} dB",
            100.0 * frac
        ));
    }
    outcome(ok, parts.join(", "))
}

fn model_strategy() -> impl Strategy<Value = SmallSignalModel> {
    (
        (
            10.0..1e5f64,
            1e-10..1e-6f64,
            100.0..1e5f64,
            0.01..10.0f64,
            1e-9..1e-6f64,
        ),
        (1e-3..0.1f64, 1e-12..1e-10f64, 10.0..1000.0f64, 0.1..10.0f64),
    )
        .prop_map(
            |((r, c, r_shunt, r_series, wire), (choke, c0, r_comm, r_load))| SmallSignalModel {
                r,
                c,
                r_shunt,
                r_series,
                wire_inductance: wire,
                choke_inductance: choke,
                coupling_capacitance: c0,
                r_comm,
                r_load,
            },
        )
}

fn properties() -> Outcome {
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(10),
        ..Config::default()
    };
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    let mut runner = TestRunner::new(config.clone());
    record(
        "f(d) monotone",
        runner
            .run(
                &(0.5..0.999f64, 1e-4..1e-2f64, 0.01..100.0f64, 1.0..10.0f64),
                |(refl, a, d, k)| {
                    let c = CavityParams {
                        reflectivity: refl,
                        aperture_radius: a,
                        ..CavityParams::default()
                    };
                    prop_assert!(distance_gain(d * k, &c).unwrap() <= distance_gain(d, &c).unwrap());
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    let pv = PvParams::default();
    let mut runner = TestRunner::new(config.clone());
    record(
        "I_pv_o in [0, I_ph]",
        runner
            .run(&(0.0..0.5f64, 0.1..100.0f64), |(i_ph, r_load)| {
                let i = solve_operating_point(i_ph, r_load, &pv).unwrap().i_out;
                prop_assert!((0.0..=i_ph).contains(&i));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(config.clone());
    record(
        "I_pv_o non-increasing in R_L",
        runner
            .run(
                &(0.0..0.5f64, 0.1..100.0f64, 1.0..10.0f64),
                |(i_ph, r_load, k)| {
                    let a = solve_operating_point(i_ph, r_load, &pv).unwrap().i_out;
                    let b = solve_operating_point(i_ph, r_load * k, &pv).unwrap().i_out;
                    prop_assert!(b <= a + 1e-15);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(config.clone());
    record(
        "r C_d = tau / 2",
        runner
            .run(&(0.0..0.6f64, 1e-9..1e-3f64), |(v_d, tau)| {
                let ac = AcCellParams {
                    lifetime: tau,
                    ..AcCellParams::default()
                };
                let prod = dynamic_resistance(v_d, &pv) * diffusion_capacitance(v_d, &pv, &ac);
                prop_assert!(((prod - tau / 2.0) / (tau / 2.0)).abs() < 1e-12);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(config.clone());
    record(
        "PSDs >= 0",
        runner
            .run(&(model_strategy(), 1e3..1e11f64), |(m, f)| {
                let w = TAU * f;
                prop_assert!(shot_psd_output(w, &m, 1e-20) >= 0.0);
                let th = thermal_psd_output(w, &m, 298.15, ThermalConvention::Norton).unwrap();
                prop_assert!(th.total >= 0.0 && th.by_source.iter().all(|&p| p >= 0.0));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(config.clone());
    record(
        "H_ph -> 0 at extremes",
        runner
            .run(&model_strategy(), |m| {
                let peak = log_frequencies(1e3, 1e11, 400)
                    .into_iter()
                    .map(|f| signal_response(TAU * f, &m).norm())
                    .fold(0.0, f64::max);
                prop_assert!(signal_response(TAU * 1e-3, &m).norm() < 1e-6 * peak);
                prop_assert!(signal_response(TAU * 1e16, &m).norm() < 1e-6 * peak);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut identical = true;
    for analysis in [Analysis::PowerSweep, Analysis::MonteCarlo, Analysis::Noise] {
        let mut cfg = SystemConfig::preset(Case::L10);
        cfg.run.analysis = analysis;
        cfg.run.power_grid.points = 12;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let files = run_analysis(&cfg, a.path()).unwrap().files;
        run_analysis(&cfg, b.path()).unwrap();
        for f in files.iter().map(String::as_str).chain(["summary.json"]) {
            identical &= fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap();
        }
    }
    if !identical {
        failures.push("reruns differ".into());
    }

    let ok = failures.is_empty();
    let detail = if ok {
        format!("6 properties x {PROPERTY_CASES} cases, byte-identical reruns")
    } else {
        failures.join("; ")
    };
    outcome(ok, detail)
}

/// Evaluates every criterion in order.
pub fn run_all() -> Vec<(&'static str, Outcome)> {
    type Check = fn() -> Outcome;
    let early: [(&'static str, Check); 5] = [
        ("end-to-end gain", gamma),
        ("photocurrent anchor", photocurrent_anchor),
        (
            "dynamic resistance at the operating point",
            dynamic_resistance_check,
        ),
        ("Newton vs bisection", solver_oracle),
        ("closed-form vs nodal network", network_oracle),
    ];
    let mut results = Vec::new();
    for (name, check) in early {
        results.push((name, check()));
    }
    let oracle_ok = results[4].1.status == Status::Pass;
    let gate = results.iter().all(|(_, o)| o.status == Status::Pass);
    results.push((
        "3 dB bandwidth vs reference",
        against_reference(
            "bandwidth_hz",
            BANDWIDTH_REF,
            BANDWIDTH_TOL,
            oracle_ok,
            1e6,
            "MHz",
        ),
    ));
    results.push((
        "total capacity vs reference",
        against_reference(
            "total_capacity_bps",
            CAPACITY_REF,
            CAPACITY_TOL,
            gate,
            1e9,
            "Gb/s",
        ),
    ));
    let later: [(&'static str, Check); 3] = [
        ("charging / capacity trade-off", tradeoff),
        ("Monte-Carlo vs analytic SNR", monte_carlo),
        ("property suites", properties),
    ];
    for (name, check) in later {
        results.push((name, check()));
    }

    results
}

/// One line per criterion; returns true when none failed.
pub fn report(results: &[(&str, Outcome)]) -> bool {
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Documented => "PASS (documented deviation)",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
        };
        println!("[{tag}] {:>2} {name}: {}", k + 1, o.detail);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    failed == 0
}
