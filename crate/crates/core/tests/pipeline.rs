use std::f64::consts::TAU;

use proptest::prelude::*;
use rbcom::link::{power_capacity_sweep, shannon_capacity};
use rbcom::network::{mna_transfer, signal_response, Source};
use rbcom::noise::{thermal_psd_output, ReceiverSpectra, ThermalConvention};
use rbcom::parallel;
use rbcom::system::{Case, SystemConfig};

const Q: f64 = 1.602176634e-19;
const K_B: f64 = 1.380649e-23;

#[test]
fn background_power_from_first_principles() {
    // η·E·Δλ·A·Ω·T with a 30° half-angle field of view
    let omega = TAU * (1.0 - (30f64).to_radians().cos());
    let expected = 0.5 * 0.2 * 20.0 * 1e-4 * omega * 0.05;
    let got = SystemConfig::default().background_power();
    assert!(((got - expected) / expected).abs() < 1e-12);
    assert!((got - 8.4179e-6).abs() < 1e-9);
}

/// Capacity rebuilt subchannel by subchannel from nodal solves at the exact
/// centre frequencies, without the spectrum grid.
fn capacity_oracle(cfg: &SystemConfig, p_laser: f64) -> f64 {
    let ev = cfg.evaluate(p_laser).unwrap();
    let m = &ev.model;
    let gamma = ev.gain.gamma;
    let shot_in = 2.0 * Q * cfg.pv.responsivity * (p_laser + cfg.background_power());
    let t = cfg.pv.temperature;
    let w = cfg.ofdm.subchannel_bandwidth;
    let per = cfg.ofdm.signal_variance / cfg.ofdm.subchannels as f64;
    (0..cfg.ofdm.subchannels)
        .map(|i| {
            let omega = TAU * (cfg.ofdm.band_start + (i as f64 + 0.5) * w);
            let h2 = mna_transfer(omega, m, Source::Photocurrent).unwrap().norm_sqr();
            let thermal: f64 = Source::THERMAL
                .iter()
                .map(|&s| {
                    4.0 * K_B * t / m.resistance(s).unwrap() * mna_transfer(omega, m, s).unwrap().norm_sqr()
                })
                .sum();
            let snr = gamma * gamma * per * h2 / (w * (h2 * shot_in + thermal));
            w * (1.0 + snr).log2()
        })
        .sum()
}

#[test]
fn capacity_matches_direct_nodal_oracle() {
    for case in [Case::L120, Case::L10] {
        let cfg = SystemConfig::preset(case);
        let got = cfg.evaluate(0.2).unwrap().report.total_capacity;
        let oracle = capacity_oracle(&cfg, 0.2);
        // interpolation on the 2000-point log grid
        assert!(
            ((got - oracle) / oracle).abs() < 1e-4,
            "{case:?}: {got} vs {oracle}"
        );
    }
}

#[test]
fn shot_noise_is_minor_and_comm_resistor_dominates() {
    let cfg = SystemConfig::preset(Case::L120);
    let ev = cfg.evaluate(0.2).unwrap();
    let f = 60e6;
    let shot = ev.spectra.shot.interpolate(f).unwrap();
    let th = thermal_psd_output(TAU * f, &ev.model, cfg.pv.temperature, ThermalConvention::Norton).unwrap();
    assert!(shot < 1e-3 * th.total);
    assert!(th.by_source[0] > 0.99 * th.total);
}

#[test]
fn as_printed_convention_changes_noise_only() {
    let mut cfg = SystemConfig::preset(Case::L120);
    let a = cfg.evaluate(0.2).unwrap();
    cfg.noise.thermal_convention = ThermalConvention::AsPrinted;
    let b = cfg.evaluate(0.2).unwrap();
    assert_eq!(a.spectra.signal_gain, b.spectra.signal_gain);
    assert_ne!(a.report.total_capacity, b.report.total_capacity);
}

#[test]
fn spectra_parallel_equals_sequential() {
    let cfg = SystemConfig::preset(Case::L10);
    let ev = cfg.evaluate(0.3).unwrap();
    let f = cfg.run.frequency_grid.logarithmic();
    let spectra =
        ReceiverSpectra::compute(&f, &ev.model, ev.shot_input, 298.15, ThermalConvention::Norton).unwrap();
    let seq = parallel::map_seq(&f, |&f| {
        thermal_psd_output(TAU * f, &ev.model, 298.15, ThermalConvention::Norton)
            .unwrap()
            .total
    });
    assert_eq!(spectra.thermal.values(), &seq[..]);
    let gains = parallel::map_seq(&f, |&f| signal_response(TAU * f, &ev.model).norm_sqr());
    assert_eq!(spectra.signal_gain.values(), &gains[..]);
}

#[test]
fn sweep_points_match_single_evaluations() {
    let cfg = SystemConfig::preset(Case::L10);
    let grid = [0.07, 0.2, 0.45];
    let pts = power_capacity_sweep(&grid, &cfg).unwrap();
    for (p, &pl) in pts.iter().zip(&grid) {
        let ev = cfg.evaluate(pl).unwrap();
        assert_eq!(p.capacity, ev.report.total_capacity);
        assert_eq!(p.charging_power, ev.operating_point.charging_power);
    }
}

#[test]
fn physical_cell_mode_runs_end_to_end() {
    let mut cfg = SystemConfig::preset(Case::L10);
    cfg.ac_cell = cfg.ac_cell.physical();
    let ev = cfg.evaluate(0.05).unwrap();
    assert!(ev.model.c > 0.0 && ev.model.r > 0.0);
    assert!(ev.report.total_capacity > 0.0);
    assert!(!ev.quasi_static);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_grid_free_of_interpolation_surprises(p in 0.05..0.6f64) {
        let cfg = SystemConfig::preset(Case::L120);
        let ev = cfg.evaluate(p).unwrap();
        for s in &ev.report.subchannels {
            prop_assert!(s.snr >= 0.0 && s.snr.is_finite());
            prop_assert!((s.capacity - shannon_capacity(cfg.ofdm.subchannel_bandwidth, s.snr)).abs() < 1e-6);
        }
        prop_assert!(ev.operating_point.i_out <= ev.operating_point.photocurrent);
    }
}
