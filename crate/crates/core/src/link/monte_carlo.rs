//! Time-domain check of the analytic subchannel SNR.
//!
//! Synthesizes the multi-tone drive with random phases, scales it to
//! photocurrent, shapes it and white shot / thermal noise through their
//! network transfers in the frequency domain, then estimates per-subchannel
//! signal power and noise density from a Welch periodogram of the output.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{signal_response, ReceiverCircuit, Source};
use crate::noise::thermal_source_psd;
use crate::parallel;
use crate::system::{LinkEvaluation, SystemConfig};

/// Bins on each side of a tone attributed to the tone under a Hann window.
const TONE_GUARD: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubchannelEstimate {
    pub frequency: f64,
    /// Estimated output signal power [V²].
    pub signal_power: f64,
    /// Estimated output noise PSD [V²/Hz].
    pub noise_psd: f64,
    /// Empirical SNR; `+inf` when no noise was injected.
    pub snr: f64,
    pub analytic_snr: f64,
}

impl SubchannelEstimate {
    /// Empirical minus analytic SNR [dB].
    pub fn error_db(&self) -> f64 {
        10.0 * (self.snr / self.analytic_snr).log10()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub sample_rate: f64,
    pub samples: usize,
    pub segments: usize,
    /// Welch bin spacing [Hz].
    pub resolution: f64,
    pub subchannels: Vec<SubchannelEstimate>,
}

impl MonteCarloResult {
    /// Fraction of subchannels whose empirical SNR is within `tol_db` of the analytic value.
    pub fn fraction_within_db(&self, tol_db: f64) -> f64 {
        let ok = self
            .subchannels
            .iter()
            .filter(|s| s.error_db().abs() <= tol_db)
            .count();
        ok as f64 / self.subchannels.len() as f64
    }
}

fn gaussian_spectrum(seed: u64, stream: u64, n: usize, psd: f64, fs: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // one-sided PSD N over [0, fs/2] gives variance N·fs/2
    let sigma = (psd * fs / 2.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut buf: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(normal.sample(&mut rng), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Empirical per-subchannel SNR at the evaluated operating point.
///
/// Deterministic for a given `seed`: every random stream is derived from it
/// and all reductions run in a fixed order.
pub fn monte_carlo_snr(system: &SystemConfig, ev: &LinkEvaluation, seed: u64) -> Result<MonteCarloResult> {
    let ofdm = &system.ofdm;
    let params = &system.run.monte_carlo;
    let edge = ofdm.band_edge();
    let fs = params.sample_rate.unwrap_or(4.0 * edge);
    if !(fs > 2.0 * edge) {
        return Err(Error::Config(format!(
            "sample rate {fs:e} Hz aliases the band edge {edge:e} Hz"
        )));
    }
    let n = params.samples;
    let segments = params.segments;
    if segments == 0 || n < 2 * segments || !n.is_multiple_of(segments) {
        return Err(Error::Config(format!(
            "{n} samples cannot be split into {segments} equal segments"
        )));
    }
    let gamma = ev.gain.gamma;
    let model = &ev.model;
    let inject = params.inject_noise;

    // drive: equal-power tones with uniform random phases
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let phases: Vec<f64> = (0..ofdm.subchannels).map(|_| rng.random::<f64>() * TAU).collect();
    let drive = system.drive(ev.p_laser, &phases)?;
    let times: Vec<usize> = (0..n).collect();
    let mut spectrum: Vec<Complex64> = parallel::map(&times, |&k| {
        Complex64::new(gamma * drive.signal_at(k as f64 / fs), 0.0)
    });
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut spectrum);

    let half = n / 2;
    let bins: Vec<usize> = (1..half).collect();
    let circuit = ReceiverCircuit::build(model);
    let mut sources = vec![Source::Photocurrent];
    sources.extend(Source::THERMAL);
    let transfers: Vec<Vec<Complex64>> = parallel::try_map(&bins, |&k| {
        let w = TAU * k as f64 * fs / n as f64;
        let mut h = circuit.transfers(w, &sources)?;
        h[0] = signal_response(w, model);
        Ok(h)
    })?;

    let mut output = vec![Complex64::new(0.0, 0.0); n];
    for (&k, h) in bins.iter().zip(&transfers) {
        output[k] = h[0] * spectrum[k];
    }
    if inject {
        let shot = gaussian_spectrum(seed, 1, n, ev.shot_input, fs);
        for (&k, h) in bins.iter().zip(&transfers) {
            output[k] += h[0] * shot[k];
        }
        for (j, &s) in Source::THERMAL.iter().enumerate() {
            let r = model.resistance(s).expect("thermal sources are resistors");
            let psd = thermal_source_psd(r, system.pv.temperature, system.noise.thermal_convention);
            let x = gaussian_spectrum(seed, 2 + j as u64, n, psd, fs);
            for (&k, h) in bins.iter().zip(&transfers) {
                output[k] += h[j + 1] * x[k];
            }
        }
    }
    drop(transfers);
    drop(spectrum);
    for k in 1..half {
        output[n - k] = output[k].conj();
    }
    planner.plan_fft_inverse(n).process(&mut output);
    let signal: Vec<f64> = output.iter().map(|c| c.re / n as f64).collect();
    drop(output);

    let psd = welch(&signal, segments, fs);
    let seg_len = n / segments;
    let resolution = fs / seg_len as f64;
    let w = ofdm.subchannel_bandwidth;

    let subchannels = (0..ofdm.subchannels)
        .map(|i| {
            let center = ofdm.center(i);
            let lo_f = ofdm.band_start + i as f64 * w;
            let first = ((lo_f / resolution).ceil() as usize).max(2);
            let last = (((lo_f + w) / resolution).ceil() as usize).min(psd.len());
            let tone = (center / resolution).round() as usize;
            let near = |k: usize| k.abs_diff(tone) <= TONE_GUARD;
            let tone_power: f64 = (tone.saturating_sub(TONE_GUARD)..=tone + TONE_GUARD)
                .filter(|&k| k < psd.len())
                .map(|k| psd[k] * resolution)
                .sum();
            let floor: Vec<f64> = (first..last).filter(|&k| !near(k)).map(|k| psd[k]).collect();
            if floor.is_empty() {
                return Err(Error::Config(format!(
                    "subchannel {i} has no noise bins at {resolution:e} Hz resolution"
                )));
            }
            let noise_psd = floor.iter().sum::<f64>() / floor.len() as f64;
            let (signal_power, snr) = if inject {
                let s = tone_power - noise_psd * (2 * TONE_GUARD + 1) as f64 * resolution;
                (s, s / (noise_psd * w))
            } else {
                (tone_power, f64::INFINITY)
            };
            Ok(SubchannelEstimate {
                frequency: center,
                signal_power,
                noise_psd,
                snr,
                analytic_snr: ev.report.subchannels[i].snr,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MonteCarloResult {
        sample_rate: fs,
        samples: n,
        segments,
        resolution,
        subchannels,
    })
}

/// One-sided Welch PSD with a Hann window and non-overlapping segments.
fn welch(x: &[f64], segments: usize, fs: f64) -> Vec<f64> {
    let len = x.len() / segments;
    let window: Vec<f64> = (0..len)
        .map(|k| 0.5 - 0.5 * (TAU * k as f64 / len as f64).cos())
        .collect();
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let idx: Vec<usize> = (0..segments).collect();
    let periodograms = parallel::map(&idx, |&s| {
        let mut buf: Vec<Complex64> = x[s * len..(s + 1) * len]
            .iter()
            .zip(&window)
            .map(|(&v, &w)| Complex64::new(v * w, 0.0))
            .collect();
        fft.process(&mut buf);
        buf[..=len / 2].iter().map(|c| c.norm_sqr()).collect::<Vec<f64>>()
    });
    let mut acc = vec![0.0; len / 2 + 1];
    for p in &periodograms {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let scale = 2.0 / (segments as f64 * fs * energy);
    acc.iter_mut().for_each(|a| *a *= scale);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Case;

    fn small(case: Case, samples: usize, inject: bool) -> SystemConfig {
        let mut cfg = SystemConfig::preset(case);
        cfg.ofdm.subchannels = 20;
        cfg.run.monte_carlo.samples = samples;
        cfg.run.monte_carlo.inject_noise = inject;
        cfg
    }

    #[test]
    fn welch_recovers_white_noise_level() {
        let fs = 1e6;
        let n = 1 << 16;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, (2e-6 * fs / 2.0f64).sqrt()).unwrap();
        let v: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let psd = welch(&v, 64, fs);
        let mean = psd[10..psd.len() - 10].iter().sum::<f64>() / (psd.len() - 20) as f64;
        assert!(((mean - 2e-6) / 2e-6).abs() < 0.02, "{mean:e}");
    }

    #[test]
    fn noiseless_signal_power_matches_closed_form() {
        let cfg = small(Case::L120, 1 << 18, false);
        let ev = cfg.evaluate(0.2).unwrap();
        let mc = monte_carlo_snr(&cfg, &ev, 1).unwrap();
        let gamma = ev.gain.gamma;
        for s in &mc.subchannels {
            assert!(s.snr.is_infinite());
            let h2 = signal_response(TAU * s.frequency, &ev.model).norm_sqr();
            let expected = gamma * gamma * cfg.ofdm.per_subchannel_variance() * h2;
            assert!(
                ((s.signal_power - expected) / expected).abs() < 0.02,
                "f = {}",
                s.frequency
            );
        }
    }

    #[test]
    fn noisy_snr_tracks_analytic() {
        let cfg = small(Case::L10, 1 << 18, true);
        let ev = cfg.evaluate(0.2).unwrap();
        let mc = monte_carlo_snr(&cfg, &ev, 5).unwrap();
        assert!(mc.fraction_within_db(1.0) >= 0.95);
    }

    #[test]
    fn same_seed_same_bits() {
        let cfg = small(Case::L10, 1 << 17, true);
        let ev = cfg.evaluate(0.2).unwrap();
        let a = monte_carlo_snr(&cfg, &ev, 42).unwrap();
        let b = monte_carlo_snr(&cfg, &ev, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_snr(&cfg, &ev, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn aliasing_guard() {
        let mut cfg = small(Case::L10, 1 << 14, true);
        cfg.run.monte_carlo.sample_rate = Some(1.9 * cfg.ofdm.band_edge());
        let ev = cfg.evaluate(0.2).unwrap();
        assert!(matches!(monte_carlo_snr(&cfg, &ev, 1), Err(Error::Config(_))));
    }
}
