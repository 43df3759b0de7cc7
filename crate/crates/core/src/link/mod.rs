//! OFDM subchannel SNR, Shannon capacity and the charging-power /
//! capacity trade-off.

mod monte_carlo;

pub use monte_carlo::{monte_carlo_snr, MonteCarloResult, SubchannelEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::noise::ReceiverSpectra;
use crate::parallel;
use crate::pv_dc::OperatingPoint;
use crate::system::SystemConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    /// Number of subchannels N.
    pub subchannels: usize,
    /// Width of each subchannel w [Hz].
    pub subchannel_bandwidth: f64,
    /// Variance of the drive signal σ_s² [A²].
    pub signal_variance: f64,
    /// Lower edge of the first subchannel [Hz].
    pub band_start: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            subchannels: 120,
            subchannel_bandwidth: 1e6,
            signal_variance: 0.01,
            band_start: 0.0,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.subchannels >= 1, "ofdm.subchannels", "must be >= 1")?;
        check(
            self.subchannel_bandwidth > 0.0,
            "ofdm.subchannel_bandwidth",
            "must be > 0",
        )?;
        check(
            self.signal_variance >= 0.0,
            "ofdm.signal_variance",
            "must be >= 0",
        )?;
        check(self.band_start >= 0.0, "ofdm.band_start", "must be >= 0")
    }

    /// Center frequency of subchannel `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.band_start + (i as f64 + 0.5) * self.subchannel_bandwidth
    }

    /// Upper edge of the last subchannel.
    pub fn band_edge(&self) -> f64 {
        self.band_start + self.subchannels as f64 * self.subchannel_bandwidth
    }

    /// Drive variance allotted to each subchannel.
    pub fn per_subchannel_variance(&self) -> f64 {
        self.signal_variance / self.subchannels as f64
    }
}

/// SNR from signal gain and total output noise PSD at one subchannel.
pub fn snr(cfg: &OfdmConfig, gamma: f64, signal_gain: f64, noise_psd: f64) -> f64 {
    let signal = gamma * gamma * cfg.per_subchannel_variance() * signal_gain;
    let noise = cfg.subchannel_bandwidth * noise_psd;
    if signal == 0.0 {
        0.0
    } else {
        signal / noise
    }
}

/// Shannon capacity of one subchannel [bit/s].
pub fn shannon_capacity(bandwidth: f64, snr: f64) -> f64 {
    bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

pub fn subchannel_snr(i: usize, cfg: &OfdmConfig, gamma: f64, spectra: &ReceiverSpectra) -> Result<f64> {
    if i >= cfg.subchannels {
        return Err(Error::Domain(format!(
            "subchannel {i} out of range for N = {}",
            cfg.subchannels
        )));
    }
    let f = cfg.center(i);
    let gain = spectra.signal_gain.interpolate(f)?;
    let noise = spectra.shot.interpolate(f)? + spectra.thermal.interpolate(f)?;
    Ok(snr(cfg, gamma, gain, noise))
}

pub fn total_capacity(cfg: &OfdmConfig, gamma: f64, spectra: &ReceiverSpectra) -> Result<f64> {
    (0..cfg.subchannels)
        .map(|i| {
            Ok(shannon_capacity(
                cfg.subchannel_bandwidth,
                subchannel_snr(i, cfg, gamma, spectra)?,
            ))
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Subchannel {
    pub frequency: f64,
    pub snr: f64,
    /// Shannon capacity [bit/s].
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    pub subchannels: Vec<Subchannel>,
    /// Sum of the subchannel capacities [bit/s].
    pub total_capacity: f64,
    pub charging_power: f64,
    pub p_laser: f64,
    pub operating_point: OperatingPoint,
}

pub fn link_report(
    cfg: &OfdmConfig,
    gamma: f64,
    spectra: &ReceiverSpectra,
    op: &OperatingPoint,
    p_laser: f64,
) -> Result<LinkReport> {
    let subchannels = (0..cfg.subchannels)
        .map(|i| {
            let snr = subchannel_snr(i, cfg, gamma, spectra)?;
            Ok(Subchannel {
                frequency: cfg.center(i),
                snr,
                capacity: shannon_capacity(cfg.subchannel_bandwidth, snr),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total_capacity = subchannels.iter().map(|s| s.capacity).sum();
    Ok(LinkReport {
        subchannels,
        total_capacity,
        charging_power: op.charging_power,
        p_laser,
        operating_point: *op,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p_laser: f64,
    pub charging_power: f64,
    /// [bit/s]
    pub capacity: f64,
}

/// Charging power and total capacity at each received laser power.
pub fn power_capacity_sweep(p_laser: &[f64], system: &SystemConfig) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = p_laser.iter().find(|&&p| !(p > 0.0)) {
        return Err(Error::Domain(format!("sweep power must be > 0, got {bad}")));
    }
    parallel::try_map(p_laser, |&p| {
        let ev = system.evaluate(p)?;
        Ok(SweepPoint {
            p_laser: p,
            charging_power: ev.report.charging_power,
            capacity: ev.report.total_capacity,
        })
    })
}
