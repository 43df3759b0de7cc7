//! Pump laser diode: current-to-optical-power conversion and the biased
//! multi-tone drive current that carries the modulation.

use serde::{Deserialize, Serialize};

use crate::constants::photon_voltage;
use crate::error::{check, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpParams {
    /// Emission wavelength [m].
    pub wavelength: f64,
    /// External quantum efficiency, injection efficiency times photon extraction.
    pub external_efficiency: f64,
    /// Threshold current [A].
    pub threshold_current: f64,
}

impl Default for PumpParams {
    fn default() -> Self {
        Self {
            wavelength: 808e-9,
            external_efficiency: 0.9,
            threshold_current: 0.5,
        }
    }
}

impl PumpParams {
    pub fn validate(&self) -> Result<()> {
        check(self.wavelength > 0.0, "pump.wavelength", "must be > 0")?;
        check(
            self.external_efficiency > 0.0 && self.external_efficiency <= 1.0,
            "pump.external_efficiency",
            "must lie in (0, 1]",
        )?;
        check(
            self.threshold_current >= 0.0,
            "pump.threshold_current",
            "must be >= 0",
        )
    }

    /// Slope efficiency dP/dI above threshold [W/A].
    pub fn slope(&self) -> f64 {
        photon_voltage(self.wavelength) * self.external_efficiency
    }

    /// Drive current that yields `power` watts of pump light.
    pub fn current_for_power(&self, power: f64) -> f64 {
        self.threshold_current + power / self.slope()
    }
}

/// Optical output of the pump diode at one drive current.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpOutput {
    pub power: f64,
    /// Set when the drive current sits below threshold and the output was clamped to zero.
    pub below_threshold: bool,
}

pub fn pump_power(current: f64, params: &PumpParams) -> Result<PumpOutput> {
    if !(current >= 0.0) {
        return Err(Error::Domain(format!(
            "pump drive current must be >= 0, got {current}"
        )));
    }
    let excess = current - params.threshold_current;
    if excess < 0.0 {
        return Ok(PumpOutput {
            power: 0.0,
            below_threshold: true,
        });
    }
    Ok(PumpOutput {
        power: params.slope() * excess,
        below_threshold: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subcarrier {
    /// Peak amplitude [A].
    pub amplitude: f64,
    /// Frequency [Hz].
    pub frequency: f64,
    /// Phase [rad].
    pub phase: f64,
}

/// Bias current plus a sum of cosine subcarriers.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSignal {
    bias: f64,
    subcarriers: Vec<Subcarrier>,
}

impl DriveSignal {
    pub fn new(bias: f64, subcarriers: Vec<Subcarrier>) -> Result<Self> {
        if let Some(s) = subcarriers.iter().find(|s| !(s.amplitude >= 0.0)) {
            return Err(Error::InvalidParameter {
                field: "drive.subcarriers",
                reason: format!("negative amplitude {}", s.amplitude),
            });
        }
        if subcarriers.windows(2).any(|w| !(w[1].frequency > w[0].frequency)) {
            return Err(Error::InvalidParameter {
                field: "drive.subcarriers",
                reason: "frequencies must be strictly increasing".into(),
            });
        }
        Ok(Self { bias, subcarriers })
    }

    /// Equal-power tones at `band_start + (i + 1/2)·spacing` whose total
    /// variance is `variance`. One phase per tone.
    pub fn equal_power(
        bias: f64,
        variance: f64,
        band_start: f64,
        spacing: f64,
        phases: &[f64],
    ) -> Result<Self> {
        let n = phases.len();
        let amplitude = if n == 0 {
            0.0
        } else {
            (2.0 * variance / n as f64).sqrt()
        };
        let tones = phases
            .iter()
            .enumerate()
            .map(|(i, &phase)| Subcarrier {
                amplitude,
                frequency: band_start + (i as f64 + 0.5) * spacing,
                phase,
            })
            .collect();
        Self::new(bias, tones)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn subcarriers(&self) -> &[Subcarrier] {
        &self.subcarriers
    }

    pub fn len(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subcarriers.is_empty()
    }

    /// AC part of the drive at time `t`.
    pub fn signal_at(&self, t: f64) -> f64 {
        self.subcarriers
            .iter()
            .map(|s| s.amplitude * (std::f64::consts::TAU * s.frequency * t + s.phase).cos())
            .sum()
    }

    pub fn drive_current(&self, t: f64) -> f64 {
        self.bias + self.signal_at(t)
    }

    /// Long-run variance of the AC part, Σ B_i²/2.
    pub fn signal_variance(&self) -> f64 {
        self.subcarriers
            .iter()
            .map(|s| 0.5 * s.amplitude * s.amplitude)
            .sum()
    }

    /// Worst-case trough of the drive current, `bias − Σ B_i`.
    pub fn minimum_current(&self) -> f64 {
        self.bias - self.subcarriers.iter().map(|s| s.amplitude).sum::<f64>()
    }

    /// False when the trough can dip below threshold and clip the modulation.
    pub fn stays_above_threshold(&self, params: &PumpParams) -> bool {
        self.minimum_current() >= params.threshold_current
    }
}

pub fn drive_current(t: f64, signal: &DriveSignal) -> f64 {
    signal.drive_current(t)
}

pub fn signal_variance(signal: &DriveSignal) -> f64 {
    signal.signal_variance()
}
