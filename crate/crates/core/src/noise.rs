//! Background light, shot noise and resistor thermal noise, each referred
//! to the output across R_C. All PSDs are one-sided.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE};
use crate::error::{check, Result};
use crate::network::{signal_response, ReceiverCircuit, SmallSignalModel, Source, SpectrumGrid};
use crate::parallel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundParams {
    /// Optical efficiency of the receive antenna.
    pub rx_efficiency: f64,
    /// Background spectral radiance [W·m⁻²·nm⁻¹·sr⁻¹].
    pub irradiance: f64,
    /// Optical filter bandwidth [nm].
    pub filter_bandwidth: f64,
    /// Receiving area [m²].
    pub rx_area: f64,
    /// Field-of-view solid angle [sr].
    pub field_of_view: f64,
    /// Transmittance of the output mirror.
    pub mirror_transmittance: f64,
}

impl Default for BackgroundParams {
    fn default() -> Self {
        Self {
            rx_efficiency: 0.5,
            irradiance: 0.2,
            filter_bandwidth: 20.0,
            rx_area: 1e-4,
            field_of_view: TAU * (1.0 - (PI / 6.0).cos()),
            mirror_transmittance: 0.05,
        }
    }
}

impl BackgroundParams {
    pub fn validate(&self) -> Result<()> {
        check(
            (0.0..=1.0).contains(&self.rx_efficiency),
            "background.rx_efficiency",
            "must lie in [0, 1]",
        )?;
        check(self.irradiance >= 0.0, "background.irradiance", "must be >= 0")?;
        check(
            self.filter_bandwidth >= 0.0,
            "background.filter_bandwidth",
            "must be >= 0",
        )?;
        check(self.rx_area >= 0.0, "background.rx_area", "must be >= 0")?;
        check(
            self.field_of_view >= 0.0,
            "background.field_of_view",
            "must be >= 0",
        )?;
        check(
            (0.0..=1.0).contains(&self.mirror_transmittance),
            "background.mirror_transmittance",
            "must lie in [0, 1]",
        )
    }
}

pub fn background_power(b: &BackgroundParams) -> f64 {
    b.rx_efficiency * b.irradiance * b.filter_bandwidth * b.rx_area * b.field_of_view * b.mirror_transmittance
}

pub fn background_photocurrent(b: &BackgroundParams, responsivity: f64) -> f64 {
    responsivity * background_power(b)
}

/// Shot-noise current PSD at the panel [A²/Hz].
pub fn shot_psd_input(p_laser: f64, p_background: f64, responsivity: f64) -> f64 {
    2.0 * ELEMENTARY_CHARGE * responsivity * (p_laser + p_background)
}

/// Shot noise at the output [V²/Hz]; it shares the signal path.
pub fn shot_psd_output(omega: f64, m: &SmallSignalModel, shot_input: f64) -> f64 {
    signal_response(omega, m).norm_sqr() * shot_input
}

/// How a resistor's Johnson noise is fed into the V/A transfers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalConvention {
    /// Parallel current source with PSD 4kT/R [A²/Hz].
    #[default]
    Norton,
    /// 4kTR used directly as the source PSD, as the formula is sometimes printed.
    AsPrinted,
}

/// Source PSD of a resistor at `temperature`.
pub fn thermal_source_psd(resistance: f64, temperature: f64, convention: ThermalConvention) -> f64 {
    let four_kt = 4.0 * BOLTZMANN * temperature;
    match convention {
        ThermalConvention::Norton => four_kt / resistance,
        ThermalConvention::AsPrinted => four_kt * resistance,
    }
}

/// Thermal noise at the output, split by resistor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermalBreakdown {
    /// Output PSD per source in [`Source::THERMAL`] order [V²/Hz].
    pub by_source: [f64; 5],
    /// |H_s|² per source in the same order [V²/A²].
    pub gains: [f64; 5],
    pub total: f64,
}

fn thermal_from_circuit(
    omega: f64,
    m: &SmallSignalModel,
    circuit: &ReceiverCircuit,
    temperature: f64,
    convention: ThermalConvention,
) -> Result<ThermalBreakdown> {
    let h = circuit.transfers(omega, &Source::THERMAL)?;
    let mut by_source = [0.0; 5];
    let mut gains = [0.0; 5];
    for (k, &s) in Source::THERMAL.iter().enumerate() {
        let r = m.resistance(s).expect("thermal sources are resistors");
        gains[k] = h[k].norm_sqr();
        by_source[k] = gains[k] * thermal_source_psd(r, temperature, convention);
    }
    Ok(ThermalBreakdown {
        by_source,
        gains,
        total: by_source.iter().sum(),
    })
}

pub fn thermal_psd_output(
    omega: f64,
    m: &SmallSignalModel,
    temperature: f64,
    convention: ThermalConvention,
) -> Result<ThermalBreakdown> {
    thermal_from_circuit(omega, m, &ReceiverCircuit::build(m), temperature, convention)
}

/// Signal gain and output noise PSDs sampled on one frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverSpectra {
    /// |H_ph|² [V²/A²].
    pub signal_gain: SpectrumGrid<f64>,
    /// Shot noise at the output [V²/Hz].
    pub shot: SpectrumGrid<f64>,
    /// Total thermal noise at the output [V²/Hz].
    pub thermal: SpectrumGrid<f64>,
    pub thermal_breakdown: SpectrumGrid<ThermalBreakdown>,
}

impl ReceiverSpectra {
    pub fn compute(
        frequencies: &[f64],
        m: &SmallSignalModel,
        shot_input: f64,
        temperature: f64,
        convention: ThermalConvention,
    ) -> Result<Self> {
        let circuit = ReceiverCircuit::build(m);
        let rows = parallel::try_map(frequencies, |&f| {
            let w = TAU * f;
            let gain = signal_response(w, m).norm_sqr();
            let th = thermal_from_circuit(w, m, &circuit, temperature, convention)?;
            Ok((gain, th))
        })?;
        let f = frequencies.to_vec();
        let signal_gain = SpectrumGrid::new(f.clone(), rows.iter().map(|r| r.0).collect())?;
        let shot = signal_gain.map(|g| g * shot_input);
        let thermal_breakdown = SpectrumGrid::new(f, rows.iter().map(|r| r.1).collect())?;
        let thermal = thermal_breakdown.map(|t| t.total);
        Ok(Self {
            signal_gain,
            shot,
            thermal,
            thermal_breakdown,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        self.signal_gain.frequencies()
    }
}
