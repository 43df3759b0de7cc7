//! Complete parameter set for one simulation run and the end-to-end
//! evaluation that chains every stage at a given received laser power.

use serde::{Deserialize, Serialize};

use crate::cavity::{end_to_end_gain, laser_power, CavityParams, EndToEndGain};
use crate::error::{check, Error, Result};
use crate::link::{link_report, LinkReport, OfdmConfig};
use crate::network::{log_frequencies, NetworkParams, SmallSignalModel};
use crate::noise::{background_power, shot_psd_input, BackgroundParams, ReceiverSpectra, ThermalConvention};
use crate::pump::{pump_power, DriveSignal, PumpParams};
use crate::pv_ac::{quasi_static_ok, small_signal_at, AcCellParams, CellDynamics};
use crate::pv_dc::{photocurrent, solve_operating_point, OperatingPoint, PvParams};

/// Named analyses the front end can run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    IvCurve,
    #[default]
    OperatingPoint,
    SmallSignal,
    FreqResponse,
    Noise,
    SnrCapacity,
    PowerSweep,
    DistanceSweep,
    MonteCarlo,
}

impl Analysis {
    pub const ALL: [Analysis; 9] = [
        Analysis::IvCurve,
        Analysis::OperatingPoint,
        Analysis::SmallSignal,
        Analysis::FreqResponse,
        Analysis::Noise,
        Analysis::SnrCapacity,
        Analysis::PowerSweep,
        Analysis::DistanceSweep,
        Analysis::MonteCarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::IvCurve => "iv-curve",
            Analysis::OperatingPoint => "operating-point",
            Analysis::SmallSignal => "small-signal",
            Analysis::FreqResponse => "freq-response",
            Analysis::Noise => "noise",
            Analysis::SnrCapacity => "snr-capacity",
            Analysis::PowerSweep => "power-sweep",
            Analysis::DistanceSweep => "distance-sweep",
            Analysis::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown analysis `{s}`")))
    }
}

/// Inclusive grid description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn linear(&self) -> Vec<f64> {
        crate::pv_dc::linspace(self.start, self.stop, self.points)
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        log_frequencies(self.start, self.stop, self.points)
    }

    fn validate(&self, field: &'static str, positive: bool) -> Result<()> {
        check(self.points >= 2, field, "needs at least 2 points")?;
        check(self.stop > self.start, field, "stop must exceed start")?;
        if positive {
            check(self.start > 0.0, field, "start must be > 0")?;
        } else {
            check(self.start >= 0.0, field, "start must be >= 0")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloParams {
    /// Record length in samples.
    pub samples: usize,
    /// Sample rate [Hz]; four times the band edge when absent.
    pub sample_rate: Option<f64>,
    /// Welch segments.
    pub segments: usize,
    pub inject_noise: bool,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        Self {
            samples: 1 << 20,
            sample_rate: None,
            segments: 64,
            inject_noise: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub analysis: Analysis,
    /// Received laser power at the nominal operating point [W].
    pub p_laser: f64,
    pub seed: u64,
    /// Frequency grid for spectra [Hz], log-spaced.
    pub frequency_grid: Grid,
    /// Laser power sweep [W], linear.
    pub power_grid: Grid,
    /// Photocurrent sweep for output-vs-photocurrent [A], linear.
    pub photocurrent_grid: Grid,
    /// Photocurrents of the I-V curve family [A].
    pub iv_photocurrents: Vec<f64>,
    /// Voltage points per I-V curve.
    pub iv_points: usize,
    /// Cell-voltage points for the r/C scan.
    pub small_signal_points: usize,
    /// Distance sweep [m], log-spaced.
    pub distance_grid: Grid,
    pub monte_carlo: MonteCarloParams,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            analysis: Analysis::OperatingPoint,
            p_laser: 0.2,
            seed: 2020,
            frequency_grid: Grid::new(1e5, 3e9, 2000),
            power_grid: Grid::new(0.05, 0.6, 56),
            photocurrent_grid: Grid::new(0.0, 0.5, 501),
            iv_photocurrents: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            iv_points: 200,
            small_signal_points: 200,
            distance_grid: Grid::new(0.1, 100.0, 200),
            monte_carlo: MonteCarloParams::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseOptions {
    pub thermal_convention: ThermalConvention,
}

/// Every parameter of a run. `Default` reproduces the reference parameter table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub description: Option<String>,
    pub pump: PumpParams,
    pub cavity: CavityParams,
    pub pv: PvParams,
    pub ac_cell: AcCellParams,
    pub network: NetworkParams,
    pub background: BackgroundParams,
    pub ofdm: OfdmConfig,
    pub noise: NoiseOptions,
    pub run: RunParams,
}

/// Preset cases for wire inductance and the matching communication resistor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// L = 120 nH, R_C = 300 Ω, 120 subchannels.
    L120,
    /// L = 10 nH, R_C = 140 Ω, 200 subchannels.
    L10,
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L120" => Ok(Case::L120),
            "L10" => Ok(Case::L10),
            _ => Err(Error::Config(format!("unknown case `{s}`, expected L120 or L10"))),
        }
    }
}

impl SystemConfig {
    pub fn preset(case: Case) -> Self {
        let mut cfg = Self::default();
        cfg.apply_case(case);
        cfg
    }

    pub fn apply_case(&mut self, case: Case) {
        let (l, rc, n, label) = match case {
            Case::L120 => (120e-9, 300.0, 120, "L = 120 nH, R_C = 300 ohm"),
            Case::L10 => (10e-9, 140.0, 200, "L = 10 nH, R_C = 140 ohm"),
        };
        self.network.wire_inductance = l;
        self.network.r_comm = rc;
        self.ofdm.subchannels = n;
        self.description = Some(format!("reference parameter table, {label}"));
    }

    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.cavity.validate()?;
        self.pv.validate()?;
        self.ac_cell.validate()?;
        self.network.validate()?;
        self.background.validate()?;
        self.ofdm.validate()?;
        let run = &self.run;
        check(run.p_laser > 0.0, "run.p_laser", "must be > 0")?;
        run.frequency_grid.validate("run.frequency_grid", true)?;
        run.power_grid.validate("run.power_grid", true)?;
        run.photocurrent_grid.validate("run.photocurrent_grid", false)?;
        run.distance_grid.validate("run.distance_grid", true)?;
        check(
            run.iv_photocurrents.iter().all(|&i| i > 0.0),
            "run.iv_photocurrents",
            "entries must be > 0",
        )?;
        check(run.iv_points >= 2, "run.iv_points", "must be >= 2")?;
        check(
            run.small_signal_points >= 2,
            "run.small_signal_points",
            "must be >= 2",
        )?;
        let mc = &run.monte_carlo;
        check(mc.segments >= 1, "run.monte_carlo.segments", "must be >= 1")?;
        check(
            mc.samples >= mc.segments && mc.samples.is_multiple_of(mc.segments),
            "run.monte_carlo.samples",
            "must be a positive multiple of segments",
        )?;
        if let Some(fs) = mc.sample_rate {
            check(fs > 0.0, "run.monte_carlo.sample_rate", "must be > 0")?;
        }
        Ok(())
    }

    pub fn gain(&self) -> Result<EndToEndGain> {
        end_to_end_gain(
            &self.pump,
            &self.cavity,
            self.pv.responsivity,
            self.cavity.distance,
        )
    }

    pub fn background_power(&self) -> f64 {
        background_power(&self.background)
    }

    /// Pump current that puts `p_laser` watts on the panel at the configured distance.
    pub fn bias_for(&self, p_laser: f64) -> Result<f64> {
        let per_watt = laser_power(1.0, self.cavity.distance, &self.cavity)? - self.cavity.offset;
        if !(per_watt > 0.0) {
            return Err(Error::Analysis("cavity transfers no pump power".into()));
        }
        let pump = (p_laser - self.cavity.offset) / per_watt;
        Ok(self.pump.current_for_power(pump.max(0.0)))
    }

    /// Equal-power drive at the bias for `p_laser` with the given subcarrier phases.
    pub fn drive(&self, p_laser: f64, phases: &[f64]) -> Result<DriveSignal> {
        DriveSignal::equal_power(
            self.bias_for(p_laser)?,
            self.ofdm.signal_variance,
            self.ofdm.band_start,
            self.ofdm.subchannel_bandwidth,
            phases,
        )
    }

    /// Received laser power for a pump drive current.
    pub fn laser_power_for(&self, drive: f64) -> Result<f64> {
        let p = pump_power(drive, &self.pump)?.power;
        laser_power(p, self.cavity.distance, &self.cavity)
    }

    /// Runs the full chain at `p_laser` watts of received laser light.
    pub fn evaluate(&self, p_laser: f64) -> Result<LinkEvaluation> {
        let gain = self.gain()?;
        let i_ph = photocurrent(p_laser, &self.pv)?;
        let op = solve_operating_point(i_ph, self.network.r_load, &self.pv)?;
        let cell = small_signal_at(&op, &self.pv, &self.ac_cell)?;
        let model = SmallSignalModel::assemble(&cell, &self.pv, &self.network)?;
        let p_bkg = self.background_power();
        let shot_input = shot_psd_input(p_laser, p_bkg, self.pv.responsivity);
        let spectra = ReceiverSpectra::compute(
            &self.run.frequency_grid.logarithmic(),
            &model,
            shot_input,
            self.pv.temperature,
            self.noise.thermal_convention,
        )?;
        let report = link_report(&self.ofdm, gain.gamma, &spectra, &op, p_laser)?;
        let drive = self.drive(p_laser, &vec![0.0; self.ofdm.subchannels])?;
        let quasi_static =
            self.ac_cell.is_calibrated() || quasi_static_ok(self.ofdm.band_edge(), &self.ac_cell);
        Ok(LinkEvaluation {
            p_laser,
            p_background: p_bkg,
            gain,
            bias_current: drive.bias(),
            modulation_clipped: !drive.stays_above_threshold(&self.pump),
            quasi_static,
            operating_point: op,
            cell,
            model,
            shot_input,
            spectra,
            report,
        })
    }
}

/// Everything computed at one received laser power.
#[derive(Clone, Debug)]
pub struct LinkEvaluation {
    pub p_laser: f64,
    pub p_background: f64,
    pub gain: EndToEndGain,
    pub bias_current: f64,
    /// The drive trough dips below threshold.
    pub modulation_clipped: bool,
    /// The diffusion-capacitance model is valid up to the band edge.
    pub quasi_static: bool,
    pub operating_point: OperatingPoint,
    pub cell: CellDynamics,
    pub model: SmallSignalModel,
    /// Shot-noise current PSD at the panel [A²/Hz].
    pub shot_input: f64,
    pub spectra: ReceiverSpectra,
    pub report: LinkReport,
}
