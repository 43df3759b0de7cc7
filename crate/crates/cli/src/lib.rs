//! Front end for the link simulator: JSON configuration in, CSV tables and a
//! JSON run report out.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rbcom::cavity::{distance_gain, laser_power, CavityParams};
use rbcom::link::{monte_carlo_snr, power_capacity_sweep};
use rbcom::network::{passband_3db, Source};
use rbcom::pump::pump_power;
use rbcom::pv_ac::cell_dynamics;
use rbcom::pv_dc::{
    current_at_voltage, iv_curve, open_circuit_voltage, output_vs_photocurrent, photocurrent, voltage_grid,
    OperatingPoint,
};
use rbcom::system::{Analysis, LinkEvaluation, SystemConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] rbcom::Error),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Model(rbcom::Error::InvalidParameter { .. }) => "validation",
            CliError::Model(rbcom::Error::Config(_)) => "config",
            CliError::Model(_) => "model",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses and validates a configuration document. Missing keys take their defaults.
pub fn parse_config(text: &str, origin: &Path) -> Result<SystemConfig> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, path)
}

pub fn write_config(cfg: &SystemConfig, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(cfg).expect("config serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// SHA-256 of the config serialized with sorted keys and no whitespace.
pub fn config_hash(cfg: &SystemConfig) -> String {
    let canonical = serde_json::to_value(cfg).expect("config serializes");
    let bytes = serde_json::to_vec(&canonical).expect("value serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Comparison of one summary scalar against its reference value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub quantity: String,
    pub reference: f64,
    pub value: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub note: String,
}

impl Deviation {
    fn new(quantity: &str, reference: f64, value: f64, tolerance: f64, note: &str) -> Self {
        let relative_error = (value - reference) / reference;
        Self {
            quantity: quantity.into(),
            reference,
            value,
            relative_error,
            tolerance,
            within_tolerance: relative_error.abs() <= tolerance,
            note: note.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub gamma: f64,
    pub beta: f64,
    pub p_laser_w: f64,
    pub operating_point: OperatingPoint,
    pub dynamic_resistance_ohm: f64,
    pub capacitance_f: f64,
    /// 3 dB width of |H_ph|²; absent when the passband runs off the grid.
    pub bandwidth_hz: Option<f64>,
    pub bandwidth_lower_clipped: Option<bool>,
    pub total_capacity_bps: f64,
    pub charging_power_w: f64,
    pub modulation_clipped: bool,
    pub quasi_static: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub analysis: Analysis,
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<String>,
    pub summary: Summary,
    pub deviations: Vec<Deviation>,
}

const CAPACITY_NOTE: &str = "thermal noise of R_C dominates the output noise with these element values";
const BANDWIDTH_NOTE: &str =
    "lower 3 dB edge taken at the grid start when the response is still within 3 dB there";

/// Reference bandwidth and capacity for the two reference cases.
fn references(cfg: &SystemConfig) -> Option<(f64, f64)> {
    let n = &cfg.network;
    match (n.wire_inductance, n.r_comm, cfg.ofdm.subchannels) {
        (l, rc, 120) if l == 120e-9 && rc == 300.0 => Some((120e6, 1.19e9)),
        (l, rc, 200) if l == 10e-9 && rc == 140.0 => Some((200e6, 1.76e9)),
        _ => None,
    }
}

fn summarize(cfg: &SystemConfig, ev: &LinkEvaluation) -> (Summary, Vec<Deviation>) {
    let band = passband_3db(&ev.spectra.signal_gain).ok();
    let summary = Summary {
        gamma: ev.gain.gamma,
        beta: ev.gain.beta,
        p_laser_w: ev.p_laser,
        operating_point: ev.operating_point,
        dynamic_resistance_ohm: ev.model.r,
        capacitance_f: ev.model.c,
        bandwidth_hz: band.map(|b| b.width()),
        bandwidth_lower_clipped: band.map(|b| b.lower_clipped),
        total_capacity_bps: ev.report.total_capacity,
        charging_power_w: ev.report.charging_power,
        modulation_clipped: ev.modulation_clipped,
        quasi_static: ev.quasi_static,
    };
    let mut deviations = Vec::new();
    if let Some((bw, cap)) = references(cfg) {
        if let Some(b) = band {
            deviations.push(Deviation::new(
                "bandwidth_hz",
                bw,
                b.width(),
                0.25,
                BANDWIDTH_NOTE,
            ));
        }
        deviations.push(Deviation::new(
            "total_capacity_bps",
            cap,
            ev.report.total_capacity,
            0.15,
            CAPACITY_NOTE,
        ));
    }
    (summary, deviations)
}

/// In-memory CSV table; numbers are written in shortest round-trip scientific notation.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn tables(cfg: &SystemConfig, ev: &LinkEvaluation) -> Result<Vec<(String, Table)>> {
    let run = &cfg.run;
    let pv = &cfg.pv;
    let mut out = Vec::new();
    match run.analysis {
        Analysis::IvCurve => {
            for (k, &i_ph) in run.iv_photocurrents.iter().enumerate() {
                let v = voltage_grid(i_ph, run.iv_points, pv)?;
                let mut t = Table::new(["V_pv_o", "I_pv_o"]);
                for (v, i) in iv_curve(i_ph, &v, pv)? {
                    t.push(vec![v, i]);
                }
                out.push((format!("iv_curve_{k}.csv"), t));
            }
        }
        Analysis::OperatingPoint => {
            let mut t = Table::new(["I_ph", "I_pv_o"]);
            for (i_ph, i) in output_vs_photocurrent(cfg.network.r_load, &run.photocurrent_grid.linear(), pv)?
            {
                t.push(vec![i_ph, i]);
            }
            out.push(("output_vs_photocurrent.csv".into(), t));
        }
        Analysis::SmallSignal => {
            let i_ph = photocurrent(run.p_laser, pv)?;
            let v_oc = open_circuit_voltage(i_ph, pv)?;
            let mut t = Table::new(["V_pv_o", "r_ohm", "C_farad"]);
            for v in rbcom::pv_dc::linspace(0.0, v_oc, run.small_signal_points) {
                let i = current_at_voltage(i_ph, v, pv)?;
                let cell = cell_dynamics(v + i * pv.r_series, pv, &cfg.ac_cell)?;
                t.push(vec![v, cell.r, cell.c]);
            }
            out.push(("small_signal.csv".into(), t));
        }
        Analysis::FreqResponse => {
            let mut header = vec!["f_Hz".to_string(), "H2_signal_dB".into()];
            header.extend(Source::THERMAL.iter().map(|s| format!("H2_{}_dB", s.label())));
            let mut t = Table::new(header);
            let s = &ev.spectra;
            for ((f, g), th) in s
                .frequencies()
                .iter()
                .zip(s.signal_gain.values())
                .zip(s.thermal_breakdown.values())
            {
                let mut row = vec![*f, db(*g)];
                row.extend(th.gains.iter().map(|&h| db(h)));
                t.push(row);
            }
            out.push(("freq_response.csv".into(), t));
        }
        Analysis::Noise => {
            let mut header = vec![
                "f_Hz".to_string(),
                "shot_V2Hz".into(),
                "thermal_total_V2Hz".into(),
            ];
            header.extend(
                Source::THERMAL
                    .iter()
                    .map(|s| format!("thermal_{}_V2Hz", s.label())),
            );
            let mut t = Table::new(header);
            let s = &ev.spectra;
            for ((f, shot), th) in s
                .frequencies()
                .iter()
                .zip(s.shot.values())
                .zip(s.thermal_breakdown.values())
            {
                let mut row = vec![*f, *shot, th.total];
                row.extend(th.by_source);
                t.push(row);
            }
            out.push(("noise.csv".into(), t));
        }
        Analysis::SnrCapacity => {
            let mut t = Table::new(["f_MHz", "SNR_dB", "capacity_Mbps"]);
            for s in &ev.report.subchannels {
                t.push(vec![s.frequency / 1e6, db(s.snr), s.capacity / 1e6]);
            }
            out.push(("snr_capacity.csv".into(), t));
        }
        Analysis::PowerSweep => {
            let mut t = Table::new(["P_laser_W", "P_chg_W", "capacity_Gbps"]);
            for p in power_capacity_sweep(&run.power_grid.linear(), cfg)? {
                t.push(vec![p.p_laser, p.charging_power, p.capacity / 1e9]);
            }
            out.push(("power_sweep.csv".into(), t));
        }
        Analysis::DistanceSweep => {
            // the sweep always uses the diffraction model, whatever the override
            let cavity = CavityParams {
                distance_gain_override: None,
                ..cfg.cavity.clone()
            };
            let pump = pump_power(ev.bias_current, &cfg.pump)?.power;
            let mut t = Table::new(["d_m", "f_d", "P_laser_W"]);
            for d in run.distance_grid.logarithmic() {
                t.push(vec![
                    d,
                    distance_gain(d, &cavity)?,
                    laser_power(pump, d, &cavity)?,
                ]);
            }
            out.push(("distance_sweep.csv".into(), t));
        }
        Analysis::MonteCarlo => {
            let mc = monte_carlo_snr(cfg, ev, run.seed)?;
            let mut t = Table::new(["f_MHz", "SNR_analytic_dB", "SNR_empirical_dB"]);
            for s in &mc.subchannels {
                t.push(vec![s.frequency / 1e6, db(s.analytic_snr), db(s.snr)]);
            }
            out.push(("monte_carlo.csv".into(), t));
        }
    }
    Ok(out)
}

/// Runs `cfg.run.analysis`, writing its CSV files and `summary.json` into `out_dir`.
///
/// Nothing is written unless every computation succeeds.
pub fn run_analysis(cfg: &SystemConfig, out_dir: &Path) -> Result<RunResult> {
    cfg.validate()?;
    let ev = cfg.evaluate(cfg.run.p_laser)?;
    let tables = tables(cfg, &ev)?;
    let (summary, deviations) = summarize(cfg, &ev);
    let result = RunResult {
        analysis: cfg.run.analysis,
        config_hash: config_hash(cfg),
        seed: cfg.run.seed,
        files: tables.iter().map(|(name, _)| name.clone()).collect(),
        summary,
        deviations,
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for (name, table) in &tables {
        let path = out_dir.join(name);
        fs::write(&path, table.render()).map_err(io_err(&path))?;
    }
    let path = out_dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(&result).expect("result serializes");
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(result)
}
