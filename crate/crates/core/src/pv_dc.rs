//! Single-diode photovoltaic model loaded by a resistor.
//!
//! Output current `I = I_ph − I_d(V_d) − V_d/R_sh` with `V_d = V + I·R_s`.
//! With a resistive load `V = I·R_L`, so the operating point is the unique
//! root of a strictly decreasing function of `I` on `[0, I_ph]`.

use serde::{Deserialize, Serialize};

use crate::constants::thermal_voltage;
use crate::error::{check, Error, Result};
use crate::parallel;
use crate::roots::decreasing_root;

/// Largest exponent the diode law is evaluated at.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// Residual tolerance relative to `max(I_ph, 1 µA)`.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvParams {
    /// Reverse saturation current [A].
    pub saturation_current: f64,
    /// Diode ideality factor.
    pub ideality: f64,
    /// Cells in series.
    pub cells_in_series: u32,
    /// Panel temperature [K].
    pub temperature: f64,
    /// Series resistance [Ω].
    pub r_series: f64,
    /// Shunt resistance [Ω].
    pub r_shunt: f64,
    /// Optical-to-electrical responsivity [A/W].
    pub responsivity: f64,
    /// Panel area [m²].
    pub area: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        Self {
            saturation_current: 9.381e-9,
            ideality: 1.318,
            cells_in_series: 1,
            temperature: 298.15,
            r_series: 1.3,
            r_shunt: 5000.0,
            responsivity: 0.746,
            area: 1e-4,
        }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<()> {
        check(
            self.saturation_current > 0.0,
            "pv.saturation_current",
            "must be > 0",
        )?;
        check(self.ideality >= 1.0, "pv.ideality", "must be >= 1")?;
        check(self.cells_in_series >= 1, "pv.cells_in_series", "must be >= 1")?;
        check(self.temperature > 0.0, "pv.temperature", "must be > 0")?;
        check(self.r_series >= 0.0, "pv.r_series", "must be >= 0")?;
        check(self.r_shunt > 0.0, "pv.r_shunt", "must be > 0")?;
        check(self.responsivity > 0.0, "pv.responsivity", "must be > 0")?;
        check(self.area > 0.0, "pv.area", "must be > 0")
    }

    pub fn thermal_voltage(&self) -> f64 {
        thermal_voltage(self.temperature)
    }

    /// `n·V_T`, the per-cell exponential scale.
    pub fn cell_scale(&self) -> f64 {
        self.ideality * self.thermal_voltage()
    }

    /// `n_s·n·V_T`, the panel-level exponential scale.
    pub fn panel_scale(&self) -> f64 {
        self.cells_in_series as f64 * self.cell_scale()
    }

    /// Diode current and its derivative, `None` past the exponent guard.
    fn diode(&self, v_d: f64) -> Option<(f64, f64)> {
        let scale = self.panel_scale();
        let arg = v_d / scale;
        if arg > EXPONENT_LIMIT {
            return None;
        }
        let e = arg.exp();
        Some((
            self.saturation_current * (e - 1.0),
            self.saturation_current * e / scale,
        ))
    }
}

pub fn photocurrent(optical_power: f64, p: &PvParams) -> Result<f64> {
    if !(optical_power >= 0.0) {
        return Err(Error::Domain(format!(
            "optical power must be >= 0, got {optical_power}"
        )));
    }
    Ok(p.responsivity * optical_power)
}

pub fn diode_current(v_d: f64, p: &PvParams) -> Result<f64> {
    p.diode(v_d).map(|(i, _)| i).ok_or(Error::ExponentOverflow {
        argument: v_d / p.panel_scale(),
        limit: EXPONENT_LIMIT,
    })
}

/// Solved DC state of the panel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub photocurrent: f64,
    pub r_load: f64,
    /// Panel output voltage [V].
    pub v_out: f64,
    /// Panel output current [A].
    pub i_out: f64,
    /// Junction voltage [V].
    pub v_diode: f64,
    /// Diode forward current [A].
    pub i_diode: f64,
    /// Power delivered to the load [W].
    pub charging_power: f64,
    /// Current-balance residual at the returned solution [A].
    pub residual: f64,
}

impl OperatingPoint {
    /// Residuals of the current balance and the series-resistance voltage relation.
    pub fn kirchhoff_residuals(&self, p: &PvParams) -> (f64, f64) {
        let current = self.i_out - (self.photocurrent - self.i_diode - self.v_diode / p.r_shunt);
        let voltage = self.v_diode - (self.v_out + self.i_out * p.r_series);
        (current, voltage)
    }
}

fn tolerance(i_ph: f64) -> f64 {
    RELATIVE_TOLERANCE * i_ph.max(1e-6)
}

pub fn solve_operating_point(i_ph: f64, r_load: f64, p: &PvParams) -> Result<OperatingPoint> {
    if !(i_ph >= 0.0) {
        return Err(Error::Domain(format!("photocurrent must be >= 0, got {i_ph}")));
    }
    if !(r_load > 0.0) {
        return Err(Error::Domain(format!(
            "load resistance must be > 0, got {r_load}"
        )));
    }
    if i_ph == 0.0 {
        return Ok(OperatingPoint {
            r_load,
            ..OperatingPoint::default()
        });
    }
    let r_total = r_load + p.r_series;
    let g = |i: f64| {
        let (id, did) = p.diode(i * r_total)?;
        Some((
            i_ph - id - i * r_total / p.r_shunt - i,
            -did * r_total - r_total / p.r_shunt - 1.0,
        ))
    };
    let hi = i_ph.min(EXPONENT_LIMIT * p.panel_scale() / r_total);
    let root = decreasing_root(g, 0.0, hi, tolerance(i_ph))?;
    let i_out = root.x;
    let v_diode = i_out * r_total;
    let i_diode = diode_current(v_diode, p)?;
    Ok(OperatingPoint {
        photocurrent: i_ph,
        r_load,
        v_out: i_out * r_load,
        i_out,
        v_diode,
        i_diode,
        charging_power: i_out * i_out * r_load,
        residual: root.residual,
    })
}

/// Voltage at which the output current falls to zero.
pub fn open_circuit_voltage(i_ph: f64, p: &PvParams) -> Result<f64> {
    if !(i_ph >= 0.0) {
        return Err(Error::Domain(format!("photocurrent must be >= 0, got {i_ph}")));
    }
    if i_ph == 0.0 {
        return Ok(0.0);
    }
    let k = |v: f64| {
        let (id, did) = p.diode(v)?;
        Some((i_ph - id - v / p.r_shunt, -did - 1.0 / p.r_shunt))
    };
    let hi = p.panel_scale() * (i_ph / p.saturation_current + 1.0).ln();
    Ok(decreasing_root(k, 0.0, hi, tolerance(i_ph))?.x)
}

/// Output current at a fixed terminal voltage `v`, which must not exceed open circuit.
pub fn current_at_voltage(i_ph: f64, v: f64, p: &PvParams) -> Result<f64> {
    let h = |i: f64| {
        let v_d = v + i * p.r_series;
        let (id, did) = p.diode(v_d)?;
        Some((
            i_ph - id - v_d / p.r_shunt - i,
            -did * p.r_series - p.r_series / p.r_shunt - 1.0,
        ))
    };
    match h(0.0) {
        // at or marginally past open circuit
        Some((h0, _)) if h0 <= 0.0 => return Ok(0.0),
        None => return Ok(0.0),
        _ => {}
    }
    Ok(decreasing_root(h, 0.0, i_ph, tolerance(i_ph))?.x)
}

/// I-V curve of the panel over `voltages`, each within `[0, V_oc]`.
pub fn iv_curve(i_ph: f64, voltages: &[f64], p: &PvParams) -> Result<Vec<(f64, f64)>> {
    let v_oc = open_circuit_voltage(i_ph, p)?;
    if let Some(&bad) = voltages
        .iter()
        .find(|&&v| !(v >= 0.0 && v <= v_oc * (1.0 + 1e-9)))
    {
        return Err(Error::Domain(format!(
            "voltage {bad} V outside [0, V_oc = {v_oc} V]"
        )));
    }
    parallel::try_map(voltages, |&v| Ok((v, current_at_voltage(i_ph, v, p)?)))
}

/// `n` evenly spaced voltages from 0 to V_oc inclusive.
pub fn voltage_grid(i_ph: f64, n: usize, p: &PvParams) -> Result<Vec<f64>> {
    let v_oc = open_circuit_voltage(i_ph, p)?;
    Ok(linspace(0.0, v_oc, n))
}

pub fn output_vs_photocurrent(r_load: f64, photocurrents: &[f64], p: &PvParams) -> Result<Vec<(f64, f64)>> {
    parallel::try_map(photocurrents, |&i_ph| {
        Ok((i_ph, solve_operating_point(i_ph, r_load, p)?.i_out))
    })
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
