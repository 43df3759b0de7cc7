//! Bias-dependent small-signal elements of the PV cell: dynamic
//! resistance and the transition + diffusion capacitance.

use serde::{Deserialize, Serialize};

use crate::constants::{ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{check, Error, Result};
use crate::pv_dc::{OperatingPoint, PvParams};

/// Above this `ωτ` the quasi-static diffusion capacitance is no longer valid.
pub const QUASI_STATIC_LIMIT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcCellParams {
    /// Relative permittivity of the semiconductor (Si 11.7, GaAs 13.1).
    pub permittivity: f64,
    /// Base doping concentration [m⁻³].
    pub doping: f64,
    /// Built-in junction voltage [V].
    pub built_in_voltage: f64,
    /// Minority carrier lifetime [s].
    pub lifetime: f64,
    /// Fixed total cell capacitance [F]; bypasses the junction formulas.
    pub calibration_c: Option<f64>,
    /// Fixed dynamic resistance [Ω]; bypasses the diode-law slope.
    pub calibration_r: Option<f64>,
}

impl Default for AcCellParams {
    fn default() -> Self {
        Self {
            permittivity: 11.7,
            doping: 1e21,
            built_in_voltage: 0.7,
            // fitted: C_T + C_d = 26.6 nF at V_d = 0.2833 V
            lifetime: 2.5630e-5,
            calibration_c: Some(26.6e-9),
            calibration_r: Some(839.5),
        }
    }
}

impl AcCellParams {
    /// Same junction parameters with the calibration overrides removed.
    pub fn physical(&self) -> Self {
        Self {
            calibration_c: None,
            calibration_r: None,
            ..self.clone()
        }
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibration_c.is_some() || self.calibration_r.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        check(self.permittivity > 0.0, "ac_cell.permittivity", "must be > 0")?;
        check(self.doping > 0.0, "ac_cell.doping", "must be > 0")?;
        check(
            self.built_in_voltage > 0.0,
            "ac_cell.built_in_voltage",
            "must be > 0",
        )?;
        check(self.lifetime > 0.0, "ac_cell.lifetime", "must be > 0")?;
        if let Some(c) = self.calibration_c {
            check(c > 0.0, "ac_cell.calibration_c", "must be > 0")?;
        }
        if let Some(r) = self.calibration_r {
            check(r > 0.0, "ac_cell.calibration_r", "must be > 0")?;
        }
        Ok(())
    }
}

/// Slope resistance of the junction, `n·V_T / (I_0·e^{V_d/(n·V_T)})`.
pub fn dynamic_resistance(v_d: f64, pv: &PvParams) -> f64 {
    let scale = pv.cell_scale();
    scale / (pv.saturation_current * (v_d / scale).exp())
}

/// Depletion-layer capacitance.
///
/// Evaluates `A·sqrt(q·ε·ε₀·N_B / (2·sqrt(V_0 − V_d)))` exactly as written,
/// including the inner square root.
pub fn transition_capacitance(v_d: f64, area: f64, ac: &AcCellParams) -> Result<f64> {
    let gap = ac.built_in_voltage - v_d;
    if !(gap > 0.0) {
        return Err(Error::Singularity {
            v_d,
            v_0: ac.built_in_voltage,
        });
    }
    let numerator = ELEMENTARY_CHARGE * ac.permittivity * VACUUM_PERMITTIVITY * ac.doping;
    Ok(area * (numerator / (2.0 * gap.sqrt())).sqrt())
}

/// Quasi-static diffusion capacitance, valid while `ωτ ≪ 1`.
pub fn diffusion_capacitance(v_d: f64, pv: &PvParams, ac: &AcCellParams) -> f64 {
    let scale = pv.cell_scale();
    ac.lifetime / (2.0 * scale) * pv.saturation_current * (v_d / scale).exp()
}

/// Lifetime that makes the total capacitance equal `target` at `v_d`.
pub fn fit_lifetime(target: f64, v_d: f64, pv: &PvParams, ac: &AcCellParams) -> Result<f64> {
    let c_t = transition_capacitance(v_d, pv.area, ac)?;
    if c_t >= target {
        return Err(Error::Domain(format!(
            "transition capacitance {c_t:e} F already exceeds the target {target:e} F"
        )));
    }
    // C_d·r = τ/2
    Ok(2.0 * (target - c_t) * dynamic_resistance(v_d, pv))
}

/// Cell elements at one bias point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellDynamics {
    pub v_diode: f64,
    /// Dynamic resistance [Ω].
    pub r: f64,
    /// Total cell capacitance [F].
    pub c: f64,
    /// Transition part of `c`; NaN in calibration mode.
    pub c_transition: f64,
    /// Diffusion part of `c`; NaN in calibration mode.
    pub c_diffusion: f64,
}

/// Junction elements at `v_d` from the physical formulas.
pub fn cell_dynamics(v_d: f64, pv: &PvParams, ac: &AcCellParams) -> Result<CellDynamics> {
    let c_transition = transition_capacitance(v_d, pv.area, ac)?;
    let c_diffusion = diffusion_capacitance(v_d, pv, ac);
    Ok(CellDynamics {
        v_diode: v_d,
        r: dynamic_resistance(v_d, pv),
        c: c_transition + c_diffusion,
        c_transition,
        c_diffusion,
    })
}

/// Cell elements at a solved operating point, honouring calibration overrides.
pub fn small_signal_at(op: &OperatingPoint, pv: &PvParams, ac: &AcCellParams) -> Result<CellDynamics> {
    let (r, c_transition, c_diffusion, c) = match (ac.calibration_r, ac.calibration_c) {
        (Some(r), Some(c)) => (r, f64::NAN, f64::NAN, c),
        (r_fixed, c_fixed) => {
            let phys = cell_dynamics(op.v_diode, pv, ac)?;
            (
                r_fixed.unwrap_or(phys.r),
                phys.c_transition,
                phys.c_diffusion,
                c_fixed.unwrap_or(phys.c),
            )
        }
    };
    Ok(CellDynamics {
        v_diode: op.v_diode,
        r,
        c,
        c_transition,
        c_diffusion,
    })
}

/// True when `2π·f_max·τ` stays under [`QUASI_STATIC_LIMIT`].
pub fn quasi_static_ok(f_max: f64, ac: &AcCellParams) -> bool {
    std::f64::consts::TAU * f_max * ac.lifetime <= QUASI_STATIC_LIMIT
}
