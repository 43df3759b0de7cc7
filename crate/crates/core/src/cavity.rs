//! Resonant cavity between the transmitter and receiver retroreflectors.
//!
//! The cavity turns pump light into the coupled-out laser through the
//! population-inversion efficiency and a distance-dependent diffraction
//! factor. Chained with the pump diode and the PV responsivity the whole
//! path is affine: `I_ph = gamma·(I_in − I_th) + beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::photon_voltage;
use crate::error::{check, Error, Result};
use crate::pump::PumpParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityParams {
    /// Population-inversion conversion efficiency.
    pub conversion_efficiency: f64,
    /// Output mirror reflectivity, strictly inside (0, 1).
    pub reflectivity: f64,
    /// Mode overlap efficiency in [0, 1].
    pub overlap: f64,
    /// Aperture radius [m].
    pub aperture_radius: f64,
    /// Resonant beam wavelength [m].
    pub beam_wavelength: f64,
    /// Constant offset in the output power [W].
    pub offset: f64,
    /// Transmitter-receiver separation [m].
    pub distance: f64,
    /// Fixed distance factor used in place of the diffraction model.
    pub distance_gain_override: Option<f64>,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            conversion_efficiency: 0.423,
            reflectivity: 0.95,
            overlap: 1.0,
            aperture_radius: 1.5e-3,
            beam_wavelength: 1064e-9,
            offset: 0.0,
            distance: 1.675,
            // product with conversion_efficiency is 5.4 %
            distance_gain_override: Some(0.054 / 0.423),
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        check(
            self.conversion_efficiency >= 0.0,
            "cavity.conversion_efficiency",
            "must be >= 0",
        )?;
        check(
            self.reflectivity > 0.0 && self.reflectivity < 1.0,
            "cavity.reflectivity",
            "must lie in (0, 1)",
        )?;
        check(
            (0.0..=1.0).contains(&self.overlap),
            "cavity.overlap",
            "must lie in [0, 1]",
        )?;
        check(
            self.aperture_radius > 0.0,
            "cavity.aperture_radius",
            "must be > 0",
        )?;
        check(
            self.beam_wavelength > 0.0,
            "cavity.beam_wavelength",
            "must be > 0",
        )?;
        check(self.distance > 0.0, "cavity.distance", "must be > 0")?;
        if let Some(g) = self.distance_gain_override {
            check(g >= 0.0, "cavity.distance_gain_override", "must be >= 0")?;
        }
        Ok(())
    }

    /// Distance factor in effect at `distance`: the override when set, the diffraction model otherwise.
    pub fn effective_gain(&self, distance: f64) -> Result<f64> {
        match self.distance_gain_override {
            Some(g) => Ok(g),
            None => distance_gain(distance, self),
        }
    }

    /// Limit of the distance factor as d → ∞.
    pub fn far_limit(&self) -> f64 {
        let r = self.reflectivity;
        2.0 * (1.0 - r) * self.overlap / ((1.0 + r) * (1.0 - r.ln()))
    }

    /// Limit of the distance factor as d → 0⁺.
    pub fn near_limit(&self) -> f64 {
        let r = self.reflectivity;
        2.0 * (1.0 - r) * self.overlap / (-(1.0 + r) * r.ln())
    }
}

/// Diffraction-limited cavity factor f(d).
pub fn distance_gain(distance: f64, c: &CavityParams) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("distance must be > 0, got {distance}")));
    }
    let r = c.reflectivity;
    let fresnel = (-2.0 * PI * c.aperture_radius.powi(2) / (c.beam_wavelength * distance)).exp();
    Ok(2.0 * (1.0 - r) * c.overlap / ((1.0 + r) * fresnel - (1.0 + r) * r.ln()))
}

/// Coupled-out laser power for `pump_power` watts of pump light at `distance`.
pub fn laser_power(pump_power: f64, distance: f64, c: &CavityParams) -> Result<f64> {
    if !(pump_power >= 0.0) {
        return Err(Error::Domain(format!(
            "pump power must be >= 0, got {pump_power}"
        )));
    }
    Ok(c.conversion_efficiency * pump_power * c.effective_gain(distance)? + c.offset)
}

/// Affine end-to-end coefficients from drive current to photocurrent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndToEndGain {
    /// Small-signal current gain, dimensionless.
    pub gamma: f64,
    /// Photocurrent offset [A].
    pub beta: f64,
}

impl EndToEndGain {
    pub fn photocurrent(&self, drive: f64, pump: &PumpParams) -> f64 {
        self.gamma * (drive - pump.threshold_current) + self.beta
    }
}

pub fn end_to_end_gain(
    pump: &PumpParams,
    cavity: &CavityParams,
    responsivity: f64,
    distance: f64,
) -> Result<EndToEndGain> {
    let eta_d = cavity.effective_gain(distance)?;
    Ok(EndToEndGain {
        gamma: responsivity
            * cavity.conversion_efficiency
            * eta_d
            * pump.external_efficiency
            * photon_voltage(pump.wavelength),
        beta: responsivity * cavity.offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump::pump_power;

    fn diffraction_only() -> CavityParams {
        CavityParams {
            distance_gain_override: None,
            ..CavityParams::default()
        }
    }

    #[test]
    fn zero_overlap_kills_output() {
        let c = CavityParams {
            overlap: 0.0,
            ..diffraction_only()
        };
        assert_eq!(distance_gain(3.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn far_field_limit() {
        let c = diffraction_only();
        let far = distance_gain(1e9, &c).unwrap();
        let r: f64 = c.reflectivity;
        let analytic = 2.0 * (1.0 - r) * c.overlap / ((1.0 + r) * (1.0 - r.ln()));
        assert!(((far - analytic) / analytic).abs() < 1e-7);
    }

    #[test]
    fn monotone_over_spot_pairs() {
        let c = diffraction_only();
        for (d1, d2) in [(0.1, 0.5), (0.5, 2.0), (1.0, 10.0), (20.0, 100.0), (0.1, 100.0)] {
            assert!(distance_gain(d1, &c).unwrap() > distance_gain(d2, &c).unwrap());
        }
    }

    #[test]
    fn nonpositive_distance_is_rejected() {
        assert!(distance_gain(0.0, &diffraction_only()).is_err());
        assert!(distance_gain(-1.0, &diffraction_only()).is_err());
    }

    #[test]
    fn zero_pump_zero_offset() {
        assert_eq!(laser_power(0.0, 1.0, &CavityParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn five_point_four_percent_chain() {
        let p = laser_power(1.0, 1.0, &CavityParams::default()).unwrap();
        assert!((p - 0.054).abs() < 1e-15);
    }

    #[test]
    fn affine_in_pump_power() {
        let c = CavityParams {
            offset: 0.002,
            ..diffraction_only()
        };
        let slope = c.conversion_efficiency * distance_gain(2.0, &c).unwrap();
        let a = laser_power(0.3, 2.0, &c).unwrap();
        let b = laser_power(0.8, 2.0, &c).unwrap();
        assert!(((b - a) / 0.5 - slope).abs() < 1e-12);
    }

    #[test]
    fn gamma_reference_value() {
        let g = end_to_end_gain(&PumpParams::default(), &CavityParams::default(), 0.746, 1.0).unwrap();
        assert!(((g.gamma - 0.0557) / 0.0557).abs() < 5e-3);
        assert_eq!(g.beta, 0.0);
    }

    #[test]
    fn gamma_linear_in_responsivity() {
        let p = PumpParams::default();
        let c = CavityParams::default();
        let a = end_to_end_gain(&p, &c, 0.4, 1.0).unwrap().gamma;
        let b = end_to_end_gain(&p, &c, 0.8, 1.0).unwrap().gamma;
        assert!((b - 2.0 * a).abs() < 1e-16);
    }

    #[test]
    fn full_chain_matches_affine_form() {
        let pump = PumpParams::default();
        let cav = CavityParams {
            offset: 1e-3,
            ..diffraction_only()
        };
        let rho = 0.746;
        let d = 2.5;
        let g = end_to_end_gain(&pump, &cav, rho, d).unwrap();
        for drive in [0.5, 0.8, 1.7, 3.2, 9.0] {
            let p_pump = pump_power(drive, &pump).unwrap().power;
            let i_ph = rho * laser_power(p_pump, d, &cav).unwrap();
            let affine = g.photocurrent(drive, &pump);
            assert!(((i_ph - affine) / affine).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_and_decreasing_on_log_grid(r in 0.05f64..0.99, p in 0.01f64..1.0, a in 1e-4f64..5e-3) {
                let c = CavityParams { reflectivity: r, overlap: p, aperture_radius: a, ..diffraction_only() };
                let grid: Vec<f64> = (0..60).map(|k| 10f64.powf(-2.0 + k as f64 * 0.1)).collect();
                let vals: Vec<f64> = grid.iter().map(|&d| distance_gain(d, &c).unwrap()).collect();
                for w in vals.windows(2) {
                    prop_assert!(w[1] <= w[0]);
                }
                for &v in &vals {
                    prop_assert!(v >= c.far_limit() * (1.0 - 1e-12));
                    prop_assert!(v <= c.near_limit() * (1.0 + 1e-12));
                }
            }

            #[test]
            fn increasing_in_overlap(p1 in 0.0f64..0.5, dp in 0.01f64..0.5, d in 0.1f64..100.0) {
                let lo = CavityParams { overlap: p1, ..diffraction_only() };
                let hi = CavityParams { overlap: p1 + dp, ..diffraction_only() };
                prop_assert!(distance_gain(d, &hi).unwrap() > distance_gain(d, &lo).unwrap());
            }
        }
    }
}
