//! CODATA 2018 exact constants shared by every stage of the link model.

/// Planck constant [J·s].
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity [F/m].
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Photon energy per unit charge, hc/(qλ), in volts.
pub fn photon_voltage(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / (ELEMENTARY_CHARGE * wavelength)
}

/// Thermal voltage kT/q [V].
pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}
