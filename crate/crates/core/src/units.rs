//! Physical constants and unit conversions.
//!
//! Rates and detunings are angular frequencies (rad/s) everywhere inside the
//! library. User-facing inputs quote ordinary frequencies in MHz or kHz and are
//! multiplied by 2π at the boundary.

use std::f64::consts::TAU;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mass of a ⁸⁷Rb atom, kg.
pub const RB87_MASS: f64 = 1.443e-25;
/// Vacuum wavelength of the ⁸⁷Rb D2 line, m.
pub const RB87_D2_WAVELENGTH: f64 = 780.241_209_686e-9;
/// Natural linewidth of the ⁸⁷Rb D2 line as an ordinary frequency, MHz.
pub const RB87_D2_LINEWIDTH_MHZ: f64 = 6.065;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

/// Ordinary frequency in kHz to angular frequency in rad/s.
pub fn khz(f: f64) -> f64 {
    TAU * f * 1e3
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

/// Angular frequency of light with the given vacuum wavelength.
pub fn optical_angular_frequency(wavelength: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / wavelength
}
