//! Unit conventions.
//!
//! Frequencies are angular detunings in rad/ps, times are in ps, and lengths
//! enter in nm, μm or mm and are converted here.

use std::f64::consts::TAU;

/// Speed of light in vacuum, nm/ps.
pub const SPEED_OF_LIGHT: f64 = 299_792.458;

/// Angular frequency (rad/ps) of light with the given vacuum wavelength (nm).
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / wavelength_nm
}

/// Angular width (rad/ps) of a wavelength interval `width_nm` around `center_nm`,
/// to first order.
pub fn angular_width(center_nm: f64, width_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT * width_nm / (center_nm * center_nm)
}

/// Wavelength interval (nm) at `center_nm` that spans `frequency_thz`.
pub fn wavelength_width(center_nm: f64, frequency_thz: f64) -> f64 {
    frequency_thz * center_nm * center_nm / SPEED_OF_LIGHT
}

/// Standard deviation of a Gaussian with the given full width at half maximum.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}
