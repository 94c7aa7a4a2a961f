//! Parameterization of the interferometer: pump, crystal, filters, etalon.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, SPEED_OF_LIGHT};

/// Transform-limited Gaussian pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Pump wavelength, nm.
    pub center_wavelength: f64,
    /// Intensity FWHM of the pulse, ps.
    pub duration_fwhm: f64,
}

impl PumpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > 0.0 && self.center_wavelength.is_finite()) {
            return Err(Error::config("PumpSpec", "center_wavelength must be positive"));
        }
        if !(self.duration_fwhm > 0.0 && self.duration_fwhm.is_finite()) {
            return Err(Error::config("PumpSpec", "duration_fwhm must be positive"));
        }
        Ok(())
    }

    /// Standard deviation (rad/ps) of the spectral field amplitude, written as
    /// `exp(-x^2 / (2 sigma^2))`. For a transform-limited Gaussian pulse this is
    /// `2 sqrt(ln 2) / duration_fwhm`.
    pub fn spectral_sigma(&self) -> f64 {
        2.0 * std::f64::consts::LN_2.sqrt() / self.duration_fwhm
    }

    /// Gaussian coherence time (ps) such that two pair-birth times separated by
    /// `dt` retain the fraction `exp(-dt^2 / (2 tc^2))` of their mutual coherence.
    pub fn coherence_time(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.spectral_sigma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMatchingModel {
    Flat,
    Sinc,
}

/// Crystal phase matching, with linear group-delay mismatch coefficients for the
/// sum and difference detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchingSpec {
    pub model: PhaseMatchingModel,
    /// Crystal length, mm.
    pub crystal_length: f64,
    /// ps/mm, multiplies the sum detuning.
    pub sum_coefficient: f64,
    /// ps/mm, multiplies the difference detuning.
    pub difference_coefficient: f64,
}

impl PhaseMatchingSpec {
    pub fn flat() -> Self {
        PhaseMatchingSpec {
            model: PhaseMatchingModel::Flat,
            crystal_length: 3.0,
            sum_coefficient: 0.0,
            difference_coefficient: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model == PhaseMatchingModel::Flat {
            return Ok(());
        }
        if !(self.crystal_length > 0.0 && self.crystal_length.is_finite()) {
            return Err(Error::config(
                "PhaseMatchingSpec",
                "crystal_length must be positive for the sinc model",
            ));
        }
        if !self.sum_coefficient.is_finite() || !self.difference_coefficient.is_finite() {
            return Err(Error::config(
                "PhaseMatchingSpec",
                "group-delay coefficients must be finite",
            ));
        }
        Ok(())
    }
}

/// Gaussian interference filter, identical in front of both detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// nm
    pub center_wavelength: f64,
    /// Intensity-transmission FWHM, nm.
    pub fwhm: f64,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > 0.0 && self.center_wavelength.is_finite()) {
            return Err(Error::config("FilterSpec", "center_wavelength must be positive"));
        }
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(Error::config("FilterSpec", "fwhm must be positive"));
        }
        Ok(())
    }

    /// Intensity-transmission FWHM as an angular frequency width, rad/ps.
    pub fn angular_fwhm(&self) -> f64 {
        units::angular_width(self.center_wavelength, self.fwhm)
    }

    /// Standard deviation (rad/ps) of the intensity transmission `F = f^2`.
    pub fn intensity_sigma(&self) -> f64 {
        units::fwhm_to_sigma(self.angular_fwhm())
    }
}

/// Fabry-Perot etalon in the signal arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtalonSpec {
    pub enabled: bool,
    /// Intensity reflectivity of each mirror.
    pub reflectivity: f64,
    /// Round-trip time `2 d cos(theta) / c`, ps.
    pub round_trip_time: f64,
    /// Inter-pulse phase, rad. Zero puts a transmission maximum at the filter center.
    pub tune_phase: f64,
}

impl EtalonSpec {
    pub fn disabled() -> Self {
        EtalonSpec {
            enabled: false,
            reflectivity: 0.0,
            round_trip_time: 1.0,
            tune_phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.reflectivity) {
            return Err(Error::config(
                "EtalonSpec",
                format!("reflectivity must lie in [0, 1), got {}", self.reflectivity),
            ));
        }
        if !(self.round_trip_time > 0.0 && self.round_trip_time.is_finite()) {
            return Err(Error::config("EtalonSpec", "round_trip_time must be positive"));
        }
        if !self.tune_phase.is_finite() {
            return Err(Error::config("EtalonSpec", "tune_phase must be finite"));
        }
        Ok(())
    }

    /// Inter-pulse phase reduced to [0, 2π).
    pub fn reduced_tune_phase(&self) -> f64 {
        let r = self.tune_phase.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }

    /// Free spectral range, THz.
    pub fn fsr(&self) -> f64 {
        1.0 / self.round_trip_time
    }

    /// Comb period in angular detuning, rad/ps.
    pub fn angular_fsr(&self) -> f64 {
        TAU / self.round_trip_time
    }

    /// Group delay of the directly transmitted wavepacket (half a round trip).
    /// The delay axis is calibrated so that this packet meets the idler at zero.
    pub fn transit_delay(&self) -> f64 {
        if self.enabled {
            0.5 * self.round_trip_time
        } else {
            0.0
        }
    }
}

/// Everything needed to evaluate the coincidence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSetup {
    pub pump: PumpSpec,
    pub phase_matching: PhaseMatchingSpec,
    pub filter: FilterSpec,
    pub etalon: EtalonSpec,
    /// Degenerate signal/idler wavelength, nm.
    pub spdc_center_wavelength: f64,
}

/// Names accepted by [`OpticalSetup::preset`].
pub const PRESETS: [&str; 4] = ["fig3a", "fig3b", "fig3c", "hom"];

/// Mirror spacing of the experimental etalon, μm.
pub const EXPERIMENT_ETALON_SPACING: f64 = 100.0;

impl OpticalSetup {
    /// The experimental configuration: 1.4 ps pump at 393 nm, degenerate pairs
    /// at 786 nm, 10 nm filters, R = 0.9 etalon with 100 μm spacing.
    pub fn experiment(tune_phase: f64) -> Self {
        let etalon = crate::spectral::etalon_from_geometry(EXPERIMENT_ETALON_SPACING, 0.0, 0.9)
            .expect("experimental etalon geometry is valid");
        OpticalSetup {
            pump: PumpSpec {
                center_wavelength: 393.0,
                duration_fwhm: 1.4,
            },
            phase_matching: PhaseMatchingSpec::flat(),
            filter: FilterSpec {
                center_wavelength: 786.0,
                fwhm: 10.0,
            },
            etalon: EtalonSpec {
                tune_phase,
                ..etalon
            },
            spdc_center_wavelength: 786.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig3a" => Ok(Self::experiment(0.0)),
            "fig3b" => Ok(Self::experiment(PI)),
            "fig3c" => Ok(Self::experiment(FRAC_PI_2)),
            "hom" => Ok(OpticalSetup {
                etalon: EtalonSpec::disabled(),
                ..Self::experiment(0.0)
            }),
            other => Err(Error::config(
                "OpticalSetup",
                format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.phase_matching.validate()?;
        self.filter.validate()?;
        if self.etalon.enabled {
            self.etalon.validate()?;
        }
        if !(self.spdc_center_wavelength > 0.0 && self.spdc_center_wavelength.is_finite()) {
            return Err(Error::config(
                "OpticalSetup",
                "spdc_center_wavelength must be positive",
            ));
        }
        Ok(())
    }

    /// Degenerate center angular frequency ω0, rad/ps.
    pub fn center_frequency(&self) -> f64 {
        units::angular_frequency(self.spdc_center_wavelength)
    }

    /// Filter center as a detuning from ω0.
    pub fn filter_detuning(&self) -> f64 {
        units::angular_frequency(self.filter.center_wavelength) - self.center_frequency()
    }

    /// Pump center as a sum detuning from 2ω0.
    pub fn pump_detuning(&self) -> f64 {
        units::angular_frequency(self.pump.center_wavelength) - 2.0 * self.center_frequency()
    }
}

/// Round-trip time (ps) of an etalon with the given mirror spacing (μm) and
/// internal incidence angle (rad).
pub fn round_trip_time(spacing_um: f64, incidence_angle: f64) -> f64 {
    2.0 * spacing_um * 1.0e3 * incidence_angle.cos() / SPEED_OF_LIGHT
}
