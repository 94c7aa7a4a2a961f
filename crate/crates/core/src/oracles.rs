//! Reference computations that share no code path with the engine or with the
//! comb-state formula, used only to verify them.
//!
//! - [`hom_closed_form`] reduces the no-etalon double integral analytically.
//!   With Gaussian filter intensities of standard deviation `σ_F` and a joint
//!   amplitude that depends on `ν_s + ν_i` only, the integrand factorizes in
//!   the sum and difference detunings. The pump factor is identical in both
//!   terms and cancels, leaving
//!   `R_c(τ) / R_c(∞) = 1 - exp(-σ_F² τ²)`: visibility 1 and Gaussian width
//!   `s = 1 / (√2 σ_F)` regardless of the pump duration.
//! - [`etalon_impulse_train`] is the time-domain expansion of the etalon.
//! - [`brute_force_schemes`] builds every two-photon amplitude of the comb
//!   picture from the impulse train and sums probabilities explicitly. It does
//!   not call into [`crate::feynman`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::setup::{EtalonSpec, OpticalSetup, PhaseMatchingModel, PumpSpec};
use crate::spectral::etalon_transfer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianHomParams {
    pub visibility: f64,
    /// ps
    pub width: f64,
}

pub fn gaussian_hom_params(setup: &OpticalSetup) -> Result<GaussianHomParams> {
    setup.validate()?;
    if setup.etalon.enabled {
        return Err(Error::Unsupported(
            "closed-form HOM trace requires the etalon to be disabled".to_string(),
        ));
    }
    if setup.phase_matching.model != PhaseMatchingModel::Flat {
        return Err(Error::Unsupported(
            "closed-form HOM trace requires flat phase matching".to_string(),
        ));
    }
    Ok(GaussianHomParams {
        visibility: 1.0,
        width: 1.0 / (std::f64::consts::SQRT_2 * setup.filter.intensity_sigma()),
    })
}

/// Normalized coincidence rate of the bare HOM dip.
pub fn hom_closed_form(setup: &OpticalSetup, tau: f64) -> Result<f64> {
    let p = gaussian_hom_params(setup)?;
    let x = tau / p.width;
    Ok(1.0 - p.visibility * (-0.5 * x * x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulsePulse {
    /// `mT`, ps.
    pub delay: f64,
    /// `(1 - R) R^m e^{i m δφ}`.
    pub amplitude: Complex64,
}

/// The first `pulses` wavepackets leaving the etalon.
pub fn etalon_impulse_train(etalon: &EtalonSpec, pulses: usize) -> Result<Vec<ImpulsePulse>> {
    if !etalon.enabled {
        return Err(Error::Unsupported("impulse train of a disabled etalon".to_string()));
    }
    etalon.validate()?;
    let r = etalon.reflectivity;
    let phase = etalon.reduced_tune_phase();
    let mut amplitude = Complex64::new(1.0 - r, 0.0);
    let step = Complex64::from_polar(r, phase);
    let mut train = Vec::with_capacity(pulses);
    for m in 0..pulses {
        if r == 0.0 && m > 0 {
            break;
        }
        train.push(ImpulsePulse {
            delay: m as f64 * etalon.round_trip_time,
            amplitude,
        });
        amplitude *= step;
    }
    Ok(train)
}

/// `(1 - R) / (1 + R)`, the limit of the train's total intensity.
pub fn impulse_train_power_limit(reflectivity: f64) -> f64 {
    (1.0 - reflectivity) / (1.0 + reflectivity)
}

/// Mean of `|f_e|²` over one FSR from `samples` equally spaced evaluations of
/// the spectral transfer function.
pub fn mean_transmission_over_fsr(etalon: &EtalonSpec, samples: usize) -> Result<f64> {
    let period = etalon.angular_fsr();
    let mut sum = 0.0;
    for k in 0..samples {
        let nu = (k as f64 + 0.5) / samples as f64 * period;
        sum += etalon_transfer(nu, etalon, 0.0)?.norm_sqr();
    }
    Ok(sum / samples as f64)
}

/// Largest scheme index accepted by [`brute_force_schemes`].
pub const BRUTE_FORCE_MAX_J: usize = 12;

/// Normalized coincidence probability at `τ_j = jT/2` by explicit enumeration.
///
/// `reflectivity = None` gives every round trip the same amplitude. A fraction
/// `coherence` of each scheme interferes; the rest adds incoherently.
pub fn brute_force_schemes(j: usize, tune_phase: f64, reflectivity: Option<f64>, coherence: f64) -> Result<f64> {
    if j > BRUTE_FORCE_MAX_J {
        return Err(Error::Domain(format!(
            "brute-force enumeration is limited to j <= {BRUTE_FORCE_MAX_J}, got {j}"
        )));
    }
    if !(0.0..=1.0).contains(&coherence) {
        return Err(Error::Domain(format!("coherence must lie in [0, 1], got {coherence}")));
    }
    let packets: Vec<Complex64> = match reflectivity {
        Some(r) => {
            let etalon = EtalonSpec {
                enabled: true,
                reflectivity: r,
                round_trip_time: 1.0,
                tune_phase,
            };
            let mut train: Vec<Complex64> = etalon_impulse_train(&etalon, j + 1)
                .map_err(|e| Error::Domain(e.to_string()))?
                .into_iter()
                .map(|p| p.amplitude)
                .collect();
            train.resize(j + 1, Complex64::new(0.0, 0.0));
            train
        }
        None => (0..=j)
            .map(|m| Complex64::from_polar(1.0, m as f64 * tune_phase))
            .collect(),
    };

    let mut coincidences = 0.0;
    let mut distinguishable = 0.0;
    for m in 0..=j {
        // Signal after m round trips, both photons reflected at the
        // beamsplitter; or after j - m round trips, both transmitted.
        let reflected = packets[m];
        let transmitted = -packets[j - m];
        let coherent = (reflected + transmitted).norm_sqr();
        let incoherent = reflected.norm_sqr() + transmitted.norm_sqr();
        coincidences += coherence * coherent + (1.0 - coherence) * incoherent;
        distinguishable += incoherent;
    }
    if distinguishable == 0.0 {
        return Ok(1.0);
    }
    Ok(coincidences / distinguishable)
}

/// High reflectivity and a long pump: the regime in which the comb-state
/// picture is quantitatively meaningful. Experimental filters and etalon
/// geometry, `δφ = 0`.
pub fn high_r_reference_setup() -> OpticalSetup {
    let mut setup = OpticalSetup::experiment(0.0);
    setup.etalon.reflectivity = 0.98;
    setup.pump = PumpSpec {
        duration_fwhm: 20.0,
        ..setup.pump
    };
    setup
}

/// A grid that resolves the narrow comb lines and pump band of
/// [`high_r_reference_setup`].
pub fn high_r_reference_grid() -> FrequencyGrid {
    FrequencyGrid::for_setup(&high_r_reference_setup(), 8192, 5.0)
        .expect("reference grid is valid")
}
