//! Spectral elements of the setup and the joint spectral amplitude of the pair.
//!
//! Every function takes angular detunings in rad/ps. Detunings of single
//! photons are measured from the degenerate center ω0, sum detunings from 2ω0.

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::grid::FrequencyGrid;
use crate::setup::{self, EtalonSpec, FilterSpec, OpticalSetup, PhaseMatchingModel, PhaseMatchingSpec, PumpSpec};

/// Pump field envelope at a sum detuning measured from the pump center.
/// Real, positive, unit peak.
pub fn pump_envelope(sum_detuning: f64, pump: &PumpSpec) -> Result<Complex64> {
    ensure_finite("sum detuning", sum_detuning)?;
    let sigma = pump.spectral_sigma();
    let x = sum_detuning / sigma;
    Ok(Complex64::new((-0.5 * x * x).exp(), 0.0))
}

/// Phase-matching factor `sinc(x) exp(-ix)` with `x = Δk L / 2`.
pub fn phase_matching(sum_detuning: f64, diff_detuning: f64, pm: &PhaseMatchingSpec) -> Result<Complex64> {
    ensure_finite("sum detuning", sum_detuning)?;
    ensure_finite("difference detuning", diff_detuning)?;
    match pm.model {
        PhaseMatchingModel::Flat => Ok(Complex64::new(1.0, 0.0)),
        PhaseMatchingModel::Sinc => {
            let half_mismatch = 0.5
                * pm.crystal_length
                * (pm.sum_coefficient * sum_detuning + pm.difference_coefficient * diff_detuning);
            Ok(sinc(half_mismatch) * Complex64::from_polar(1.0, -half_mismatch))
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Field transmission of the interference filter at a detuning from its center.
/// The intensity transmission `f^2` is a unit-peak Gaussian with the filter's FWHM.
pub fn filter_amplitude(detuning: f64, filter: &FilterSpec) -> Result<f64> {
    ensure_finite("detuning", detuning)?;
    let sigma = filter.intensity_sigma();
    Ok((-0.25 * detuning * detuning / (sigma * sigma)).exp())
}

/// Complex field transmission of the etalon.
///
/// The round-trip phase is `(detuning - comb_anchor) * T + δφ`, so with `δφ = 0`
/// a transmission maximum sits at `comb_anchor` (the filter center). The
/// returned value is `(1 - R) e^{iφ/2} / (1 - R e^{iφ})`; the single-pass
/// factor makes it anti-periodic over one FSR while `|f_e|` is periodic.
pub fn etalon_transfer(detuning: f64, etalon: &EtalonSpec, comb_anchor: f64) -> Result<Complex64> {
    ensure_finite("detuning", detuning)?;
    if !etalon.enabled {
        return Ok(Complex64::new(1.0, 0.0));
    }
    etalon.validate()?;
    let phase = (detuning - comb_anchor) * etalon.round_trip_time + etalon.reduced_tune_phase();
    Ok(etalon_transfer_at_phase(phase, etalon.reflectivity))
}

/// `(1 - R) e^{iφ/2} / (1 - R e^{iφ})` at round-trip phase `φ`.
pub(crate) fn etalon_transfer_at_phase(phase: f64, reflectivity: f64) -> Complex64 {
    let numerator = Complex64::from_polar(1.0 - reflectivity, 0.5 * phase);
    let denominator = Complex64::new(1.0, 0.0) - Complex64::from_polar(reflectivity, phase);
    numerator / denominator
}

/// Etalon built from its mirror spacing (μm) and internal incidence angle (rad).
pub fn etalon_from_geometry(spacing: f64, incidence_angle: f64, reflectivity: f64) -> Result<EtalonSpec> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::config("EtalonSpec", "mirror spacing must be positive"));
    }
    let round_trip_time = setup::round_trip_time(spacing, incidence_angle);
    let etalon = EtalonSpec {
        enabled: true,
        reflectivity,
        round_trip_time,
        tune_phase: 0.0,
    };
    etalon.validate()?;
    Ok(etalon)
}

/// Joint spectral amplitude sampled on a [`FrequencyGrid`], normalized to unit
/// peak magnitude.
///
/// The pump factor depends only on the sum of the two node indices and is
/// stored as a `2N - 1` profile; the phase-matching factor is stored densely
/// when it is not identically one.
#[derive(Debug, Clone)]
pub struct JointSpectralAmplitude {
    grid: FrequencyGrid,
    pump: Vec<f64>,
    phase_matching: Option<Vec<Complex64>>,
    scale: f64,
}

impl JointSpectralAmplitude {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// True when the amplitude is a function of the sum detuning alone.
    pub fn depends_on_sum_only(&self) -> bool {
        self.phase_matching.is_none()
    }

    /// Normalized pump factor indexed by `signal_index + idler_index`.
    pub fn sum_profile(&self) -> impl Iterator<Item = f64> + '_ {
        self.pump.iter().map(move |p| p * self.scale)
    }

    #[inline]
    pub fn amplitude(&self, signal: usize, idler: usize) -> Complex64 {
        let pump = self.pump[signal + idler] * self.scale;
        match &self.phase_matching {
            None => Complex64::new(pump, 0.0),
            Some(pm) => pm[signal * self.grid.points() + idler] * pump,
        }
    }
}

/// Samples `pump_envelope(ν_s + ν_i) * phase_matching(ν_s + ν_i, ν_s - ν_i)`.
pub fn build_jsa(setup: &OpticalSetup, grid: &FrequencyGrid) -> Result<JointSpectralAmplitude> {
    setup.validate()?;
    let n = grid.points();
    if n <= 1 {
        return Err(Error::config("FrequencyGrid", "grid needs more than one point per axis"));
    }
    let pump_center = setup.pump_detuning();
    let pump = (0..2 * n - 1)
        .map(|k| pump_envelope(grid.sum_node(k) - pump_center, &setup.pump).map(|c| c.re))
        .collect::<Result<Vec<_>>>()?;

    let phase_matching = match setup.phase_matching.model {
        PhaseMatchingModel::Flat => None,
        PhaseMatchingModel::Sinc => {
            let nodes = grid.nodes();
            let mut values = Vec::with_capacity(n * n);
            for &vs in &nodes {
                for &vi in &nodes {
                    values.push(phase_matching(vs + vi, vs - vi, &setup.phase_matching)?);
                }
            }
            Some(values)
        }
    };

    let peak = match &phase_matching {
        None => pump.iter().cloned().fold(0.0, f64::max),
        Some(pm) => {
            let mut peak = 0.0f64;
            for s in 0..n {
                for i in 0..n {
                    peak = peak.max(pump[s + i] * pm[s * n + i].norm());
                }
            }
            peak
        }
    };
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Domain(
            "joint spectral amplitude vanishes on the grid".to_string(),
        ));
    }
    Ok(JointSpectralAmplitude {
        grid: *grid,
        pump,
        phase_matching,
        scale: 1.0 / peak,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::setup::PhaseMatchingModel;

    fn fig3_etalon() -> EtalonSpec {
        OpticalSetup::preset("fig3a").unwrap().etalon
    }

    fn sinc_pm(sum_coefficient: f64, difference_coefficient: f64) -> PhaseMatchingSpec {
        PhaseMatchingSpec {
            model: PhaseMatchingModel::Sinc,
            crystal_length: 3.0,
            sum_coefficient,
            difference_coefficient,
        }
    }

    #[test]
    fn pump_envelope_peak_and_symmetry() {
        let pump = OpticalSetup::preset("fig3a").unwrap().pump;
        assert_eq!(pump_envelope(0.0, &pump).unwrap(), Complex64::new(1.0, 0.0));
        for x in [0.1, 0.7, 1.9, 4.0] {
            assert_eq!(pump_envelope(x, &pump).unwrap(), pump_envelope(-x, &pump).unwrap());
        }
        // At one field standard deviation the envelope is e^{-1/2}.
        let s = pump.spectral_sigma();
        assert_relative_eq!(pump_envelope(s, &pump).unwrap().re, (-0.5f64).exp(), epsilon = 1e-15);
        assert!(pump_envelope(f64::NAN, &pump).is_err());
    }

    #[test]
    fn pump_duration_and_bandwidth_are_transform_limited() {
        // |E(t)|^2 of the envelope's Fourier transform has the configured FWHM.
        let pump = PumpSpec { center_wavelength: 393.0, duration_fwhm: 1.4 };
        let s = pump.spectral_sigma();
        // E(t) ∝ exp(-s^2 t^2 / 2), so |E|^2 = 1/2 at t = sqrt(ln2)/s.
        let half = std::f64::consts::LN_2.sqrt() / s;
        assert_relative_eq!(2.0 * half, 1.4, epsilon = 1e-12);
    }

    #[test]
    fn phase_matching_limits() {
        let flat = PhaseMatchingSpec::flat();
        assert_eq!(phase_matching(3.0, -7.0, &flat).unwrap(), Complex64::new(1.0, 0.0));
        let pm = sinc_pm(0.5, 0.0);
        assert_eq!(phase_matching(0.0, 5.0, &pm).unwrap(), Complex64::new(1.0, 0.0));
        // x = 0.5 * 3 * 0.5 * sum = pi
        let sum = PI / 0.75;
        assert!(phase_matching(sum, 0.0, &pm).unwrap().norm() < 1e-15);
        let near = phase_matching(1e-9, 0.0, &pm).unwrap();
        assert_relative_eq!(near.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn filter_half_width() {
        let f = FilterSpec { center_wavelength: 786.0, fwhm: 10.0 };
        assert_eq!(filter_amplitude(0.0, &f).unwrap(), 1.0);
        let half = 0.5 * f.angular_fwhm();
        assert_relative_eq!(filter_amplitude(half, &f).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
        assert_eq!(filter_amplitude(half, &f).unwrap(), filter_amplitude(-half, &f).unwrap());
        // 2π · 4.852612 THz
        assert_relative_eq!(f.angular_fwhm(), TAU * 4.852_612_480_495_179, epsilon = 1e-9);
    }

    #[test]
    fn etalon_special_points() {
        let mut e = fig3_etalon();
        e.reflectivity = 0.0;
        for d in [-3.0, 0.1, 2.7, 40.0] {
            assert_relative_eq!(etalon_transfer(d, &e, 0.0).unwrap().norm(), 1.0, epsilon = 1e-15);
        }
        e.reflectivity = 0.9;
        assert_relative_eq!(etalon_transfer(0.0, &e, 0.0).unwrap().norm(), 1.0, epsilon = 1e-14);
        let anti = 0.5 * e.angular_fsr();
        let t = etalon_transfer(anti, &e, 0.0).unwrap();
        assert!((t.norm() - 0.1 / 1.9).abs() < 1e-12);
        // The anchor moves the comb.
        assert_relative_eq!(etalon_transfer(2.0, &e, 2.0).unwrap().norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn disabled_etalon_is_identity() {
        let e = EtalonSpec::disabled();
        assert_eq!(etalon_transfer(1.234, &e, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn invalid_reflectivity_rejected() {
        let mut e = fig3_etalon();
        e.reflectivity = 1.0;
        assert!(matches!(etalon_transfer(0.0, &e, 0.0), Err(Error::Config { .. })));
    }

    #[test]
    fn geometry_of_experimental_etalon() {
        let e = etalon_from_geometry(100.0, 0.0, 0.9).unwrap();
        assert!((e.round_trip_time - 0.667).abs() < 1e-3);
        // 1500 GHz within 0.5%
        assert!((e.fsr() - 1.5).abs() / 1.5 < 5e-3);
        let nm = crate::units::wavelength_width(786.0, e.fsr());
        assert!((nm - 3.1).abs() < 0.05, "{nm}");
        let half = etalon_from_geometry(50.0, 0.0, 0.9).unwrap();
        assert_relative_eq!(half.fsr(), 2.0 * e.fsr(), epsilon = 1e-12);
        assert!(etalon_from_geometry(0.0, 0.0, 0.9).is_err());
        assert!(etalon_from_geometry(-5.0, 0.0, 0.9).is_err());
    }

    #[test]
    fn jsa_flat_is_exchange_symmetric() {
        let setup = OpticalSetup::preset("fig3a").unwrap();
        let grid = FrequencyGrid::for_setup(&setup, 64, 5.0).unwrap();
        let jsa = build_jsa(&setup, &grid).unwrap();
        assert!(jsa.depends_on_sum_only());
        let mut peak = 0.0f64;
        for s in 0..64 {
            for i in 0..64 {
                assert_eq!(jsa.amplitude(s, i), jsa.amplitude(i, s));
                peak = peak.max(jsa.amplitude(s, i).norm());
            }
        }
        assert_eq!(peak, 1.0);
    }

    #[test]
    fn jsa_concentrates_on_anti_diagonal_for_long_pumps() {
        let mut setup = OpticalSetup::preset("hom").unwrap();
        let grid = FrequencyGrid::for_setup(&setup, 64, 5.0).unwrap();
        // Fixed off-anti-diagonal offset: s + i = 63 + 4.
        let off = |setup: &OpticalSetup| build_jsa(setup, &grid).unwrap().amplitude(40, 27).norm();
        setup.pump.duration_fwhm = 1.0;
        let short = off(&setup);
        setup.pump.duration_fwhm = 4.0;
        let long = off(&setup);
        assert!(long < short);
        assert_eq!(build_jsa(&setup, &grid).unwrap().amplitude(40, 23).norm(), 1.0);
    }

    #[test]
    fn jsa_sinc_is_peak_normalized() {
        let mut setup = OpticalSetup::preset("hom").unwrap();
        setup.phase_matching = sinc_pm(0.05, 0.02);
        let grid = FrequencyGrid::for_setup(&setup, 32, 5.0).unwrap();
        let jsa = build_jsa(&setup, &grid).unwrap();
        assert!(!jsa.depends_on_sum_only());
        let mut peak = 0.0f64;
        for s in 0..32 {
            for i in 0..32 {
                let a = jsa.amplitude(s, i);
                assert!(a.re.is_finite() && a.im.is_finite());
                peak = peak.max(a.norm());
            }
        }
        assert_relative_eq!(peak, 1.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn etalon_magnitude_bounded(r in 0.0f64..0.999, d in -200.0f64..200.0, phase in 0.0f64..TAU) {
            let e = EtalonSpec { enabled: true, reflectivity: r, round_trip_time: 0.667, tune_phase: phase };
            let t = etalon_transfer(d, &e, 0.0).unwrap();
            prop_assert!(t.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn etalon_magnitude_is_fsr_periodic(r in 0.0f64..0.99, d in -50.0f64..50.0, k in -5i32..5) {
            let e = EtalonSpec { enabled: true, reflectivity: r, round_trip_time: 0.667, tune_phase: 0.3 };
            let a = etalon_transfer(d, &e, 0.0).unwrap();
            let b = etalon_transfer(d + k as f64 * e.angular_fsr(), &e, 0.0).unwrap();
            prop_assert!((a.norm() - b.norm()).abs() < 1e-9);
            // The single-pass factor contributes (-1)^k.
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - b * sign).norm() < 1e-9);
        }

        #[test]
        fn filter_is_even(d in 0.0f64..100.0) {
            let f = FilterSpec { center_wavelength: 786.0, fwhm: 10.0 };
            prop_assert_eq!(filter_amplitude(d, &f).unwrap(), filter_amplitude(-d, &f).unwrap());
            prop_assert!(filter_amplitude(d, &f).unwrap() <= 1.0);
        }
    }
}
