//! The oracle suite behind `hom-comb verify`.
//!
//! Every check returns a [`CheckResult`] whose detail names the measured
//! value, the expected value and the tolerance. Engine-backed checks accept a
//! [`Fault`] so tests can confirm that a broken engine is caught.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rayon::prelude::*;

use crate::engine::{
    convergence_report, CoincidenceEngine, EnginePath, Fault, CONSISTENCY_TOLERANCE,
    PATH_AGREEMENT_TOLERANCE,
};
use crate::error::Result;
use crate::feynman::{relative_rate, Classification, FeynmanModel, SchemeWeights};
use crate::grid::{DelaySweep, FrequencyGrid};
use crate::oracles::{
    brute_force_schemes, high_r_reference_grid, high_r_reference_setup, hom_closed_form,
    impulse_train_power_limit, mean_transmission_over_fsr,
};
use crate::setup::{OpticalSetup, EXPERIMENT_ETALON_SPACING, PRESETS};
use crate::spectral::{etalon_from_geometry, etalon_transfer};

pub const FSR_TARGET_HZ: f64 = 1.5e12;
pub const FSR_RELATIVE_TOLERANCE: f64 = 5e-3;
pub const ANTI_RESONANCE_TOLERANCE: f64 = 1e-12;
pub const PARSEVAL_TOLERANCE: f64 = 1e-6;
pub const HOM_ORACLE_TOLERANCE: f64 = 1e-3;
pub const HOM_CENTER_LIMIT: f64 = 0.05;
pub const BRUTE_FORCE_TOLERANCE: f64 = 1e-12;
/// A Flat prediction is confirmed when the engine stays this close to 1.
pub const CROSS_MODEL_FLAT_BAND: f64 = 0.05;
pub const CROSS_MODEL_MAX_J: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<CheckResult>) -> Self {
        r.unwrap_or_else(|e| CheckResult::new(name, false, format!("error: {e}")))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn default_engine(setup: &OpticalSetup, fault: Fault) -> Result<CoincidenceEngine> {
    CoincidenceEngine::with_fault(setup, &FrequencyGrid::default_for(setup)?, fault)
}

/// FSR of the d = 100 μm, normal-incidence etalon against 1500 GHz.
pub fn check_fsr() -> CheckResult {
    CheckResult::from_result(
        "etalon FSR",
        (|| {
            let etalon = etalon_from_geometry(EXPERIMENT_ETALON_SPACING, 0.0, 0.9)?;
            let fsr = etalon.fsr() * 1e12;
            let rel = (fsr - FSR_TARGET_HZ).abs() / FSR_TARGET_HZ;
            Ok(CheckResult::new(
                "etalon FSR",
                rel < FSR_RELATIVE_TOLERANCE,
                format!(
                    "{:.4} GHz vs {:.1} GHz, relative error {rel:.2e} (tol {FSR_RELATIVE_TOLERANCE:.1e})",
                    fsr * 1e-9,
                    FSR_TARGET_HZ * 1e-9
                ),
            ))
        })(),
    )
}

/// `|f_e|` half an FSR from resonance equals `(1 - R) / (1 + R)`.
pub fn check_anti_resonance() -> CheckResult {
    CheckResult::from_result(
        "etalon anti-resonance",
        (|| {
            let mut worst = 0.0f64;
            for r in [0.0, 0.5, 0.9, 0.98] {
                for name in ["fig3a", "fig3b", "fig3c"] {
                    let mut etalon = OpticalSetup::preset(name)?.etalon;
                    etalon.reflectivity = r;
                    let detuning = (PI - etalon.tune_phase) / etalon.round_trip_time;
                    let got = etalon_transfer(detuning, &etalon, 0.0)?.norm();
                    worst = worst.max((got - (1.0 - r) / (1.0 + r)).abs());
                }
            }
            Ok(CheckResult::new(
                "etalon anti-resonance",
                worst <= ANTI_RESONANCE_TOLERANCE,
                format!("max |f_e| error {worst:.2e} (tol {ANTI_RESONANCE_TOLERANCE:.0e})"),
            ))
        })(),
    )
}

/// Mean `|f_e|²` over one FSR against the impulse-train intensity sum.
pub fn check_parseval() -> CheckResult {
    CheckResult::from_result(
        "Parseval",
        (|| {
            let mut worst = 0.0f64;
            for r in [0.0, 0.5, 0.9, 0.98] {
                let mut etalon = OpticalSetup::preset("fig3c")?.etalon;
                etalon.reflectivity = r;
                let mean = mean_transmission_over_fsr(&etalon, 8192)?;
                worst = worst.max((mean - impulse_train_power_limit(r)).abs());
            }
            Ok(CheckResult::new(
                "Parseval",
                worst <= PARSEVAL_TOLERANCE,
                format!("max |mean |f_e|^2 - (1-R)/(1+R)| = {worst:.2e} (tol {PARSEVAL_TOLERANCE:.0e})"),
            ))
        })(),
    )
}

/// Bare HOM trace against the Gaussian closed form over [-3, 3] ps.
pub fn check_hom_closed_form(fault: Fault) -> CheckResult {
    let name = "closed-form HOM";
    CheckResult::from_result(
        name,
        (|| {
            let setup = OpticalSetup::preset("hom")?;
            let engine = default_engine(&setup, fault)?;
            let trace = engine.sweep_fft(&DelaySweep::new(-3.0, 3.0, 601)?)?;
            let mut sup = 0.0f64;
            for s in &trace.samples {
                sup = sup.max((s.normalized_rate - hom_closed_form(&setup, s.tau)?).abs());
            }
            let center = engine.normalized_rate(0.0)?;
            Ok(CheckResult::new(
                name,
                sup <= HOM_ORACLE_TOLERANCE && center < HOM_CENTER_LIMIT,
                format!(
                    "sup |engine - closed form| = {sup:.2e} (tol {HOM_ORACLE_TOLERANCE:.0e}); \
                     normalized(0) = {center:.3e} (expected < {HOM_CENTER_LIMIT})"
                ),
            ))
        })(),
    )
}

/// The comb-state formula against explicit enumeration.
pub fn check_brute_force() -> CheckResult {
    let name = "comb model vs brute force";
    CheckResult::from_result(
        name,
        (|| {
            let mut worst = 0.0f64;
            let mut cases = 0usize;
            let weights = [
                SchemeWeights::Equal,
                SchemeWeights::Reflectivity(0.9),
                SchemeWeights::Reflectivity(0.5),
            ];
            let coherence_times = [None, Some(2.0), Some(0.5)];
            let t = OpticalSetup::preset("fig3a")?.etalon.round_trip_time;
            for w in weights {
                let r = match w {
                    SchemeWeights::Equal => None,
                    SchemeWeights::Reflectivity(r) => Some(r),
                };
                for tc in coherence_times {
                    for j in 0..=8 {
                        for k in 0..16 {
                            let phase = 2.0 * PI * k as f64 / 16.0;
                            let model = relative_rate(j, phase, w, tc, t)?;
                            let brute = brute_force_schemes(j, phase, r, model.pump_coherence_factor)?;
                            worst = worst.max((model.relative_rate - brute).abs());
                            cases += 1;
                        }
                    }
                }
            }
            let pinned = [
                (2, FRAC_PI_2, 4.0 / 3.0),
                (1, PI, 2.0),
                (0, 0.0, 0.0),
                (3, 0.0, 0.0),
                (7, 0.0, 0.0),
            ];
            let mut pinned_worst = 0.0f64;
            for (j, phase, expected) in pinned {
                let got = relative_rate(j, phase, SchemeWeights::Equal, None, t)?.relative_rate;
                pinned_worst = pinned_worst.max((got - expected).abs());
            }
            Ok(CheckResult::new(
                name,
                worst <= BRUTE_FORCE_TOLERANCE && pinned_worst <= BRUTE_FORCE_TOLERANCE,
                format!(
                    "max deviation {worst:.2e} over {cases} cases, pinned values off by {pinned_worst:.2e} \
                     (tol {BRUTE_FORCE_TOLERANCE:.0e})"
                ),
            ))
        })(),
    )
}

/// FFT and direct sweeps of one preset on the default grid.
pub fn check_paths_agree(preset: &str, fault: Fault) -> CheckResult {
    let name = format!("fft vs direct ({preset})");
    CheckResult::from_result(
        &name,
        (|| {
            let engine = default_engine(&OpticalSetup::preset(preset)?, fault)?;
            let sweep = DelaySweep::default();
            let fft = engine.sweep(&sweep, EnginePath::Fft)?;
            let direct = engine.sweep(&sweep, EnginePath::Direct)?;
            let sup = fft.sup_distance(&direct);
            let fell_back = fft.path != EnginePath::Fft;
            Ok(CheckResult::new(
                name.clone(),
                sup <= PATH_AGREEMENT_TOLERANCE && !fell_back,
                format!(
                    "sup delta {sup:.2e} (tol {PATH_AGREEMENT_TOLERANCE:.0e}){}",
                    if fell_back { "; fft path fell back to direct" } else { "" }
                ),
            ))
        })(),
    )
}

/// Grid refinement and span widening on one preset.
pub fn check_convergence(preset: &str) -> CheckResult {
    let name = format!("convergence ({preset})");
    CheckResult::from_result(
        &name,
        (|| {
            let setup = OpticalSetup::preset(preset)?;
            let report = convergence_report(&setup, &DelaySweep::default(), &FrequencyGrid::default_for(&setup)?);
            Ok(CheckResult::new(
                name.clone(),
                report.passed,
                format!(
                    "refined delta {:.2e}, widened delta {:.2e} (tol {:.0e}){}",
                    report.refined_delta,
                    report.widened_delta,
                    report.tolerance,
                    report.note.map(|n| format!("; {n}")).unwrap_or_default()
                ),
            ))
        })(),
    )
}

/// Largest `|Im I(τ)| / baseline` of the direct interference integral over a sweep.
pub fn max_imaginary_residue(engine: &CoincidenceEngine, sweep: &DelaySweep) -> f64 {
    sweep
        .delays()
        .par_iter()
        .map(|&tau| engine.interference_integral(tau).im.abs())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
        / engine.baseline_rate()
}

pub fn check_imaginary_residue(preset: &str) -> CheckResult {
    let name = format!("imaginary residue ({preset})");
    CheckResult::from_result(
        &name,
        (|| {
            let engine = default_engine(&OpticalSetup::preset(preset)?, Fault::None)?;
            let residue = max_imaginary_residue(&engine, &DelaySweep::default());
            Ok(CheckResult::new(
                name.clone(),
                residue < CONSISTENCY_TOLERANCE,
                format!("max |Im| / baseline = {residue:.2e} (tol {CONSISTENCY_TOLERANCE:.0e})"),
            ))
        })(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossModelPoint {
    pub tune_phase: f64,
    pub j: usize,
    pub predicted: Classification,
    pub engine_normalized: f64,
    pub agrees: bool,
}

fn agrees(predicted: Classification, normalized: f64) -> bool {
    match predicted {
        Classification::Dip => normalized < 1.0,
        Classification::Peak => normalized > 1.0,
        Classification::Flat => (normalized - 1.0).abs() < CROSS_MODEL_FLAT_BAND,
    }
}

/// Engine at `τ_j` on the high-reflectivity reference setup against the comb
/// model with matching weights and pump coherence time.
pub fn cross_model_points(tune_phase: f64, fault: Fault) -> Result<Vec<CrossModelPoint>> {
    let mut setup = high_r_reference_setup();
    setup.etalon.tune_phase = tune_phase;
    let model = FeynmanModel {
        weights: SchemeWeights::Reflectivity(setup.etalon.reflectivity),
        pump_coherence_time: Some(setup.pump.coherence_time()),
        ..FeynmanModel::ideal(tune_phase, setup.etalon.round_trip_time)
    };
    let engine = CoincidenceEngine::with_fault(&setup, &high_r_reference_grid(), fault)?;
    let sweep = DelaySweep::new(0.0, model.delay(CROSS_MODEL_MAX_J), CROSS_MODEL_MAX_J + 1)?;
    let trace = engine.sweep_fft(&sweep)?;
    (0..=CROSS_MODEL_MAX_J)
        .map(|j| {
            let predicted = model.relative_rate(j)?.classification;
            let engine_normalized = trace.samples[j].normalized_rate;
            Ok(CrossModelPoint {
                tune_phase,
                j,
                predicted,
                engine_normalized,
                agrees: agrees(predicted, engine_normalized),
            })
        })
        .collect()
}

pub const CROSS_MODEL_PHASES: [f64; 3] = [0.0, FRAC_PI_2, PI];

pub fn check_cross_model(fault: Fault) -> CheckResult {
    let name = "engine vs comb model";
    CheckResult::from_result(
        name,
        (|| {
            let mut mismatches = Vec::new();
            let mut total = 0;
            for phase in CROSS_MODEL_PHASES {
                for p in cross_model_points(phase, fault)? {
                    total += 1;
                    if !p.agrees {
                        mismatches.push(format!(
                            "dphi={:.4} j={}: predicted {}, engine {:.4}",
                            p.tune_phase, p.j, p.predicted, p.engine_normalized
                        ));
                    }
                }
            }
            let detail = if mismatches.is_empty() {
                format!("{total}/{total} classifications agree (flat band {CROSS_MODEL_FLAT_BAND})")
            } else {
                format!(
                    "{} of {total} disagree (flat band {CROSS_MODEL_FLAT_BAND}): {}",
                    mismatches.len(),
                    mismatches.join("; ")
                )
            };
            Ok(CheckResult::new(name, mismatches.is_empty(), detail))
        })(),
    )
}

/// The full suite, in a fixed order.
pub fn run_checks(fault: Fault) -> Vec<CheckResult> {
    let mut out = vec![
        check_fsr(),
        check_anti_resonance(),
        check_parseval(),
        check_hom_closed_form(fault),
        check_brute_force(),
    ];
    for preset in PRESETS {
        out.push(check_paths_agree(preset, fault));
    }
    for preset in PRESETS {
        out.push(check_convergence(preset));
    }
    for preset in PRESETS {
        out.push(check_imaginary_residue(preset));
    }
    out.push(check_cross_model(fault));
    out
}
