//! Coincidence rate of the HOM interferometer with an etalon in the signal arm.
//!
//! With single-photon detunings `ν_s, ν_i`, filter intensity `F`, joint spectral
//! amplitude `φ` and etalon transmission `f_e`:
//!
//! ```text
//! R_c(τ) = 1/4 ∬ F(ν_s) F(ν_i) { |φ(ν_s,ν_i)|² |f_e(ν_s)|²
//!                              - φ(ν_s,ν_i) φ*(ν_i,ν_s) f_e(ν_s) f_e*(ν_i) e^{-i(ν_s-ν_i)τ} }
//! ```
//!
//! The first term is the baseline, the second the interference term. Both are
//! evaluated with the midpoint rule on a [`FrequencyGrid`]. The interference
//! term is either summed directly for each delay or collapsed onto the
//! anti-diagonal `u = ν_s - ν_i` once and transformed to all delays with a
//! chirp-z transform.
//!
//! The delay axis is calibrated so that the wavepacket that crosses the etalon
//! without a round trip meets the idler photon at `τ = 0`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirpz::chirp_z;
use crate::error::{Error, Result};
use crate::grid::{DelaySweep, FrequencyGrid};
use crate::setup::OpticalSetup;
use crate::spectral::{build_jsa, etalon_transfer, filter_amplitude, JointSpectralAmplitude};

/// Residues below this fraction of the baseline are treated as round-off.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;
/// Maximum normalized sup-norm deviation between the FFT and direct paths.
pub const PATH_AGREEMENT_TOLERANCE: f64 = 1e-6;
/// Sup-norm bound on normalized-trace changes under grid refinement.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

const ROWS_PER_TILE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnginePath {
    Direct,
    Fft,
}

impl fmt::Display for EnginePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnginePath::Direct => f.write_str("direct"),
            EnginePath::Fft => f.write_str("fft"),
        }
    }
}

/// Deliberate defects used to check that the verification suite catches them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Adds instead of subtracting the interference term.
    FlipCrossTermSign,
    /// Anchors the comb half an FSR away from the filter center.
    ShiftTunePhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub tau: f64,
    pub rate: f64,
    pub normalized_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTrace {
    pub samples: Vec<TraceSample>,
    /// The delay-independent term used for normalization.
    pub baseline_rate: f64,
    pub grid: FrequencyGrid,
    pub path: EnginePath,
    pub warnings: Vec<String>,
}

impl CoincidenceTrace {
    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.tau)
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.normalized_rate).collect()
    }

    /// Largest absolute difference between normalized rates of two traces on
    /// the same delays.
    pub fn sup_distance(&self, other: &CoincidenceTrace) -> f64 {
        assert_eq!(self.samples.len(), other.samples.len(), "traces differ in length");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.normalized_rate - b.normalized_rate).abs())
            .fold(0.0, f64::max)
    }
}

/// `φ(s,i) φ*(i,s)` and `|φ(s,i)|²` on the grid.
#[derive(Debug, Clone)]
enum Kernel {
    /// Both reduce to `|P(ν_s + ν_i)|²`, indexed by `s + i`.
    SumOnly(Vec<f64>),
    Dense {
        cross: Vec<Complex64>,
        intensity: Vec<f64>,
    },
}

impl Kernel {
    fn from_jsa(jsa: &JointSpectralAmplitude) -> Self {
        let n = jsa.grid().points();
        if jsa.depends_on_sum_only() {
            Kernel::SumOnly(jsa.sum_profile().map(|p| p * p).collect())
        } else {
            let mut cross = Vec::with_capacity(n * n);
            let mut intensity = Vec::with_capacity(n * n);
            for s in 0..n {
                for i in 0..n {
                    let a = jsa.amplitude(s, i);
                    cross.push(a * jsa.amplitude(i, s).conj());
                    intensity.push(a.norm_sqr());
                }
            }
            Kernel::Dense { cross, intensity }
        }
    }
}

/// Precomputed integrand for one setup on one grid.
#[derive(Debug, Clone)]
pub struct CoincidenceEngine {
    setup: OpticalSetup,
    grid: FrequencyGrid,
    nodes: Vec<f64>,
    /// `F(ν) f_e(ν)` on the signal axis.
    signal: Vec<Complex64>,
    kernel: Kernel,
    baseline: f64,
    delay_offset: f64,
    cross_sign: f64,
}

impl CoincidenceEngine {
    pub fn new(setup: &OpticalSetup, grid: &FrequencyGrid) -> Result<Self> {
        Self::build(setup, grid, Fault::None)
    }

    #[doc(hidden)]
    pub fn with_fault(setup: &OpticalSetup, grid: &FrequencyGrid, fault: Fault) -> Result<Self> {
        Self::build(setup, grid, fault)
    }

    fn build(setup: &OpticalSetup, grid: &FrequencyGrid, fault: Fault) -> Result<Self> {
        setup.validate()?;
        grid.check_setup(setup)?;
        if setup.etalon.enabled {
            let limit = setup.etalon.angular_fsr() / 8.0;
            if grid.spacing() > limit {
                return Err(Error::Resolution {
                    spacing: grid.spacing(),
                    limit,
                });
            }
        }
        let mut etalon = setup.etalon;
        if fault == Fault::ShiftTunePhase {
            etalon.tune_phase += std::f64::consts::PI;
        }

        let jsa = build_jsa(setup, grid)?;
        let nodes = grid.nodes();
        let filter_center = setup.filter_detuning();
        let mut filter = Vec::with_capacity(nodes.len());
        let mut etalon_power = Vec::with_capacity(nodes.len());
        let mut signal = Vec::with_capacity(nodes.len());
        for &nu in &nodes {
            let f = filter_amplitude(nu - filter_center, &setup.filter)?;
            let fe = etalon_transfer(nu, &etalon, filter_center)?;
            filter.push(f * f);
            etalon_power.push(fe.norm_sqr());
            signal.push(fe * (f * f));
        }
        let kernel = Kernel::from_jsa(&jsa);

        let n = nodes.len();
        let mut baseline = 0.0;
        for s in 0..n {
            let row: f64 = match &kernel {
                Kernel::SumOnly(p) => (0..n).map(|i| filter[i] * p[s + i]).sum(),
                Kernel::Dense { intensity, .. } => {
                    (0..n).map(|i| filter[i] * intensity[s * n + i]).sum()
                }
            };
            baseline += filter[s] * etalon_power[s] * row;
        }
        baseline *= Self::weight(grid);
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::Consistency {
                check: "baseline",
                detail: format!("baseline rate must be positive, got {baseline}"),
            });
        }

        Ok(CoincidenceEngine {
            setup: *setup,
            grid: *grid,
            nodes,
            signal,
            kernel,
            baseline,
            delay_offset: setup.etalon.transit_delay(),
            cross_sign: if fault == Fault::FlipCrossTermSign { -1.0 } else { 1.0 },
        })
    }

    fn weight(grid: &FrequencyGrid) -> f64 {
        let h = grid.spacing();
        0.25 * h * h
    }

    pub fn setup(&self) -> &OpticalSetup {
        &self.setup
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Delay-independent first term.
    pub fn baseline_rate(&self) -> f64 {
        self.baseline
    }

    /// Full complex value of the interference integral at delay `tau`. Its
    /// imaginary part vanishes analytically.
    pub fn interference_integral(&self, tau: f64) -> Complex64 {
        let n = self.nodes.len();
        let t = tau + self.delay_offset;
        let g: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(&self.signal)
            .map(|(&nu, a)| a * Complex64::from_polar(1.0, -nu * t))
            .collect();
        let g_conj: Vec<Complex64> = g.iter().map(|z| z.conj()).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        match &self.kernel {
            Kernel::SumOnly(p) => {
                for s in 0..n {
                    let row: Complex64 = p[s..s + n]
                        .iter()
                        .zip(&g_conj)
                        .map(|(&w, z)| z * w)
                        .sum();
                    acc += g[s] * row;
                }
            }
            Kernel::Dense { cross, .. } => {
                for s in 0..n {
                    let row: Complex64 = cross[s * n..(s + 1) * n]
                        .iter()
                        .zip(&g_conj)
                        .map(|(w, z)| z * w)
                        .sum();
                    acc += g[s] * row;
                }
            }
        }
        acc * Self::weight(&self.grid)
    }

    /// Real part of the interference integral, after the Hermiticity check.
    pub fn interference_term(&self, tau: f64) -> Result<f64> {
        self.checked_real(tau, self.interference_integral(tau))
    }

    fn checked_real(&self, tau: f64, value: Complex64) -> Result<f64> {
        let limit = CONSISTENCY_TOLERANCE * self.baseline;
        if value.im.abs() > limit {
            return Err(Error::Consistency {
                check: "interference term",
                detail: format!(
                    "imaginary residue {:.3e} at tau = {tau} ps exceeds {:.3e} (baseline {:.6e})",
                    value.im, limit, self.baseline
                ),
            });
        }
        Ok(value.re)
    }

    fn rate_from_interference(&self, tau: f64, interference: f64) -> Result<f64> {
        let rate = self.baseline - self.cross_sign * interference;
        let limit = CONSISTENCY_TOLERANCE * self.baseline;
        if rate < -limit {
            return Err(Error::Consistency {
                check: "coincidence rate",
                detail: format!(
                    "rate {rate:.6e} at tau = {tau} ps is below -{limit:.3e} (baseline {:.6e})",
                    self.baseline
                ),
            });
        }
        Ok(rate.max(0.0))
    }

    pub fn coincidence_rate(&self, tau: f64) -> Result<f64> {
        let interference = self.interference_term(tau)?;
        self.rate_from_interference(tau, interference)
    }

    pub fn normalized_rate(&self, tau: f64) -> Result<f64> {
        Ok(self.coincidence_rate(tau)? / self.baseline)
    }

    fn sample(&self, tau: f64, interference: Complex64) -> Result<TraceSample> {
        let re = self.checked_real(tau, interference)?;
        let rate = self.rate_from_interference(tau, re)?;
        Ok(TraceSample {
            tau,
            rate,
            normalized_rate: rate / self.baseline,
        })
    }

    fn trace(&self, samples: Vec<TraceSample>, path: EnginePath, warnings: Vec<String>) -> CoincidenceTrace {
        CoincidenceTrace {
            samples,
            baseline_rate: self.baseline,
            grid: self.grid,
            path,
            warnings,
        }
    }

    /// Evaluates every delay with the full 2D sum. Delays run in parallel;
    /// each delay is summed sequentially, so the output does not depend on
    /// the number of workers.
    pub fn sweep_direct(&self, sweep: &DelaySweep) -> Result<CoincidenceTrace> {
        sweep.validate()?;
        let samples = sweep
            .delays()
            .into_par_iter()
            .map(|tau| self.sample(tau, self.interference_integral(tau)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.trace(samples, EnginePath::Direct, Vec::new()))
    }

    /// `h(u)`: the interference integrand summed along lines of constant
    /// `u = ν_s - ν_i`, indexed by `s - i + N - 1`. Satisfies `h(-u) = h*(u)`.
    pub fn anti_diagonal_profile(&self) -> Vec<Complex64> {
        let n = self.nodes.len();
        let tiles = n.div_ceil(ROWS_PER_TILE);
        let partials: Vec<Vec<Complex64>> = (0..tiles)
            .into_par_iter()
            .map(|tile| {
                let mut h = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
                let rows = tile * ROWS_PER_TILE..((tile + 1) * ROWS_PER_TILE).min(n);
                for s in rows {
                    let a = self.signal[s];
                    // index s - i + n - 1 runs downward from s + n - 1 as i grows.
                    let out = &mut h[s..s + n];
                    match &self.kernel {
                        Kernel::SumOnly(p) => {
                            for i in 0..n {
                                out[n - 1 - i] += a * self.signal[i].conj() * p[s + i];
                            }
                        }
                        Kernel::Dense { cross, .. } => {
                            let row = &cross[s * n..(s + 1) * n];
                            for i in 0..n {
                                out[n - 1 - i] += a * self.signal[i].conj() * row[i];
                            }
                        }
                    }
                }
                h
            })
            .collect();
        let mut h = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for partial in &partials {
            for (acc, v) in h.iter_mut().zip(partial) {
                *acc += v;
            }
        }
        h
    }

    /// All delays at once from the anti-diagonal profile. A few delays are
    /// re-evaluated directly; on disagreement the whole sweep falls back to
    /// the direct path and the trace records a warning.
    pub fn sweep_fft(&self, sweep: &DelaySweep) -> Result<CoincidenceTrace> {
        sweep.validate()?;
        let n = self.nodes.len();
        let h = self.anti_diagonal_profile();
        let spacing = self.grid.spacing();
        let start = sweep.start + self.delay_offset;
        let step = sweep.step();
        let transformed = chirp_z(&h, spacing * start, spacing * step, sweep.steps);
        let weight = Self::weight(&self.grid);
        let delays = sweep.delays();
        let samples = delays
            .iter()
            .zip(&transformed)
            .enumerate()
            .map(|(k, (&tau, x))| {
                // Undo the index shift u = (index - (N - 1)) * spacing.
                let shifted = start + k as f64 * step;
                let phase = (n - 1) as f64 * spacing * shifted;
                self.sample(tau, x * Complex64::from_polar(1.0, phase) * weight)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut probes = vec![0, sweep.steps / 2, sweep.steps - 1];
        probes.dedup();
        let mut mismatch = 0.0f64;
        for &k in &probes {
            let direct = self.sample(delays[k], self.interference_integral(delays[k]))?;
            mismatch = mismatch.max((direct.normalized_rate - samples[k].normalized_rate).abs());
        }
        if mismatch > PATH_AGREEMENT_TOLERANCE {
            let mut trace = self.sweep_direct(sweep)?;
            trace.warnings.push(format!(
                "fft path disagreed with direct quadrature by {mismatch:.3e}; used direct path"
            ));
            return Ok(trace);
        }
        Ok(self.trace(samples, EnginePath::Fft, Vec::new()))
    }

    pub fn sweep(&self, sweep: &DelaySweep, path: EnginePath) -> Result<CoincidenceTrace> {
        match path {
            EnginePath::Direct => self.sweep_direct(sweep),
            EnginePath::Fft => self.sweep_fft(sweep),
        }
    }
}

pub fn baseline_rate(setup: &OpticalSetup, grid: &FrequencyGrid) -> Result<f64> {
    Ok(CoincidenceEngine::new(setup, grid)?.baseline_rate())
}

pub fn interference_term(setup: &OpticalSetup, grid: &FrequencyGrid, tau: f64) -> Result<f64> {
    CoincidenceEngine::new(setup, grid)?.interference_term(tau)
}

pub fn coincidence_rate(setup: &OpticalSetup, grid: &FrequencyGrid, tau: f64) -> Result<f64> {
    CoincidenceEngine::new(setup, grid)?.coincidence_rate(tau)
}

pub fn sweep_direct(setup: &OpticalSetup, grid: &FrequencyGrid, sweep: &DelaySweep) -> Result<CoincidenceTrace> {
    CoincidenceEngine::new(setup, grid)?.sweep_direct(sweep)
}

pub fn sweep_fft(setup: &OpticalSetup, grid: &FrequencyGrid, sweep: &DelaySweep) -> Result<CoincidenceTrace> {
    CoincidenceEngine::new(setup, grid)?.sweep_fft(sweep)
}

/// Sensitivity of a normalized trace to the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub grid: FrequencyGrid,
    /// Sup-norm change with twice the points per axis.
    pub refined_delta: f64,
    /// Sup-norm change with 1.5× the span at the same spacing.
    pub widened_delta: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Why a grid could not be evaluated, if any.
    pub note: Option<String>,
}

fn even_at_least(x: f64) -> usize {
    let n = x.ceil() as usize;
    n + n % 2
}

/// Recomputes the trace on a refined and on a widened grid (FFT path) and
/// compares normalized rates.
pub fn convergence_report(setup: &OpticalSetup, sweep: &DelaySweep, grid: &FrequencyGrid) -> ConvergenceReport {
    let failed = |note: String| ConvergenceReport {
        grid: *grid,
        refined_delta: f64::INFINITY,
        widened_delta: f64::INFINITY,
        tolerance: CONVERGENCE_TOLERANCE,
        passed: false,
        note: Some(note),
    };
    let trace_on = |g: &FrequencyGrid| -> Result<CoincidenceTrace> {
        CoincidenceEngine::new(setup, g)?.sweep_fft(sweep)
    };
    let widened_points = even_at_least(1.5 * grid.points() as f64);
    let grids = FrequencyGrid::new(2 * grid.points(), grid.span()).and_then(|refined| {
        FrequencyGrid::new(widened_points, grid.span() * widened_points as f64 / grid.points() as f64)
            .map(|widened| (refined, widened))
    });
    let (refined, widened) = match grids {
        Ok(g) => g,
        Err(e) => return failed(e.to_string()),
    };
    let traces = trace_on(grid).and_then(|base| {
        Ok((base.clone(), trace_on(&refined)?, trace_on(&widened)?))
    });
    match traces {
        Ok((base, fine, wide)) => {
            let refined_delta = base.sup_distance(&fine);
            let widened_delta = base.sup_distance(&wide);
            ConvergenceReport {
                grid: *grid,
                refined_delta,
                widened_delta,
                tolerance: CONVERGENCE_TOLERANCE,
                passed: refined_delta < CONVERGENCE_TOLERANCE && widened_delta < CONVERGENCE_TOLERANCE,
                note: None,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}
