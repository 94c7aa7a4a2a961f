//! Comb-state picture of the recurrent features.
//!
//! At an idler delay `τ_j = jT/2` there are `j + 1` detector firing schemes.
//! In scheme `m` one two-photon amplitude has the signal photon making `m`
//! etalon round trips and the other `j - m`; the two differ in phase by
//! `(j - 2m) δφ` and carry the beamsplitter's relative minus sign. Schemes add
//! incoherently; the amplitudes within a scheme interfere.
//!
//! Amplitudes are weighted by `w_m = R^m` (or all equal in the high-reflectivity
//! limit). A finite pump coherence time reduces the interfering fraction of each
//! scheme to `γ_j = exp(-(jT/2)² / (2 τ_c²))`. The normalized rate is
//!
//! ```text
//! r_j = Σ_m [w_m² + w_{j-m}² - 2 γ_j w_m w_{j-m} cos((j - 2m) δφ)] / Σ_m [w_m² + w_{j-m}²]
//! ```
//!
//! which equals `Σ_m |w_m - e^{i(j-2m)δφ} w_{j-m}|² / Σ_m (w_m² + w_{j-m}²)` for
//! a fully coherent pump.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the band around 1 classified as flat.
pub const FLAT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Dip,
    Peak,
    Flat,
}

impl Classification {
    pub fn of(relative_rate: f64, tolerance: f64) -> Self {
        if relative_rate < 1.0 - tolerance {
            Classification::Dip
        } else if relative_rate > 1.0 + tolerance {
            Classification::Peak
        } else {
            Classification::Flat
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Dip => "dip",
            Classification::Peak => "peak",
            Classification::Flat => "flat",
        })
    }
}

/// Amplitude weights of successive etalon round trips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SchemeWeights {
    /// Every round trip carries the same amplitude.
    Equal,
    /// Mirror reflectivity `R`; round trip `m` carries `(1 - R) R^m`.
    Reflectivity(f64),
}

impl SchemeWeights {
    fn validate(&self) -> Result<()> {
        match *self {
            SchemeWeights::Equal => Ok(()),
            SchemeWeights::Reflectivity(r) if (0.0..1.0).contains(&r) => Ok(()),
            SchemeWeights::Reflectivity(r) => {
                Err(Error::Domain(format!("reflectivity must lie in [0, 1), got {r}")))
            }
        }
    }

    /// Amplitude after `m` round trips.
    pub fn amplitude(&self, m: usize) -> f64 {
        match *self {
            SchemeWeights::Equal => 1.0,
            SchemeWeights::Reflectivity(r) => (1.0 - r) * r.powi(m as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringScheme {
    pub j: usize,
    pub m: usize,
    /// `(j - 2m) δφ`, rad.
    pub phase_difference: f64,
    /// Amplitudes of the `m` and `j - m` round-trip paths.
    pub weight_pair: (f64, f64),
}

pub fn enumerate_schemes(j: usize, tune_phase: f64, weights: SchemeWeights) -> Result<Vec<FiringScheme>> {
    weights.validate()?;
    if !tune_phase.is_finite() {
        return Err(Error::Domain("tune phase must be finite".to_string()));
    }
    Ok((0..=j)
        .map(|m| FiringScheme {
            j,
            m,
            phase_difference: (j as f64 - 2.0 * m as f64) * tune_phase,
            weight_pair: (weights.amplitude(m), weights.amplitude(j - m)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePrediction {
    pub j: usize,
    /// `jT/2`, ps.
    pub delay: f64,
    /// 1 is the flat baseline.
    pub relative_rate: f64,
    pub classification: Classification,
    pub pump_coherence_factor: f64,
}

/// Parameters of the comb-state model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeynmanModel {
    /// δφ, rad.
    pub tune_phase: f64,
    pub weights: SchemeWeights,
    /// Pump coherence time, ps; `None` for a monochromatic pump.
    pub pump_coherence_time: Option<f64>,
    /// Etalon round-trip time, ps.
    pub round_trip_time: f64,
    pub flat_tolerance: f64,
}

impl FeynmanModel {
    /// Equal weights and an infinitely coherent pump.
    pub fn ideal(tune_phase: f64, round_trip_time: f64) -> Self {
        FeynmanModel {
            tune_phase,
            weights: SchemeWeights::Equal,
            pump_coherence_time: None,
            round_trip_time,
            flat_tolerance: FLAT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if !self.tune_phase.is_finite() {
            return Err(Error::Domain("tune phase must be finite".to_string()));
        }
        if !(self.round_trip_time > 0.0 && self.round_trip_time.is_finite()) {
            return Err(Error::Domain("round-trip time must be positive".to_string()));
        }
        if let Some(tc) = self.pump_coherence_time {
            if !(tc > 0.0) {
                return Err(Error::Domain("pump coherence time must be positive".to_string()));
            }
        }
        if !(self.flat_tolerance >= 0.0) {
            return Err(Error::Domain("flat tolerance must be non-negative".to_string()));
        }
        Ok(())
    }

    pub fn delay(&self, j: usize) -> f64 {
        0.5 * j as f64 * self.round_trip_time
    }

    pub fn coherence_factor(&self, j: usize) -> f64 {
        match self.pump_coherence_time {
            None => 1.0,
            Some(tc) if tc.is_infinite() => 1.0,
            Some(tc) => {
                let x = self.delay(j) / tc;
                (-0.5 * x * x).exp()
            }
        }
    }

    pub fn relative_rate(&self, j: usize) -> Result<FeaturePrediction> {
        self.validate()?;
        let gamma = self.coherence_factor(j);
        let mut total = 0.0;
        let mut interference = 0.0;
        for scheme in enumerate_schemes(j, self.tune_phase, self.weights)? {
            let (a, b) = scheme.weight_pair;
            total += a * a + b * b;
            interference += 2.0 * a * b * scheme.phase_difference.cos();
        }
        let relative_rate = if total > 0.0 {
            (1.0 - gamma * interference / total).max(0.0)
        } else {
            1.0
        };
        Ok(FeaturePrediction {
            j,
            delay: self.delay(j),
            relative_rate,
            classification: Classification::of(relative_rate, self.flat_tolerance),
            pump_coherence_factor: gamma,
        })
    }

    pub fn skeleton(&self, j_max: usize) -> Result<Vec<FeaturePrediction>> {
        (0..=j_max).map(|j| self.relative_rate(j)).collect()
    }
}

pub fn relative_rate(
    j: usize,
    tune_phase: f64,
    weights: SchemeWeights,
    pump_coherence_time: Option<f64>,
    round_trip_time: f64,
) -> Result<FeaturePrediction> {
    FeynmanModel {
        tune_phase,
        weights,
        pump_coherence_time,
        round_trip_time,
        flat_tolerance: FLAT_TOLERANCE,
    }
    .relative_rate(j)
}

pub fn predict_trace_skeleton(
    tune_phase: f64,
    weights: SchemeWeights,
    pump_coherence_time: Option<f64>,
    round_trip_time: f64,
    j_max: usize,
) -> Result<Vec<FeaturePrediction>> {
    FeynmanModel {
        tune_phase,
        weights,
        pump_coherence_time,
        round_trip_time,
        flat_tolerance: FLAT_TOLERANCE,
    }
    .skeleton(j_max)
}
