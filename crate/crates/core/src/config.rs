//! Run configuration: flat `key = value` text with dotted section keys.
//!
//! ```text
//! # comments start with '#'
//! preset = fig3a                  # starting point, applied first (default fig3a)
//! etalon.reflectivity = 0.9
//! etalon.tune_phase = pi/2        # rad; accepts pi, pi/N, X*pi
//! sweep.steps = 600
//! ```
//!
//! | key | unit |
//! |-----|------|
//! | `spdc.center_wavelength` | nm |
//! | `pump.center_wavelength`, `pump.duration_fwhm` | nm, ps |
//! | `phase_matching.model` | `flat` or `sinc` |
//! | `phase_matching.crystal_length` | mm |
//! | `phase_matching.sum_coefficient`, `phase_matching.difference_coefficient` | ps/mm |
//! | `filter.center_wavelength`, `filter.fwhm` | nm |
//! | `etalon.enabled` | `true` or `false` |
//! | `etalon.reflectivity` | |
//! | `etalon.round_trip_time` | ps |
//! | `etalon.spacing`, `etalon.incidence_angle` | μm, rad (alternative to `round_trip_time`) |
//! | `etalon.tune_phase` | rad |
//! | `grid.points`, `grid.span_sigma` | count, filter σ |
//! | `sweep.tau_start`, `sweep.tau_end`, `sweep.steps` | ps, ps, count |
//! | `engine` | `direct`, `fft` or `both` |
//! | `output.path`, `output.format` | path, `csv` or `json` |
//!
//! Unknown and repeated keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DelaySweep, FrequencyGrid, DEFAULT_POINTS, DEFAULT_SPAN_SIGMA};
use crate::setup::{self, OpticalSetup, PhaseMatchingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineSelection {
    Direct,
    Fft,
    Both,
}

impl FromStr for EngineSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(EngineSelection::Direct),
            "fft" => Ok(EngineSelection::Fft),
            "both" => Ok(EngineSelection::Both),
            other => Err(format!("expected direct, fft or both, got `{other}`")),
        }
    }
}

impl fmt::Display for EngineSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineSelection::Direct => "direct",
            EngineSelection::Fft => "fft",
            EngineSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("expected csv or json, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub points: usize,
    /// Half-width in filter intensity standard deviations.
    pub span_sigma: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            points: DEFAULT_POINTS,
            span_sigma: DEFAULT_SPAN_SIGMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub setup: OpticalSetup,
    pub grid: GridSettings,
    pub sweep: DelaySweep,
    pub engine: EngineSelection,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        Ok(RunConfig {
            preset: Some(name.to_string()),
            setup: OpticalSetup::preset(name)?,
            grid: GridSettings::default(),
            sweep: DelaySweep::default(),
            engine: EngineSelection::Fft,
            output: None,
            format: OutputFormat::Csv,
        })
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::for_setup(&self.setup, self.grid.points, self.grid.span_sigma)
    }

    /// Runs every component validation.
    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        self.sweep.validate()?;
        self.frequency_grid()?.check_setup(&self.setup)
    }
}

/// Parses and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            key: Some(self.key.to_string()),
            message: message.into(),
        }
    }

    fn number(&self) -> Result<f64> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.error(format!("expected a number, got `{}`", self.value)))?;
        if !v.is_finite() {
            return Err(self.error("value must be finite"));
        }
        Ok(v)
    }

    fn count(&self) -> Result<usize> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("expected a non-negative integer, got `{}`", self.value)))
    }

    fn flag(&self) -> Result<bool> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(self.error(format!("expected true or false, got `{v}`"))),
        }
    }

    fn angle(&self) -> Result<f64> {
        parse_angle(self.value).ok_or_else(|| self.error(format!("expected an angle in rad, got `{}`", self.value)))
    }

    fn choice<T: FromStr<Err = String>>(&self) -> Result<T> {
        self.value.parse().map_err(|e: String| self.error(e))
    }
}

/// Angles may be plain numbers or multiples of pi: `pi`, `pi/2`, `0.25*pi`, `-pi/4`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, text),
    };
    let (factor, rest) = match body.split_once('*') {
        Some((f, r)) => (f.trim().parse::<f64>().ok()?, r.trim()),
        None => (1.0, body),
    };
    let rest = rest.strip_prefix("pi")?.trim();
    let divisor = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')?.trim().parse::<f64>().ok()?
    };
    let v = sign * factor * std::f64::consts::PI / divisor;
    v.is_finite().then_some(v)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: Vec<Entry> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            key: None,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line,
                key: (!key.is_empty()).then(|| key.to_string()),
                message: "key and value must both be non-empty".to_string(),
            });
        }
        if let Some(previous) = entries.iter().find(|e| e.key == key) {
            return Err(Error::Parse {
                line,
                key: Some(key.to_string()),
                message: format!("duplicate key, first set on line {}", previous.line),
            });
        }
        entries.push(Entry { line, key, value });
    }
    if entries.is_empty() {
        return Err(Error::Parse {
            line: 0,
            key: None,
            message: "configuration is empty".to_string(),
        });
    }

    let mut config = match entries.iter().find(|e| e.key == "preset") {
        Some(e) => RunConfig::from_preset(e.value).map_err(|err| e.error(err.to_string()))?,
        None => RunConfig::from_preset("fig3a")?,
    };
    if !entries.iter().any(|e| e.key == "preset") {
        config.preset = None;
    }

    let mut spacing = None;
    let mut incidence_angle = 0.0;
    let mut round_trip_time_set = false;
    for e in &entries {
        let s = &mut config.setup;
        match e.key {
            "preset" => {}
            "spdc.center_wavelength" => s.spdc_center_wavelength = e.number()?,
            "pump.center_wavelength" => s.pump.center_wavelength = e.number()?,
            "pump.duration_fwhm" => s.pump.duration_fwhm = e.number()?,
            "phase_matching.model" => {
                s.phase_matching.model = match e.value {
                    "flat" => PhaseMatchingModel::Flat,
                    "sinc" => PhaseMatchingModel::Sinc,
                    v => return Err(e.error(format!("expected flat or sinc, got `{v}`"))),
                }
            }
            "phase_matching.crystal_length" => s.phase_matching.crystal_length = e.number()?,
            "phase_matching.sum_coefficient" => s.phase_matching.sum_coefficient = e.number()?,
            "phase_matching.difference_coefficient" => {
                s.phase_matching.difference_coefficient = e.number()?
            }
            "filter.center_wavelength" => s.filter.center_wavelength = e.number()?,
            "filter.fwhm" => s.filter.fwhm = e.number()?,
            "etalon.enabled" => s.etalon.enabled = e.flag()?,
            "etalon.reflectivity" => s.etalon.reflectivity = e.number()?,
            "etalon.round_trip_time" => {
                s.etalon.round_trip_time = e.number()?;
                round_trip_time_set = true;
            }
            "etalon.spacing" => spacing = Some((e.line, e.number()?)),
            "etalon.incidence_angle" => incidence_angle = e.angle()?,
            "etalon.tune_phase" => s.etalon.tune_phase = e.angle()?,
            "grid.points" => config.grid.points = e.count()?,
            "grid.span_sigma" => config.grid.span_sigma = e.number()?,
            "sweep.tau_start" => config.sweep.start = e.number()?,
            "sweep.tau_end" => config.sweep.end = e.number()?,
            "sweep.steps" => config.sweep.steps = e.count()?,
            "engine" => config.engine = e.choice()?,
            "output.path" => config.output = Some(PathBuf::from(e.value)),
            "output.format" => config.format = e.choice()?,
            _ => return Err(e.error("unknown key")),
        }
    }
    if let Some((line, spacing)) = spacing {
        if round_trip_time_set {
            return Err(Error::Parse {
                line,
                key: Some("etalon.spacing".to_string()),
                message: "set either etalon.spacing or etalon.round_trip_time, not both".to_string(),
            });
        }
        if !(spacing > 0.0) {
            return Err(Error::config("EtalonSpec", "mirror spacing must be positive"));
        }
        config.setup.etalon.round_trip_time = setup::round_trip_time(spacing, incidence_angle);
    }

    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    #[test]
    fn preset_loads_experimental_values() {
        let c = parse_config("preset = fig3a\n").unwrap();
        assert_eq!(c.preset.as_deref(), Some("fig3a"));
        let s = c.setup;
        assert_eq!(s.etalon.tune_phase, 0.0);
        assert_eq!(s.etalon.reflectivity, 0.9);
        assert!((s.etalon.fsr() - 1.5).abs() < 0.0075);
        assert_eq!(s.filter.fwhm, 10.0);
        assert_eq!(s.pump.duration_fwhm, 1.4);
        assert_eq!(s.spdc_center_wavelength, 786.0);
        assert_eq!(s.pump.center_wavelength, 393.0);
        assert_eq!(c.sweep, DelaySweep::default());
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("# only a comment\n\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn reflectivity_one_names_the_etalon() {
        let err = parse_config("preset = fig3a\netalon.reflectivity = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { component: "EtalonSpec", .. }), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let err = parse_config("preset = hom\netalon.reflectivty = 0.5\n").unwrap_err();
        match err {
            Error::Parse { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key.as_deref(), Some("etalon.reflectivty"));
            }
            other => panic!("{other}"),
        }
        let err = parse_config("filter.fwhm = 5\nfilter.fwhm = 6\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_config("just words\n").is_err());
        assert!(parse_config("grid.points = many\n").is_err());
    }

    #[test]
    fn overrides_and_angles() {
        let c = parse_config(
            "# custom\npreset = fig3a\netalon.tune_phase = pi/2  # quarter FSR\n\
             etalon.spacing = 50\nengine = both\noutput.format = json\nsweep.steps = 11\n",
        )
        .unwrap();
        assert_eq!(c.setup.etalon.tune_phase, FRAC_PI_2);
        assert!((c.setup.etalon.round_trip_time - 0.5 * OpticalSetup::preset("fig3a").unwrap().etalon.round_trip_time).abs() < 1e-12);
        assert_eq!(c.engine, EngineSelection::Both);
        assert_eq!(c.format, OutputFormat::Json);
        assert_eq!(c.sweep.steps, 11);
        assert!(parse_config("etalon.spacing = 50\netalon.round_trip_time = 1\n").is_err());
    }

    #[test]
    fn angle_syntax() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("-pi/4"), Some(-PI / 4.0));
        assert_eq!(parse_angle("0.5*pi"), Some(0.5 * PI));
        assert_eq!(parse_angle("1.25"), Some(1.25));
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn invalid_sweep_is_rejected() {
        let err = parse_config("sweep.tau_start = 2\nsweep.tau_end = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { component: "DelaySweep", .. }));
        let err = parse_config("grid.points = 1000\ngrid.points_extra = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
