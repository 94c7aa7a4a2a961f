//! Command-line front end: `sweep`, `predict` and `verify`.
//!
//! Flags override values from `--config`; `--preset` replaces the config file
//! as the starting point. Exit codes: 0 success, 1 validation or config error,
//! 2 numerical-consistency failure, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{load_config, parse_angle, EngineSelection, OutputFormat, RunConfig};
use crate::engine::{
    convergence_report, CoincidenceEngine, CoincidenceTrace, EnginePath, Fault,
    PATH_AGREEMENT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::feynman::{FeaturePrediction, FeynmanModel, SchemeWeights, FLAT_TOLERANCE};
use crate::output::{csv_string, json_string, write_trace, GridMetadata, RunMetadata};
use crate::setup::OpticalSetup;
use crate::verify::{run_checks, CheckResult};

#[derive(Debug, Parser)]
#[command(name = "hom-comb", version, about = "Coincidence traces of an HOM interferometer with an etalon in the signal arm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a normalized coincidence trace over a delay sweep.
    Sweep(SweepArgs),
    /// Tabulate the comb-model feature at each τ_j = jT/2.
    Predict(PredictArgs),
    /// Run the oracle suite.
    Verify,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Configuration file (`key = value`).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// fig3a, fig3b, fig3c or hom.
    #[arg(long)]
    pub preset: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> Result<RunConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path),
            (None, Some(name)) => RunConfig::from_preset(name),
            (None, None) => RunConfig::from_preset("fig3a"),
        }
    }

    fn given(&self) -> bool {
        self.config.is_some() || self.preset.is_some()
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// ps
    #[arg(long, allow_negative_numbers = true)]
    pub tau_start: Option<f64>,
    /// ps
    #[arg(long, allow_negative_numbers = true)]
    pub tau_end: Option<f64>,
    /// Number of delays, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Points per frequency axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Grid half-width in filter standard deviations.
    #[arg(long)]
    pub span_sigma: Option<f64>,
    /// direct, fft or both.
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<EngineSelection>))]
    pub engine: Option<EngineSelection>,
    /// Output file; the trace goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv (with a .meta.json sidecar) or json.
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<OutputFormat>))]
    pub format: Option<OutputFormat>,
}

impl SweepArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut config = self.source.load()?;
        if let Some(v) = self.tau_start {
            config.sweep.start = v;
        }
        if let Some(v) = self.tau_end {
            config.sweep.end = v;
        }
        if let Some(v) = self.steps {
            config.sweep.steps = v;
        }
        if let Some(v) = self.grid {
            config.grid.points = v;
        }
        if let Some(v) = self.span_sigma {
            config.grid.span_sigma = v;
        }
        if let Some(v) = self.engine {
            config.engine = v;
        }
        if let Some(v) = &self.out {
            config.output = Some(v.clone());
        }
        if let Some(v) = self.format {
            config.format = v;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Seeds δφ, R, T and the pump coherence time from a setup.
    #[command(flatten)]
    pub source: SourceArgs,
    /// δφ, rad; accepts pi, pi/N, X*pi.
    #[arg(long, allow_negative_numbers = true, value_parser = clap::builder::ValueParser::new(angle))]
    pub tune_phase: Option<f64>,
    /// Mirror reflectivity R for w_m = R^m weights.
    #[arg(long, conflicts_with = "equal_weights")]
    pub reflectivity: Option<f64>,
    /// Give every round trip the same amplitude.
    #[arg(long)]
    pub equal_weights: bool,
    /// Pump coherence time, ps; `inf` for a monochromatic pump.
    #[arg(long)]
    pub coherence_time: Option<f64>,
    /// Etalon round-trip time T, ps.
    #[arg(long)]
    pub round_trip_time: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub j_max: usize,
    #[arg(long, default_value_t = FLAT_TOLERANCE)]
    pub flat_tolerance: f64,
    /// Machine-readable output instead of a table.
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<OutputFormat>))]
    pub format: Option<OutputFormat>,
}

fn angle(text: &str) -> std::result::Result<f64, String> {
    parse_angle(text).ok_or_else(|| format!("expected an angle such as 1.57 or pi/2, got `{text}`"))
}

impl PredictArgs {
    /// Without a setup: δφ = 0, equal weights, infinite coherence and the
    /// experimental round-trip time.
    pub fn to_model(&self) -> Result<FeynmanModel> {
        let mut model = if self.source.given() {
            let setup = self.source.load()?.setup;
            if !setup.etalon.enabled {
                return Err(Error::config("EtalonSpec", "predictions need an enabled etalon"));
            }
            FeynmanModel {
                weights: SchemeWeights::Reflectivity(setup.etalon.reflectivity),
                pump_coherence_time: Some(setup.pump.coherence_time()),
                ..FeynmanModel::ideal(setup.etalon.tune_phase, setup.etalon.round_trip_time)
            }
        } else {
            FeynmanModel::ideal(0.0, OpticalSetup::experiment(0.0).etalon.round_trip_time)
        };
        if let Some(v) = self.tune_phase {
            model.tune_phase = v;
        }
        if let Some(r) = self.reflectivity {
            model.weights = SchemeWeights::Reflectivity(r);
        }
        if self.equal_weights {
            model.weights = SchemeWeights::Equal;
        }
        if let Some(tc) = self.coherence_time {
            model.pump_coherence_time = (!tc.is_infinite()).then_some(tc);
        }
        if let Some(t) = self.round_trip_time {
            model.round_trip_time = t;
        }
        model.flat_tolerance = self.flat_tolerance;
        model.validate()?;
        Ok(model)
    }
}

/// Result of a sweep, before or after it is written.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub trace: CoincidenceTrace,
    pub metadata: RunMetadata,
    pub files: Vec<PathBuf>,
}

/// Runs the configured engine path(s) and the convergence self-test. Nothing
/// is written.
pub fn compute_sweep(config: &RunConfig) -> Result<(CoincidenceTrace, RunMetadata)> {
    config.validate()?;
    let grid = config.frequency_grid()?;
    let engine = CoincidenceEngine::new(&config.setup, &grid)?;
    let (trace, path_delta) = match config.engine {
        EngineSelection::Direct => (engine.sweep(&config.sweep, EnginePath::Direct)?, None),
        EngineSelection::Fft => (engine.sweep(&config.sweep, EnginePath::Fft)?, None),
        EngineSelection::Both => {
            let direct = engine.sweep(&config.sweep, EnginePath::Direct)?;
            let fft = engine.sweep(&config.sweep, EnginePath::Fft)?;
            let delta = direct.sup_distance(&fft);
            if delta > PATH_AGREEMENT_TOLERANCE {
                return Err(Error::Consistency {
                    check: "engine paths",
                    detail: format!(
                        "direct and fft traces differ by {delta:.3e} (tol {PATH_AGREEMENT_TOLERANCE:.0e})"
                    ),
                });
            }
            (direct, Some(delta))
        }
    };
    let convergence = convergence_report(&config.setup, &config.sweep, &grid);
    let mut warnings = trace.warnings.clone();
    if !convergence.passed {
        warnings.push(format!(
            "convergence self-test failed: refined delta {:.3e}, widened delta {:.3e} (tol {:.0e})",
            convergence.refined_delta, convergence.widened_delta, convergence.tolerance
        ));
    }
    let metadata = RunMetadata {
        preset: config.preset.clone(),
        setup: config.setup,
        grid: GridMetadata {
            points: grid.points(),
            span: grid.span(),
            spacing: grid.spacing(),
        },
        sweep: config.sweep,
        engine: config.engine,
        path: trace.path,
        baseline_rate: trace.baseline_rate,
        convergence_warning: !convergence.passed,
        convergence,
        path_delta,
        warnings,
    };
    Ok((trace, metadata))
}

/// [`compute_sweep`], then writes the configured output file (and sidecar).
pub fn run_sweep(config: &RunConfig) -> Result<SweepOutcome> {
    let (trace, metadata) = compute_sweep(config)?;
    let files = match &config.output {
        Some(path) => write_trace(path, config.format, &trace, &metadata)?,
        None => Vec::new(),
    };
    Ok(SweepOutcome { trace, metadata, files })
}

pub fn run_predict(model: &FeynmanModel, j_max: usize) -> Result<Vec<FeaturePrediction>> {
    model.skeleton(j_max)
}

pub fn prediction_table(predictions: &[FeaturePrediction]) -> String {
    let mut out = format!("{:>3}  {:>10}  {:>13}  {}\n", "j", "tau_j_ps", "relative_rate", "class");
    for p in predictions {
        out.push_str(&format!(
            "{:>3}  {:>10.6}  {:>13.6}  {}\n",
            p.j, p.delay, p.relative_rate, p.classification
        ));
    }
    out
}

fn prediction_csv(predictions: &[FeaturePrediction]) -> String {
    let mut out = String::from("j,tau_ps,relative_rate,classification,pump_coherence_factor\n");
    for p in predictions {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.j, p.delay, p.relative_rate, p.classification, p.pump_coherence_factor
        ));
    }
    out
}

#[derive(Serialize)]
struct PredictionReport<'a> {
    model: &'a FeynmanModel,
    predictions: &'a [FeaturePrediction],
}

/// All oracle checks; `Ok` only when every one passes.
pub fn run_verify() -> (Vec<CheckResult>, Result<()>) {
    let checks = run_checks(Fault::None);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let status = if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Consistency {
            check: "verify",
            detail: format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", ")),
        })
    };
    (checks, status)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: Path::new("<stdout>").to_path_buf(),
        source,
    })
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let config = args.to_config()?;
            let outcome = run_sweep(&config)?;
            if config.output.is_none() {
                let text = match config.format {
                    OutputFormat::Csv => csv_string(&outcome.trace),
                    OutputFormat::Json => json_string(&outcome.trace, &outcome.metadata),
                };
                emit(out, &text)?;
            }
            let c = &outcome.metadata.convergence;
            let _ = writeln!(
                err,
                "convergence: {} (refined {:.2e}, widened {:.2e}, tol {:.0e})",
                if c.passed { "ok" } else { "FAILED" },
                c.refined_delta,
                c.widened_delta,
                c.tolerance
            );
            if let Some(delta) = outcome.metadata.path_delta {
                let _ = writeln!(err, "direct vs fft sup delta: {delta:.3e}");
            }
            for w in &outcome.metadata.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            for f in &outcome.files {
                let _ = writeln!(err, "wrote {}", f.display());
            }
            Ok(())
        }
        Command::Predict(args) => {
            let model = args.to_model()?;
            let predictions = run_predict(&model, args.j_max)?;
            let text = match args.format {
                None => prediction_table(&predictions),
                Some(OutputFormat::Csv) => prediction_csv(&predictions),
                Some(OutputFormat::Json) => {
                    let mut s = serde_json::to_string_pretty(&PredictionReport {
                        model: &model,
                        predictions: &predictions,
                    })
                    .expect("predictions serialize");
                    s.push('\n');
                    s
                }
            };
            emit(out, &text)
        }
        Command::Verify => {
            let (checks, status) = run_verify();
            for c in &checks {
                emit(out, &format!("{c}\n"))?;
            }
            status
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
