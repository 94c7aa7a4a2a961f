//! Acceptance criteria, one line per criterion. Tolerances are pinned here.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hom_comb::cli::compute_sweep;
use hom_comb::config::{EngineSelection, RunConfig};
use hom_comb::engine::{convergence_report, CoincidenceEngine, EnginePath};
use hom_comb::feynman::{relative_rate, SchemeWeights};
use hom_comb::grid::{DelaySweep, FrequencyGrid};
use hom_comb::oracles::{brute_force_schemes, hom_closed_form, impulse_train_power_limit, mean_transmission_over_fsr};
use hom_comb::output::csv_string;
use hom_comb::setup::{OpticalSetup, PRESETS};
use hom_comb::spectral::{etalon_from_geometry, etalon_transfer};
use hom_comb::verify::{cross_model_points, max_imaginary_residue, CROSS_MODEL_PHASES};
use hom_comb::CoincidenceTrace;

const POSITION_TOLERANCE: f64 = 0.02;
const FIG3A_MIN_DEPTH: f64 = 0.2;
const FIG3A_RUNTIME: Duration = Duration::from_secs(10);
const FIG3C_FLAT_BAND: f64 = 0.05;
const HOM_SUP_TOLERANCE: f64 = 1e-3;
const HOM_CENTER_LIMIT: f64 = 0.05;
const FEYNMAN_TOLERANCE: f64 = 1e-12;
const PATH_TOLERANCE: f64 = 1e-6;
const CONVERGENCE_TOLERANCE: f64 = 1e-4;
const RESIDUE_TOLERANCE: f64 = 1e-9;
const FSR_TARGET_GHZ: f64 = 1500.0;
const FSR_RELATIVE_TOLERANCE: f64 = 5e-3;
const ANTI_RESONANCE_TOLERANCE: f64 = 1e-12;
const PARSEVAL_TOLERANCE: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn preset_trace(name: &str) -> (CoincidenceTrace, f64) {
    let setup = OpticalSetup::preset(name).unwrap();
    let grid = FrequencyGrid::default_for(&setup).unwrap();
    let engine = CoincidenceEngine::new(&setup, &grid).unwrap();
    let trace = engine.sweep_fft(&DelaySweep::default()).unwrap();
    (trace, setup.etalon.round_trip_time)
}

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Min,
    Max,
}

/// The strict local extremum of the requested kind closest to `target`.
fn nearest_extremum(trace: &CoincidenceTrace, target: f64, kind: Extremum) -> Option<(f64, f64)> {
    let s = &trace.samples;
    (1..s.len() - 1)
        .filter(|&k| {
            let (a, b, c) = (s[k - 1].normalized_rate, s[k].normalized_rate, s[k + 1].normalized_rate);
            match kind {
                Extremum::Min => b < a && b < c,
                Extremum::Max => b > a && b > c,
            }
        })
        .map(|k| (s[k].tau, s[k].normalized_rate))
        .min_by(|x, y| (x.0 - target).abs().total_cmp(&(y.0 - target).abs()))
}

fn describe(found: Option<(f64, f64)>) -> String {
    match found {
        Some((tau, v)) => format!("{tau:.4} ps ({v:.4})"),
        None => "none".to_string(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (trace, t) = preset_trace("fig3a");
    let elapsed = start.elapsed();
    let mut passed = elapsed < FIG3A_RUNTIME;
    let mut depths = Vec::new();
    let mut positions = Vec::new();
    for j in 0..=4 {
        let target = 0.5 * j as f64 * t;
        let found = nearest_extremum(&trace, target, Extremum::Min);
        match found {
            Some((tau, v)) if (tau - target).abs() <= POSITION_TOLERANCE => depths.push(1.0 - v),
            _ => {
                passed = false;
                depths.push(f64::NAN);
            }
        }
        positions.push(describe(found));
    }
    let decreasing = depths.windows(2).all(|w| w[1] < w[0]);
    passed &= decreasing && depths[0] > FIG3A_MIN_DEPTH;
    outcome(
        passed,
        format!(
            "minima {}; depths {:?} (need strictly decreasing, depth0 > {FIG3A_MIN_DEPTH}); fft sweep {:.2} s (limit {} s)",
            positions.join(", "),
            depths.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>(),
            elapsed.as_secs_f64(),
            FIG3A_RUNTIME.as_secs()
        ),
    )
}

fn criterion_2() -> Outcome {
    let (trace, t) = preset_trace("fig3b");
    let mut passed = true;
    let mut notes = Vec::new();
    for j in 0..=4 {
        let target = 0.5 * j as f64 * t;
        let kind = if j % 2 == 0 { Extremum::Min } else { Extremum::Max };
        let found = nearest_extremum(&trace, target, kind);
        let ok = match found {
            Some((tau, v)) => {
                (tau - target).abs() <= POSITION_TOLERANCE && (kind == Extremum::Min || v > 1.0)
            }
            None => false,
        };
        passed &= ok;
        let label = if kind == Extremum::Min { "min" } else { "max" };
        notes.push(format!("j={j} {label} {}", describe(found)));
    }
    outcome(passed, notes.join(", "))
}

fn criterion_3() -> Outcome {
    let setup = OpticalSetup::preset("fig3c").unwrap();
    let t = setup.etalon.round_trip_time;
    let engine = CoincidenceEngine::new(&setup, &FrequencyGrid::default_for(&setup).unwrap()).unwrap();
    let at = |j: usize| engine.normalized_rate(0.5 * j as f64 * t).unwrap();
    let (trace, _) = preset_trace("fig3c");
    let dip = nearest_extremum(&trace, 0.0, Extremum::Min);
    let dip_ok = matches!(dip, Some((tau, v)) if tau.abs() <= POSITION_TOLERANCE && v < 1.0);
    let (r1, r2, r3) = (at(1), at(2), at(3));
    let passed = dip_ok
        && (r1 - 1.0).abs() < FIG3C_FLAT_BAND
        && (r3 - 1.0).abs() < FIG3C_FLAT_BAND
        && r2 > 1.0;
    outcome(
        passed,
        format!(
            "j=0 min {}; r(tau_1) = {r1:.4}, r(tau_3) = {r3:.4} (within {FIG3C_FLAT_BAND} of 1); r(tau_2) = {r2:.4} (> 1)",
            describe(dip)
        ),
    )
}

fn criterion_4() -> Outcome {
    let setup = OpticalSetup::preset("hom").unwrap();
    let engine = CoincidenceEngine::new(&setup, &FrequencyGrid::default_for(&setup).unwrap()).unwrap();
    let trace = engine.sweep_fft(&DelaySweep::new(-3.0, 3.0, 1201).unwrap()).unwrap();
    let sup = trace
        .samples
        .iter()
        .map(|s| (s.normalized_rate - hom_closed_form(&setup, s.tau).unwrap()).abs())
        .fold(0.0, f64::max);
    let center = engine.normalized_rate(0.0).unwrap();
    outcome(
        sup <= HOM_SUP_TOLERANCE && center < HOM_CENTER_LIMIT,
        format!(
            "sup |engine - closed form| = {sup:.2e} (tol {HOM_SUP_TOLERANCE:.0e}); r(0) = {center:.2e} (< {HOM_CENTER_LIMIT})"
        ),
    )
}

fn criterion_5() -> Outcome {
    let t = OpticalSetup::preset("fig3a").unwrap().etalon.round_trip_time;
    let mut worst = 0.0f64;
    for (weights, r) in [
        (SchemeWeights::Equal, None),
        (SchemeWeights::Reflectivity(0.9), Some(0.9)),
        (SchemeWeights::Reflectivity(0.5), Some(0.5)),
    ] {
        for j in 0..=8 {
            for k in 0..16 {
                let phase = 2.0 * PI * k as f64 / 16.0;
                let model = relative_rate(j, phase, weights, None, t).unwrap().relative_rate;
                let brute = brute_force_schemes(j, phase, r, 1.0).unwrap();
                worst = worst.max((model - brute).abs());
            }
        }
    }
    let eq = |j, phase| relative_rate(j, phase, SchemeWeights::Equal, None, t).unwrap().relative_rate;
    let r2 = eq(2, FRAC_PI_2);
    let r1 = eq(1, PI);
    let zero = (0..=8).map(|j| eq(j, 0.0).abs()).fold(0.0, f64::max);
    let passed = worst <= FEYNMAN_TOLERANCE
        && (r2 - 4.0 / 3.0).abs() <= FEYNMAN_TOLERANCE
        && (r1 - 2.0).abs() <= FEYNMAN_TOLERANCE
        && zero <= FEYNMAN_TOLERANCE;
    outcome(
        passed,
        format!(
            "max |model - brute force| = {worst:.2e} (tol {FEYNMAN_TOLERANCE:.0e}); r(2, pi/2) = {r2}, r(1, pi) = {r1}, max |r(j, 0)| = {zero:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut total = 0;
    let mut misses = Vec::new();
    for phase in CROSS_MODEL_PHASES {
        for p in cross_model_points(phase, Default::default()).unwrap() {
            total += 1;
            if !p.agrees {
                misses.push(format!(
                    "dphi={:.3} j={} predicted {} engine {:.4}",
                    p.tune_phase, p.j, p.predicted, p.engine_normalized
                ));
            }
        }
    }
    let detail = if misses.is_empty() {
        format!("{total}/{total} classifications agree")
    } else {
        format!("{} mismatches: {}", misses.len(), misses.join("; "))
    };
    outcome(misses.is_empty(), detail)
}

fn criterion_7() -> Outcome {
    let sweep = DelaySweep::default();
    let mut passed = true;
    let mut notes = Vec::new();
    for name in PRESETS {
        let setup = OpticalSetup::preset(name).unwrap();
        let grid = FrequencyGrid::default_for(&setup).unwrap();
        let engine = CoincidenceEngine::new(&setup, &grid).unwrap();
        let fft = engine.sweep(&sweep, EnginePath::Fft).unwrap();
        let direct = engine.sweep(&sweep, EnginePath::Direct).unwrap();
        let path_delta = fft.sup_distance(&direct);
        let report = convergence_report(&setup, &sweep, &grid);
        let residue = max_imaginary_residue(&engine, &sweep);
        passed &= fft.path == EnginePath::Fft
            && path_delta <= PATH_TOLERANCE
            && report.refined_delta < CONVERGENCE_TOLERANCE
            && report.widened_delta < CONVERGENCE_TOLERANCE
            && residue < RESIDUE_TOLERANCE;
        notes.push(format!(
            "{name}: paths {path_delta:.1e}, refined {:.1e}, widened {:.1e}, |Im|/B {residue:.1e}",
            report.refined_delta, report.widened_delta
        ));
    }
    notes.push(format!(
        "tol {PATH_TOLERANCE:.0e} / {CONVERGENCE_TOLERANCE:.0e} / {RESIDUE_TOLERANCE:.0e}"
    ));
    outcome(passed, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let etalon = etalon_from_geometry(100.0, 0.0, 0.9).unwrap();
    let fsr_ghz = etalon.fsr() * 1e3;
    let fsr_err = (fsr_ghz - FSR_TARGET_GHZ).abs() / FSR_TARGET_GHZ;
    let mut anti = 0.0f64;
    let mut parseval = 0.0f64;
    for r in [0.0, 0.5, 0.9, 0.98] {
        let mut e = etalon;
        e.reflectivity = r;
        for phase in [0.0, FRAC_PI_2, PI] {
            e.tune_phase = phase;
            let detuning = (PI - phase) / e.round_trip_time;
            anti = anti.max((etalon_transfer(detuning, &e, 0.0).unwrap().norm() - (1.0 - r) / (1.0 + r)).abs());
        }
        let mean = mean_transmission_over_fsr(&e, 8192).unwrap();
        let series: f64 = (0..20_000).map(|m| ((1.0 - r) * r.powi(m)).powi(2)).sum();
        parseval = parseval.max((mean - series).abs()).max((series - impulse_train_power_limit(r)).abs());
    }
    outcome(
        fsr_err < FSR_RELATIVE_TOLERANCE && anti <= ANTI_RESONANCE_TOLERANCE && parseval <= PARSEVAL_TOLERANCE,
        format!(
            "FSR {fsr_ghz:.3} GHz (rel err {fsr_err:.1e}, tol {FSR_RELATIVE_TOLERANCE:.0e}); \
             anti-resonance err {anti:.1e} (tol {ANTI_RESONANCE_TOLERANCE:.0e}); Parseval err {parseval:.1e} (tol {PARSEVAL_TOLERANCE:.0e})"
        ),
    )
}

fn csv_with_threads(config: &RunConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| csv_string(&compute_sweep(config).unwrap().0))
}

fn criterion_9() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    let mut configs: Vec<RunConfig> = PRESETS.iter().map(|p| RunConfig::from_preset(p).unwrap()).collect();
    let mut direct = RunConfig::from_preset("fig3a").unwrap();
    direct.engine = EngineSelection::Direct;
    configs.push(direct);
    for config in &configs {
        let reference = csv_with_threads(config, 1);
        let same = [1, 4, 4]
            .iter()
            .all(|&threads| csv_with_threads(config, threads) == reference);
        passed &= same;
        notes.push(format!(
            "{} ({}): {}",
            config.preset.as_deref().unwrap_or("?"),
            config.engine,
            if same { "identical" } else { "differs" }
        ));
    }
    outcome(passed, format!("1 vs 4 workers, repeated runs: {}", notes.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 fig3a dip sequence", criterion_1),
        ("2 fig3b dip/peak alternation", criterion_2),
        ("3 fig3c flattening", criterion_3),
        ("4 HOM closed form", criterion_4),
        ("5 comb model vs brute force", criterion_5),
        ("6 engine vs comb model", criterion_6),
        ("7 numerical integrity", criterion_7),
        ("8 etalon element", criterion_8),
        ("9 determinism", criterion_9),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.passed {
            failures += 1;
        }
        println!("criterion {name}: {} | {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
