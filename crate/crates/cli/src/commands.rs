use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use herdtrack::experiment::{evaluate, mean_ospa2, run_once, track_frames, RunOutput, RunRecord};
use herdtrack::io::{format_estimates, format_measurements, format_truth, parse_estimates, parse_measurements, parse_truth};
use herdtrack::metrics::MetricConfig;
use herdtrack::{simulate as simulate_scenario, Error, ModeSpec, ScenarioConfig};
use log::{error, info};
use rayon::prelude::*;

use crate::svg;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult = Result<ExitCode, Failure>;

/// Bad input: exit code 2.
fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

/// Failure while running: exit code 1.
fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn classify(error: Error) -> Failure {
    match error {
        Error::Config(_) | Error::Parse { .. } | Error::InvalidMeasurement { .. } | Error::DimensionMismatch { .. } => {
            input(error)
        }
        other => runtime(other),
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(path).map_err(|e| input(anyhow!(e).context(path.display().to_string())))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(anyhow!(e).context(format!("reading {}", path.display()))))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)
}

fn parse_file<T>(path: &Path, parse: impl Fn(&str) -> herdtrack::Result<T>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| input(anyhow!(e).context(path.display().to_string())))
}

fn records_csv(records: &[(String, &RunRecord)]) -> String {
    let mut out = String::from("mode,run,step,ospa2,truth_card,est_card\n");
    for (mode, r) in records {
        writeln!(out, "{mode},{},{},{},{},{}", r.run, r.step, r.ospa2, r.truth_card, r.est_card).unwrap();
    }
    out
}

pub fn simulate(config: &Path, seed: Option<u64>, out: &Path) -> CmdResult {
    let config = load_config(config)?;
    let seed = seed.unwrap_or(config.seed);
    let sim = simulate_scenario(&config, seed).map_err(classify)?;
    create_dir(out)?;
    write(out, "measurements.txt", &format_measurements(sim.sensors, &sim.frames))?;
    write(out, "truth.txt", &format_truth(&sim.truth))?;
    info!("simulated {} steps with seed {seed}", sim.horizon());
    Ok(ExitCode::SUCCESS)
}

pub fn track(
    config: &Path,
    measurements: &Path,
    truth: Option<&Path>,
    seed: Option<u64>,
    mode: Option<&str>,
    out: &Path,
) -> CmdResult {
    let config = load_config(config)?;
    let mode = match mode {
        Some(m) => config.default_mode().with_override(m).map_err(input)?,
        None => config.default_mode(),
    };
    let seed = seed.unwrap_or(config.seed);
    let (sensors, frames) = parse_file(measurements, parse_measurements)?;
    let expected = config.sensor_models().len();
    if sensors != expected {
        return Err(input(anyhow!(
            "{}: file has {sensors} sensors, config declares {expected}",
            measurements.display()
        )));
    }
    let truth = truth.map(|p| parse_file(p, parse_truth)).transpose()?;
    if let Some(t) = &truth {
        if t.len() != frames.len() {
            return Err(input(anyhow!("truth covers {} steps, measurements {}", t.len(), frames.len())));
        }
    }

    let output = track_frames(&config, mode, seed, &frames).map_err(classify)?;
    create_dir(out)?;
    let text = format_estimates(&output.estimates);
    write(out, "estimates.txt", &text)?;
    // Score the estimates as written so records agree with `metrics` on the file.
    let estimates = parse_estimates(&text).map_err(runtime)?;

    let mut csv = String::from("run,seed,step,ospa2,truth_card,est_card\n");
    match &truth {
        Some(t) => {
            for r in evaluate(t, &estimates, &config.metric, 0, seed).map_err(classify)? {
                writeln!(csv, "0,{seed},{},{},{},{}", r.step, r.ospa2, r.truth_card, r.est_card).unwrap();
            }
        }
        None => {
            for (k, e) in estimates.iter().enumerate() {
                writeln!(csv, "0,{seed},{k},,,{}", e.len()).unwrap();
            }
        }
    }
    write(out, "records.csv", &csv)?;

    let mut timing = String::from("step,seconds\n");
    for (k, s) in output.step_seconds.iter().enumerate() {
        writeln!(timing, "{k},{s}").unwrap();
    }
    write(out, "timing.csv", &timing)?;
    info!("tracked {} steps in mode {mode}", frames.len());
    Ok(ExitCode::SUCCESS)
}

/// Unique display names for the compared modes; repeats get a `#n` suffix.
fn mode_names(modes: &[ModeSpec]) -> Vec<String> {
    modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let repeats = modes[..i].iter().filter(|other| *other == m).count();
            if repeats == 0 {
                m.to_string()
            } else {
                format!("{m}#{}", repeats + 1)
            }
        })
        .collect()
}

pub fn campaign(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    runs: Option<usize>,
    workers: Option<usize>,
    mode: Option<&str>,
) -> CmdResult {
    let mut config = load_config(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(runs) = runs {
        config.runs = runs;
    }
    let modes = match mode {
        Some(m) => vec![config.default_mode().with_override(m).map_err(input)?],
        None => config.campaign_modes(),
    };
    let names = mode_names(&modes);
    let jobs: Vec<(usize, usize)> = (0..modes.len())
        .flat_map(|m| (0..config.runs).map(move |r| (m, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(runtime)?;
    let results: Vec<herdtrack::Result<RunOutput>> =
        pool.install(|| jobs.par_iter().map(|&(m, r)| run_once(&config, modes[m], r)).collect());

    let mut failed = 0;
    let mut per_mode: Vec<Vec<RunOutput>> = vec![Vec::new(); modes.len()];
    for (&(m, r), result) in jobs.iter().zip(results) {
        match result {
            Ok(output) => per_mode[m].push(output),
            Err(e) => {
                failed += 1;
                error!("mode {} run {r} failed: {e}", names[m]);
            }
        }
    }

    create_dir(out)?;
    let rows: Vec<(String, &RunRecord)> = per_mode
        .iter()
        .zip(&names)
        .flat_map(|(runs, name)| runs.iter().flat_map(move |o| o.records.iter().map(move |r| (name.clone(), r))))
        .collect();
    write(out, "runs.csv", &records_csv(&rows))?;

    let mut summary = String::from("mode,step,mean_ospa2,runs\n");
    let mut series = Vec::new();
    for (runs, name) in per_mode.iter().zip(&names) {
        let records: Vec<&[RunRecord]> = runs.iter().map(|o| o.records.as_slice()).collect();
        let mean = mean_ospa2(&records);
        for (k, v) in mean.iter().enumerate() {
            writeln!(summary, "{name},{k},{v},{}", runs.len()).unwrap();
        }
        let overall = if mean.is_empty() { 0.0 } else { mean.iter().sum::<f64>() / mean.len() as f64 };
        println!("{name}: {} runs, mean OSPA(2) {overall:.3}", runs.len());
        series.push((name.clone(), mean));
    }
    write(out, "summary.csv", &summary)?;
    write(out, "ospa2.svg", &svg::line_plot(&series, config.metric.cutoff))?;

    let mut timing = String::from("mode,run,step,seconds\n");
    for (runs, name) in per_mode.iter().zip(&names) {
        for o in runs {
            for (k, s) in o.track.step_seconds.iter().enumerate() {
                writeln!(timing, "{name},{},{k},{s}", o.run).unwrap();
            }
        }
    }
    write(out, "timing.csv", &timing)?;

    if failed > 0 {
        error!("{failed} of {} runs failed and were excluded", jobs.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn metrics(truth: &Path, estimates: &Path, config: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let metric = match config {
        Some(path) => load_config(path)?.metric,
        None => MetricConfig::default(),
    };
    let truth = parse_file(truth, parse_truth)?;
    let estimates = parse_file(estimates, parse_estimates)?;
    let records = evaluate(&truth, &estimates, &metric, 0, 0).map_err(classify)?;
    let mut csv = String::from("step,ospa2,truth_card,est_card\n");
    for r in &records {
        writeln!(csv, "{},{},{},{}", r.step, r.ospa2, r.truth_card, r.est_card).unwrap();
    }
    match out {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
