//! Command-line front end: `simulate`, `fit`, `metrics` and `batch`.
//!
//! Exit codes: 0 success, 1 usage or data error, 2 run timed out.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lanefit::{centerline, fit_lane, CenterlineMode, CubicPoly, PipelineConfig, Polyline};
use crate::metrics::{compute_metrics_with, MetricsConfig, MetricsReport};
use crate::sim::{run, Scenario, SimLog, Termination, Track};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_TIMEOUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "lanetrack", version, about = "Lane-following tracking controller simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Emit {
    LogCsv,
    MetricsJson,
    Plotdata,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its log, metrics and plot series.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario override as a dotted path, e.g. `gains.k1=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Artifacts to write; all of them by default.
        #[arg(long, value_delimiter = ',')]
        emit: Vec<Emit>,
    },
    /// Fit lane points from a `lane_id,x,y` CSV and derive the centreline.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        delta_s: f64,
        #[arg(long, default_value_t = crate::lanefit::DEFAULT_LANE_WIDTH)]
        lane_width: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute path-tracking metrics of a logged run.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        /// A track JSON as written by `simulate`, or a scenario file.
        #[arg(long)]
        track: PathBuf,
        /// Required unless `--track` is a scenario.
        #[arg(long)]
        target_speed: Option<f64>,
    },
    /// Run every scenario listed in a batch file, concurrently.
    Batch {
        /// One run per line: `<scenario.json> [KEY=VALUE ...]`; `#` starts a comment.
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn execute(cmd: &Command) -> Result<u8> {
    match cmd {
        Command::Simulate { scenario, out, overrides, emit } => {
            let sc = load_scenario(scenario, overrides)?;
            let emit = if emit.is_empty() { vec![Emit::LogCsv, Emit::MetricsJson, Emit::Plotdata] } else { emit.clone() };
            let outcome = simulate_to_dir(&sc, out, &emit)?;
            println!("termination: {}", outcome.termination.as_str());
            println!("steps: {}", outcome.steps);
            Ok(exit_code(outcome.termination))
        }
        Command::Fit { input, delta_s, lane_width, out } => {
            let cfg = PipelineConfig { delta_s: *delta_s, lane_width: *lane_width, ..Default::default() };
            let result = fit_file(input, &cfg)?;
            fs::write(out, serde_json::to_string_pretty(&result)? + "\n")?;
            println!("mode: {}", result.mode.as_str());
            if let Some(c) = &result.centerline {
                println!("centerline: {:?}", c.coeffs);
            }
            Ok(EXIT_OK)
        }
        Command::Metrics { log, track, target_speed } => {
            let text = metrics_for_files(log, track, *target_speed)?;
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Batch { file, out, jobs } => run_batch(file, out, *jobs),
    }
}

fn exit_code(t: Termination) -> u8 {
    if t == Termination::Timeout {
        EXIT_TIMEOUT
    } else {
        EXIT_OK
    }
}

pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let sc = Scenario::from_json(&text)?;
    if overrides.is_empty() {
        Ok(sc)
    } else {
        sc.with_overrides(overrides)
    }
}

/// Pretty JSON of a metrics report, as written to `metrics.json`.
pub fn metrics_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("metrics serialise") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOutcome {
    pub termination: Termination,
    pub steps: usize,
}

/// Runs a scenario and writes the requested artifacts plus `track.json`.
/// Metrics go to `metrics.json` and a one-row `metrics.csv`.
///
/// Metrics are computed from the log as re-read from its CSV text, so
/// `metrics` on the written files reproduces them exactly.
pub fn simulate_to_dir(sc: &Scenario, out: &Path, emit: &[Emit]) -> Result<SimOutcome> {
    let track = sc.track.build()?;
    let log = run(sc)?;
    fs::create_dir_all(out)?;
    let csv_text = log.to_csv_string();
    if emit.contains(&Emit::LogCsv) {
        fs::write(out.join("trajectory.csv"), &csv_text)?;
    }
    fs::write(out.join("track.json"), serde_json::to_string(&track)? + "\n")?;
    if emit.contains(&Emit::MetricsJson) {
        let reread = SimLog::read_csv(csv_text.as_bytes())?;
        let report = compute_metrics_with(&reread, &track.reference_path, sc.v_t, &sc.metrics)?;
        fs::write(out.join("metrics.json"), metrics_json(&report))?;
        fs::write(out.join("metrics.csv"), format!("{}\n{}\n", MetricsReport::CSV_HEADER, report.to_csv_row()))?;
    }
    if emit.contains(&Emit::Plotdata) {
        write_plotdata(&log, &track, &out.join("plotdata"))?;
    }
    Ok(SimOutcome { termination: log.termination, steps: log.records.len() })
}

fn write_series(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.into_iter().map(crate::sim::fmt_sig))?;
    }
    w.flush()?;
    Ok(())
}

/// Speed, yaw-rate, position and heading time series plus the x-y path.
pub fn write_plotdata(log: &SimLog, track: &Track, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let recs = &log.records;
    let tg = |r: &crate::sim::StepRecord, f: fn(&crate::sim::TargetSample) -> f64| r.target.as_ref().map_or(f64::NAN, f);
    write_series(&dir.join("linear_speed.csv"), &["t", "v_cmd", "v_app"], recs.iter().map(|r| vec![r.t, r.commanded.v, r.applied.v]))?;
    write_series(
        &dir.join("angular_speed.csv"),
        &["t", "omega_cmd", "omega_app"],
        recs.iter().map(|r| vec![r.t, r.commanded.omega, r.applied.omega]),
    )?;
    write_series(&dir.join("x_position.csv"), &["t", "x", "x_t"], recs.iter().map(|r| vec![r.t, r.pose.x, tg(r, |t| t.x)]))?;
    write_series(&dir.join("y_position.csv"), &["t", "y", "y_t"], recs.iter().map(|r| vec![r.t, r.pose.y, tg(r, |t| t.y)]))?;
    write_series(
        &dir.join("orientation.csv"),
        &["t", "phi", "phi_t"],
        recs.iter().map(|r| vec![r.t, r.pose.phi, tg(r, |t| t.phi)]),
    )?;
    write_series(&dir.join("trajectory_xy.csv"), &["x", "y"], recs.iter().map(|r| vec![r.pose.x, r.pose.y]))?;
    write_series(
        &dir.join("reference_path.csv"),
        &["x", "y"],
        track.reference_path.points.iter().map(|p| vec![p[0], p[1]]),
    )?;
    Ok(())
}

/// Reads a track, accepting either a track JSON or a scenario file; a
/// scenario also supplies the target speed and metrics settings.
pub fn load_track_source(path: &Path) -> Result<(Track, Option<Scenario>)> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("reference_path").is_some() {
        let track: Track = serde_json::from_value(value)?;
        track.validate()?;
        Ok((track, None))
    } else {
        let sc = Scenario::from_json(&text)?;
        Ok((sc.track.build()?, Some(sc)))
    }
}

pub fn metrics_for_files(log: &Path, track: &Path, target_speed: Option<f64>) -> Result<String> {
    let (track, sc) = load_track_source(track)?;
    let v_t = target_speed
        .or(sc.as_ref().map(|s| s.v_t))
        .ok_or_else(|| Error::InvalidParams("--target-speed is required with a track file".into()))?;
    let cfg = sc.map_or(MetricsConfig::default(), |s| s.metrics);
    let log = SimLog::read_csv(fs::File::open(log)?)?;
    let report = compute_metrics_with(&log, &track.reference_path, v_t, &cfg)?;
    Ok(metrics_json(&report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaneOutput {
    pub coeffs: [f64; 4],
    pub x_range: [f64; 2],
    pub degree: usize,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutput {
    pub mode: CenterlineMode,
    pub left: Option<LaneOutput>,
    pub right: Option<LaneOutput>,
    pub centerline: Option<CubicPoly>,
    /// Centreline sampled across its validity range.
    pub centerline_samples: Vec<[f64; 2]>,
}

const FIT_SAMPLES: usize = 41;

/// Reads `lane_id,x,y` rows; lane ids are `left`/`l`/`0` or `right`/`r`/`1`.
pub fn read_lane_csv(path: &Path) -> Result<(Polyline, Polyline)> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Ok((Polyline::default(), Polyline::default()));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Malformed(format!("missing column `{name}`")))
    };
    let (ci, cx, cy) = (col("lane_id")?, col("x")?, col("y")?);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("").trim();
        let num = |i: usize| {
            get(i).parse::<f64>().map_err(|_| Error::Malformed(format!("row {}: `{}` is not a number", line + 1, get(i))))
        };
        let p = [num(cx)?, num(cy)?];
        match get(ci).to_ascii_lowercase().as_str() {
            "left" | "l" | "0" => left.push(p),
            "right" | "r" | "1" => right.push(p),
            other => return Err(Error::Malformed(format!("row {}: unknown lane_id `{other}`", line + 1))),
        }
    }
    Ok((left.into(), right.into()))
}

pub fn fit_file(path: &Path, cfg: &PipelineConfig) -> Result<FitOutput> {
    if !(cfg.delta_s > 0.0) {
        return Err(Error::NonPositiveSpacing(cfg.delta_s));
    }
    let (left, right) = read_lane_csv(path)?;
    let lane = |raw: &Polyline| -> Result<Option<LaneOutput>> {
        Ok(fit_lane(raw, cfg)?.map(|f| LaneOutput {
            coeffs: f.poly.coeffs,
            x_range: f.poly.x_range,
            degree: f.degree,
            points_used: crate::lanefit::roi_filter(raw, &cfg.roi).len(),
        }))
    };
    let (l, r) = (lane(&left)?, lane(&right)?);
    let poly = |o: &Option<LaneOutput>| o.as_ref().map(|o| CubicPoly { coeffs: o.coeffs, x_range: o.x_range });
    let c = centerline(poly(&l).as_ref(), poly(&r).as_ref(), cfg.lane_width)?;
    let samples = c.centerline.map_or(Vec::new(), |p| p.sample(FIT_SAMPLES).points);
    Ok(FitOutput { mode: c.mode, left: l, right: r, centerline: c.centerline, centerline_samples: samples })
}

struct BatchJob {
    line: usize,
    scenario: PathBuf,
    overrides: Vec<String>,
}

fn parse_batch(file: &Path) -> Result<Vec<BatchJob>> {
    let text = fs::read_to_string(file)?;
    let base = file.parent().unwrap_or(Path::new("."));
    let mut jobs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let sc = PathBuf::from(parts.next().unwrap());
        let scenario = if sc.is_relative() { base.join(sc) } else { sc };
        jobs.push(BatchJob { line: i + 1, scenario, overrides: parts.map(str::to_string).collect() });
    }
    Ok(jobs)
}

fn run_batch(file: &Path, out: &Path, jobs: usize) -> Result<u8> {
    let list = parse_batch(file)?;
    let all = [Emit::LogCsv, Emit::MetricsJson, Emit::Plotdata];
    let results: Vec<(String, Result<SimOutcome>)> = std::thread::scope(|scope| {
        let chunk = list.len().div_ceil(jobs.max(1)).max(1);
        let handles: Vec<_> = list
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|job| {
                            let stem = job.scenario.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
                            let name = format!("{:03}_{stem}", job.line);
                            let res = load_scenario(&job.scenario, &job.overrides)
                                .and_then(|sc| simulate_to_dir(&sc, &out.join(&name), &all));
                            (name, res)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("batch worker panicked")).collect()
    });
    let mut code = EXIT_OK;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "run,termination,steps")?;
    for (name, res) in &results {
        match res {
            Ok(o) => {
                writeln!(w, "{name},{},{}", o.termination.as_str(), o.steps)?;
                code = code.max(exit_code(o.termination));
            }
            Err(e) => {
                writeln!(w, "{name},error,0")?;
                eprintln!("error: {name}: {e}");
                code = EXIT_ERROR;
            }
        }
    }
    Ok(if results.iter().any(|(_, r)| r.is_err()) { EXIT_ERROR } else { code })
}
