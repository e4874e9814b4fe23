mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::scenario_path;
use lanetrack::cli::load_track_source;
use lanetrack::sim::{SimLog, Track};

fn lanetrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanetrack")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_artifacts_that_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let sc = scenario_path("oval_preset.json");
    let o = lanetrack(&["simulate", "--scenario", p(&sc), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("termination: lap_complete"));
    for f in ["trajectory.csv", "metrics.json", "track.json", "plotdata/linear_speed.csv", "plotdata/trajectory_xy.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(SimLog::read_csv(csv.as_bytes()).unwrap().to_csv_string(), csv);
    let (track, _) = load_track_source(&out.join("track.json")).unwrap();
    let again: Track = serde_json::from_str(&serde_json::to_string(&track).unwrap()).unwrap();
    assert_eq!(again, track);

    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    for key in ["mae_lateral", "mae_orientation", "rmse_linear_speed", "accumulated_orientation", "completion_time"] {
        assert!(metrics[key].is_number(), "{key}");
    }
    let table = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("completion_time,") && lines[1].starts_with("80.64,"), "{table}");

    let m = lanetrack(&["metrics", "--log", p(&out.join("trajectory.csv")), "--track", p(&out.join("track.json")), "--target-speed", "1.5"]);
    assert_eq!(m.status.code(), Some(0), "{}", stderr(&m));
    assert_eq!(String::from_utf8(m.stdout).unwrap(), fs::read_to_string(out.join("metrics.json")).unwrap());
    let m = lanetrack(&["metrics", "--log", p(&out.join("trajectory.csv")), "--track", p(&sc)]);
    assert_eq!(String::from_utf8(m.stdout).unwrap(), fs::read_to_string(out.join("metrics.json")).unwrap());
}

#[test]
fn overrides_select_the_controller() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_path("oval_preset.json");
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--scenario", p(&sc), "--out", p(&out), "--emit", "log_csv"];
        args.extend_from_slice(extra);
        assert_eq!(lanetrack(&args).status.code(), Some(0));
        assert!(!out.join("metrics.json").exists());
        fs::read_to_string(out.join("trajectory.csv")).unwrap()
    };
    let base = run("p", &[]);
    assert_eq!(base, run("p2", &[]));
    assert_ne!(base, run("c", &["--set", "controller=comparative"]));
}

#[test]
fn unknown_override_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_path("oval_preset.json");
    let o = lanetrack(&["simulate", "--scenario", p(&sc), "--out", p(dir.path()), "--set", "gains.k9=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gains.k9"), "{}", stderr(&o));
}

#[test]
fn timeout_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_path("oval_preset.json");
    let o = lanetrack(&["simulate", "--scenario", p(&sc), "--out", p(dir.path()), "--set", "duration_max=5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(dir.path().join("trajectory.csv").is_file());
}

#[test]
fn metrics_of_empty_log_fails() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("empty.csv");
    fs::write(&log, "t,x,y,phi,v_cmd,omega_cmd,v_app,omega_app,x_t,y_t,phi_t,phi_t_dot,rho,alpha,beta,V1,V2,sat_flag,mode\n").unwrap();
    let o = lanetrack(&["metrics", "--log", p(&log), "--track", p(&scenario_path("oval_preset.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

fn lane_rows(id: &str, y: f64) -> String {
    (0..40).map(|i| format!("{id},{},{}\n", 0.25 * i as f64, y + 0.01 * (0.25 * i as f64).powi(2))).collect()
}

fn fit(dir: &Path, csv: &str) -> (Option<i32>, serde_json::Value) {
    let input = dir.join("lanes.csv");
    let out = dir.join("fit.json");
    fs::write(&input, csv).unwrap();
    let _ = fs::remove_file(&out);
    let o = lanetrack(&["fit", "--input", p(&input), "--out", p(&out)]);
    let json = fs::read_to_string(&out).map_or(serde_json::Value::Null, |t| serde_json::from_str(&t).unwrap());
    (o.status.code(), json)
}

#[test]
fn fit_reports_each_centerline_mode() {
    let dir = tempfile::tempdir().unwrap();
    let header = "lane_id,x,y\n";
    let both = format!("{header}{}{}", lane_rows("left", 1.75), lane_rows("right", -1.75));
    let (code, j) = fit(dir.path(), &both);
    assert_eq!(code, Some(0));
    assert_eq!(j["mode"], "both_lanes");
    let c = j["centerline"]["coeffs"].as_array().unwrap();
    assert!(c[0].as_f64().unwrap().abs() < 1e-3 && (c[2].as_f64().unwrap() - 0.01).abs() < 1e-3, "{c:?}");

    assert_eq!(fit(dir.path(), &format!("{header}{}", lane_rows("l", 1.75))).1["mode"], "left_only");
    assert_eq!(fit(dir.path(), &format!("{header}{}", lane_rows("1", -1.75))).1["mode"], "right_only");
    let (code, j) = fit(dir.path(), header);
    assert_eq!((code, j["mode"].as_str()), (Some(0), Some("none")));
    assert_eq!(fit(dir.path(), &format!("{header}middle,1,2\n")).0, Some(1));
}

#[test]
fn batch_runs_each_line_into_its_own_directory() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("runs.txt");
    let sc = scenario_path("oval_preset.json");
    fs::write(&list, format!("# sweep\n{0}\n{0} controller=comparative v_t=2.0\n", p(&sc))).unwrap();
    let out = dir.path().join("out");
    let o = lanetrack(&["batch", "--file", p(&list), "--out", p(&out), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("run,termination,steps\n002_oval_preset,lap_complete,"), "{stdout}");
    assert!(stdout.contains("003_oval_preset,lap_complete,"));
    assert!(out.join("002_oval_preset/trajectory.csv").is_file() && out.join("003_oval_preset/metrics.json").is_file());
}
