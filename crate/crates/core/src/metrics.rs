//! Path-tracking metrics over a simulation log.
//!
//! Definitions:
//!
//! * lateral error: signed distance to the nearest path segment, positive to
//!   the path's left;
//! * orientation error: heading minus the tangent of the segment holding the
//!   foot point;
//! * speed errors are taken over the post-transient window `t >= transient_s`;
//! * speed deviation is `100 * max|v - v_t| / v_t` by default, or the mean
//!   relative deviation when configured;
//! * accumulated orientation is the total absolute heading change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanefit::Polyline;
use crate::model::{wrap_angle, Point2};
use crate::sim::SimLog;

pub const DEFINITION_VERSION: u32 = 1;

/// Nearest point of a polyline to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub segment: usize,
    /// Fraction along the segment.
    pub t: f64,
    pub foot: Point2,
    pub signed_distance: f64,
    /// Arc length of the foot point.
    pub s: f64,
    pub tangent_heading: f64,
}

/// Projects points onto a fixed polyline, searching near the previous
/// answer first.
#[derive(Debug, Clone)]
pub struct PathProjector<'a> {
    pts: &'a [Point2],
    s: Vec<f64>,
    last: Option<usize>,
}

const LOCAL_WINDOW: usize = 200;
const LOCAL_TRUST: f64 = 2.0;

impl<'a> PathProjector<'a> {
    pub fn new(path: &'a Polyline) -> Result<Self> {
        let pts = &path.points[..];
        if pts.len() < 2 {
            return Err(Error::DegeneratePath);
        }
        let s = crate::lanefit::cumulative_arclength(pts)?;
        if !(*s.last().unwrap() > 0.0) {
            return Err(Error::DegeneratePath);
        }
        Ok(Self { pts, s, last: None })
    }

    fn project_segment(&self, i: usize, p: Point2) -> Option<(f64, f64, Point2)> {
        let a = self.pts[i];
        let b = self.pts[i + 1];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len_sq = d[0] * d[0] + d[1] * d[1];
        if len_sq == 0.0 {
            return None;
        }
        let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len_sq).clamp(0.0, 1.0);
        let foot = [a[0] + t * d[0], a[1] + t * d[1]];
        let dist_sq = (p[0] - foot[0]).powi(2) + (p[1] - foot[1]).powi(2);
        Some((dist_sq, t, foot))
    }

    fn best_in(&self, indices: impl Iterator<Item = usize>, p: Point2) -> Option<(usize, f64, f64, Point2)> {
        let mut best: Option<(usize, f64, f64, Point2)> = None;
        for i in indices {
            if let Some((d, t, foot)) = self.project_segment(i, p) {
                if best.is_none_or(|b| d < b.1) {
                    best = Some((i, d, t, foot));
                }
            }
        }
        best
    }

    fn is_closed(&self) -> bool {
        self.pts.first() == self.pts.last()
    }

    pub fn project(&mut self, p: Point2) -> Projection {
        let n = self.pts.len() - 1;
        let local = self.last.filter(|_| n > 2 * LOCAL_WINDOW + 1).and_then(|i| {
            let w = LOCAL_WINDOW as isize;
            let closed = self.is_closed();
            let idx = (-w..=w).filter_map(move |off| {
                let j = i as isize + off;
                if closed {
                    Some(j.rem_euclid(n as isize) as usize)
                } else {
                    (0..n as isize).contains(&j).then_some(j as usize)
                }
            });
            let edge = |j: usize| {
                let off = (j as isize - i as isize).rem_euclid(n as isize);
                off == w || off == n as isize - w
            };
            self.best_in(idx, p).filter(|b| b.1.sqrt() <= LOCAL_TRUST && !edge(b.0))
        });
        let (i, _, t, foot) = local.or_else(|| self.best_in(0..n, p)).expect("path has a non-degenerate segment");
        self.last = Some(i);
        let a = self.pts[i];
        let b = self.pts[i + 1];
        let d = [b[0] - a[0], b[1] - a[1]];
        let cross = d[0] * (p[1] - foot[1]) - d[1] * (p[0] - foot[0]);
        let dist = (p[0] - foot[0]).hypot(p[1] - foot[1]);
        Projection {
            segment: i,
            t,
            foot,
            signed_distance: if cross < 0.0 { -dist } else { dist },
            s: self.s[i] + t * (self.s[i + 1] - self.s[i]),
            tangent_heading: d[1].atan2(d[0]),
        }
    }
}

/// Signed perpendicular distance to the nearest segment, positive on the left.
pub fn cross_track(point: Point2, path: &Polyline) -> Result<f64> {
    Ok(PathProjector::new(path)?.project(point).signed_distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedDeviation {
    #[default]
    MaxRelative,
    MeanRelative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub transient_s: f64,
    pub speed_deviation: SpeedDeviation,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { transient_s: 10.0, speed_deviation: SpeedDeviation::MaxRelative }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub completion_time: f64,
    pub avg_linear_speed: f64,
    pub avg_angular_speed: f64,
    pub mae_lateral: f64,
    pub mae_orientation: f64,
    pub rmse_linear_speed: f64,
    pub linear_speed_deviation_pct: f64,
    pub accumulated_orientation: f64,
    /// Start of the window used for the speed metrics.
    pub speed_window_start: f64,
    pub speed_deviation_definition: SpeedDeviation,
    pub definition_version: u32,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "completion_time,avg_linear_speed,avg_angular_speed,mae_lateral,\
mae_orientation,rmse_linear_speed,linear_speed_deviation_pct,accumulated_orientation";

    pub fn to_csv_row(&self) -> String {
        [
            self.completion_time,
            self.avg_linear_speed,
            self.avg_angular_speed,
            self.mae_lateral,
            self.mae_orientation,
            self.rmse_linear_speed,
            self.linear_speed_deviation_pct,
            self.accumulated_orientation,
        ]
        .iter()
        .map(|x| crate::sim::fmt_sig(*x))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn compute_metrics(log: &SimLog, path: &Polyline, v_t: f64) -> Result<MetricsReport> {
    compute_metrics_with(log, path, v_t, &MetricsConfig::default())
}

pub fn compute_metrics_with(log: &SimLog, path: &Polyline, v_t: f64, cfg: &MetricsConfig) -> Result<MetricsReport> {
    let recs = &log.records;
    if recs.is_empty() {
        return Err(Error::EmptyLog);
    }
    if !(v_t > 0.0) {
        return Err(Error::InvalidParams(format!("target speed must be positive, got {v_t}")));
    }
    let mut proj = PathProjector::new(path)?;
    let n = recs.len() as f64;

    let mut lateral = 0.0;
    let mut orientation = 0.0;
    for r in recs {
        let pr = proj.project([r.pose.x, r.pose.y]);
        lateral += pr.signed_distance.abs();
        orientation += wrap_angle(r.pose.phi - pr.tangent_heading).abs();
    }

    let distance: f64 = recs.windows(2).map(|w| (w[1].pose.x - w[0].pose.x).hypot(w[1].pose.y - w[0].pose.y)).sum();
    let accumulated: f64 = recs.windows(2).map(|w| wrap_angle(w[1].pose.phi - w[0].pose.phi).abs()).sum();
    let completion_time = recs.last().unwrap().t;

    let windowed: Vec<f64> = recs.iter().filter(|r| r.t >= cfg.transient_s).map(|r| r.applied.v).collect();
    let (speeds, window_start) = if windowed.is_empty() {
        (recs.iter().map(|r| r.applied.v).collect::<Vec<_>>(), recs[0].t)
    } else {
        (windowed, cfg.transient_s)
    };
    let m = speeds.len() as f64;
    let rmse = (speeds.iter().map(|v| (v - v_t).powi(2)).sum::<f64>() / m).sqrt();
    let deviation = match cfg.speed_deviation {
        SpeedDeviation::MaxRelative => speeds.iter().map(|v| (v - v_t).abs()).fold(0.0, f64::max),
        SpeedDeviation::MeanRelative => speeds.iter().map(|v| (v - v_t).abs()).sum::<f64>() / m,
    };

    Ok(MetricsReport {
        completion_time,
        avg_linear_speed: if completion_time > 0.0 { distance / completion_time } else { 0.0 },
        avg_angular_speed: recs.iter().map(|r| r.applied.omega.abs()).sum::<f64>() / n,
        mae_lateral: lateral / n,
        mae_orientation: orientation / n,
        rmse_linear_speed: rmse,
        linear_speed_deviation_pct: 100.0 * deviation / v_t,
        accumulated_orientation: accumulated,
        speed_window_start: window_start,
        speed_deviation_definition: cfg.speed_deviation,
        definition_version: DEFINITION_VERSION,
    })
}
