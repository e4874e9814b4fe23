use serde::{Deserialize, Serialize};

use super::poly::{fit_cubic, CubicPoly};
use crate::error::{Error, Result};
use crate::model::Point2;

/// Samples used when averaging two lanes into a centreline.
pub const CENTER_SAMPLES: usize = 64;

pub const DEFAULT_LANE_WIDTH: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterlineMode {
    BothLanes,
    LeftOnly,
    RightOnly,
    None,
}

impl CenterlineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CenterlineMode::BothLanes => "both_lanes",
            CenterlineMode::LeftOnly => "left_only",
            CenterlineMode::RightOnly => "right_only",
            CenterlineMode::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterlineResult {
    pub mode: CenterlineMode,
    pub centerline: Option<CubicPoly>,
    /// Lane models used for averaging, including any synthesised lane.
    pub lane_left: Option<CubicPoly>,
    pub lane_right: Option<CubicPoly>,
}

impl CenterlineResult {
    pub fn none() -> Self {
        Self { mode: CenterlineMode::None, centerline: None, lane_left: None, lane_right: None }
    }
}

fn average(left: &CubicPoly, right: &CubicPoly) -> Result<CubicPoly> {
    let lo = left.x_range[0].max(right.x_range[0]);
    let hi = left.x_range[1].min(right.x_range[1]);
    if !(lo < hi) {
        return Err(Error::DisjointRanges(left.x_range[0], left.x_range[1], right.x_range[0], right.x_range[1]));
    }
    let xs: Vec<f64> = (0..CENTER_SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (CENTER_SAMPLES - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| 0.5 * (left.eval(x) + right.eval(x))).collect();
    Ok(fit_cubic(&xs, &ys)?.poly)
}

/// Offsets a lane sideways by `offset` metres along its left-hand normal
/// (negative moves right) and refits.
fn offset_lane(lane: &CubicPoly, offset: f64) -> Result<CubicPoly> {
    let samples = lane.sample(CENTER_SAMPLES);
    let moved: Vec<Point2> = samples
        .points
        .iter()
        .map(|&[x, y]| {
            let slope = lane.derivative(x);
            let norm = (1.0 + slope * slope).sqrt();
            // Left normal of the unit tangent (1, slope) / norm.
            [x - offset * slope / norm, y + offset / norm]
        })
        .collect();
    let xs: Vec<f64> = moved.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = moved.iter().map(|p| p[1]).collect();
    Ok(fit_cubic(&xs, &ys)?.poly)
}

/// Lane centreline from whichever lane models were detected.
///
/// A single lane is mirrored across the lane width toward the track interior
/// before averaging. With no lanes the result carries mode `None`, which the
/// caller answers by creeping forward at minimum speed.
pub fn centerline(left: Option<&CubicPoly>, right: Option<&CubicPoly>, lane_width: f64) -> Result<CenterlineResult> {
    if !(lane_width > 0.0) {
        return Err(Error::InvalidParams(format!("lane width must be positive, got {lane_width}")));
    }
    let (mode, l, r) = match (left, right) {
        (Some(l), Some(r)) => (CenterlineMode::BothLanes, *l, *r),
        (Some(l), None) => (CenterlineMode::LeftOnly, *l, offset_lane(l, -lane_width)?),
        (None, Some(r)) => (CenterlineMode::RightOnly, offset_lane(r, lane_width)?, *r),
        (None, None) => return Ok(CenterlineResult::none()),
    };
    Ok(CenterlineResult { mode, centerline: Some(average(&l, &r)?), lane_left: Some(l), lane_right: Some(r) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookahead {
    pub points: [Point2; 3],
    /// Any point lies outside the centreline's validity range.
    pub extrapolated: bool,
}

pub const DEFAULT_LEAD: f64 = 2.0;
pub const DEFAULT_SPACING: f64 = 0.5;

/// Three centreline points at `lead`, `lead + spacing` and `lead + 2 spacing`
/// metres ahead along the vehicle x-axis.
pub fn lookahead_points(center: &CubicPoly, lead: f64, spacing: f64) -> Result<Lookahead> {
    if !(lead > 0.0 && spacing > 0.0) {
        return Err(Error::InvalidParams(format!("look-ahead lead {lead} and spacing {spacing} must be positive")));
    }
    let xs = [lead, lead + spacing, lead + 2.0 * spacing];
    let points = xs.map(|x| [x, center.eval(x)]);
    Ok(Lookahead { points, extrapolated: xs.iter().any(|&x| !center.in_range(x)) })
}
