use serde::{Deserialize, Serialize};

use super::centerline::{centerline, CenterlineResult, DEFAULT_LANE_WIDTH};
use super::poly::{fit_cubic_points, CubicFit};
use super::polyline::{resample, roi_filter, Polyline, Roi};
use crate::error::Result;

/// Settings for turning raw lane points into lane and centreline models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub delta_s: f64,
    pub roi: Roi,
    pub lane_width: f64,
    /// Fewer ROI points than this and the lane counts as undetected.
    pub min_points: usize,
    /// Lanes whose points span less than this many metres in x are dropped.
    pub min_span: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { delta_s: 0.25, roi: Roi::default(), lane_width: DEFAULT_LANE_WIDTH, min_points: 4, min_span: 1.0 }
    }
}

/// ROI filter, order by forward distance, arc-length resample and fit.
///
/// Returns `None` when too little of the lane is visible to fit.
pub fn fit_lane(raw: &Polyline, cfg: &PipelineConfig) -> Result<Option<CubicFit>> {
    let mut pts = roi_filter(raw, &cfg.roi).points;
    if pts.len() < cfg.min_points {
        return Ok(None);
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let span = pts.last().unwrap()[0] - pts[0][0];
    if pts.len() < 2 || span < cfg.min_span {
        return Ok(None);
    }
    let resampled = resample(&pts, cfg.delta_s)?;
    if resampled.len() < 2 {
        return Ok(None);
    }
    fit_cubic_points(&resampled).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneEstimate {
    pub left: Option<CubicFit>,
    pub right: Option<CubicFit>,
    pub center: CenterlineResult,
}

pub fn estimate_lanes(left: &Polyline, right: &Polyline, cfg: &PipelineConfig) -> Result<LaneEstimate> {
    let l = fit_lane(left, cfg)?;
    let r = fit_lane(right, cfg)?;
    let center = match centerline(l.as_ref().map(|f| &f.poly), r.as_ref().map(|f| &f.poly), cfg.lane_width) {
        Ok(c) => c,
        // Two lanes seen over non-overlapping stretches: trust neither pairing
        // and fall back to the longer one.
        Err(crate::Error::DisjointRanges(..)) => {
            let (lf, rf) = (l.unwrap(), r.unwrap());
            let width = |f: &CubicFit| f.poly.x_range[1] - f.poly.x_range[0];
            if width(&lf) >= width(&rf) {
                centerline(Some(&lf.poly), None, cfg.lane_width)?
            } else {
                centerline(None, Some(&rf.poly), cfg.lane_width)?
            }
        }
        Err(e) => return Err(e),
    };
    Ok(LaneEstimate { left: l, right: r, center })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanefit::CenterlineMode;

    fn lane(y: f64) -> Polyline {
        (0..40).map(|i| [i as f64 * 0.3, y]).collect::<Vec<_>>().into()
    }

    #[test]
    fn two_lanes_give_both_mode() {
        let est = estimate_lanes(&lane(1.75), &lane(-1.75), &PipelineConfig::default()).unwrap();
        assert_eq!(est.center.mode, CenterlineMode::BothLanes);
        assert!(est.center.centerline.unwrap().eval(2.0).abs() < 1e-9);
    }

    #[test]
    fn sparse_lane_is_dropped() {
        let sparse: Polyline = vec![[1.0, 1.75], [1.2, 1.75], [1.3, 1.75]].into();
        let est = estimate_lanes(&sparse, &Polyline::default(), &PipelineConfig::default()).unwrap();
        assert_eq!(est.center.mode, CenterlineMode::None);
    }

    #[test]
    fn disjoint_lanes_fall_back_to_longer() {
        let near: Polyline = (0..10).map(|i| [i as f64 * 0.2, 1.75]).collect::<Vec<_>>().into();
        let far: Polyline = (0..20).map(|i| [5.0 + i as f64 * 0.2, -1.75]).collect::<Vec<_>>().into();
        let est = estimate_lanes(&near, &far, &PipelineConfig::default()).unwrap();
        assert_eq!(est.center.mode, CenterlineMode::RightOnly);
    }
}
